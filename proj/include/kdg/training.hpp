#pragma once

// Joint optimization of the reconstruction network and (optionally) the
// acquisition pattern with batch size 1, warmup-then-decay learning rates,
// domain-generalization noise injection and the radial interpolation-gap
// schedule.

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "kdg/acquisition.hpp"
#include "kdg/data.hpp"
#include "kdg/perturbation.hpp"
#include "kdg/reconstructor.hpp"
#include "kdg/trajectory.hpp"

namespace kdg {

struct TrainConfig {
    int epochs = 40;
    int batch_size = 1;
    double lr_recon_max = 5e-4;
    double lr_traj_cartesian = 0.025;
    double lr_traj_radial = 0.005;
    bool trajectory_learning = false;
    Sampling sampling = Sampling::Cartesian;
    int acceleration = 4;
    double center_fraction = 0.1;
    int radial_shots = 16;
    int initial_gap = 8;
    int lr_warmup = 4;
    double weight_decay = 0.0;
    double val_fraction = 0.1;
    NoiseConfig noise;
    ReconNetConfig model;
    std::uint64_t seed = 0;

    void validate() const;
    bool operator==(const TrainConfig&) const = default;
};

// Same shape as noise_schedule with lr_max as the peak, floored at lr_max/100.
double lr_schedule(double t, double total, double lr_max, double t_warmup = 4);

struct TrainState {
    TrainConfig config;
    int height = 0;
    int width = 0;
    int epoch = 0;
    ReconNetParams params;
    AdamState recon_opt;
    // Fixed pattern, or the current learned one (binarized mask / radial
    // trajectory with control points).
    SamplingPattern pattern;
    std::optional<CartesianScores> scores;  // learned Cartesian only
    AdamState traj_opt;

    int n_acquired() const;
};

TrainState init_state(const TrainConfig& config, int height, int width);

// Radial budget: shots = radial_shots, points = H*W / (acceleration*shots).
RadialTrajectory default_radial(const TrainConfig& config, int height, int width);
CartesianMask default_cartesian(const TrainConfig& config, int height);

struct StepResult {
    double loss = 0.0;
    bool noise_applied = false;
    double noise_strength = 0.0;
};

// One optimizer step on one sample at state.epoch.
StepResult train_step(TrainState& state, const Sample& sample);

// Applies the per-epoch gap schedule to a learned radial trajectory.
void begin_epoch(TrainState& state, int epoch);
int current_gap(const TrainState& state);

struct EpochMetrics {
    int epoch = 0;
    double mean_loss = 0.0;
    double val_psnr = 0.0;
    int gap = 1;
    double lr = 0.0;
    double noise_strength = 0.0;
};

struct NoiseLogRow {
    int epoch = 0;
    std::uint32_t sample = 0;
    bool applied = false;
    NoiseKind kind = NoiseKind::None;
    double strength = 0.0;
};

struct TrainResult {
    TrainState final_state;
    TrainState best_state;  // best validation PSNR
    std::vector<EpochMetrics> metrics;
    std::vector<NoiseLogRow> noise_log;
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> val_indices;
};

// Deterministic split: val_fraction of the samples (at least one when the
// dataset has two or more) chosen by seed.
void split_dataset(std::size_t n, double val_fraction, std::uint64_t seed, std::vector<std::size_t>& train,
                   std::vector<std::size_t>& val);

// Mean PSNR of clean reconstructions on the given samples.
double validation_psnr(const TrainState& state, std::span<const Sample> samples, std::span<const std::size_t> idx);

using EpochCallback = std::function<void(const EpochMetrics&)>;

TrainResult train(const TrainConfig& config, std::span<const Sample> dataset, const EpochCallback& on_epoch = {});

}  // namespace kdg
