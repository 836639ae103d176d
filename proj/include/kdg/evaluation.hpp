#pragma once

// PSNR, per-sample evaluation of trained models, and the paired
// difference analysis between model variants across domains.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kdg/acquisition.hpp"
#include "kdg/data.hpp"
#include "kdg/perturbation.hpp"
#include "kdg/reconstructor.hpp"

namespace kdg {

inline constexpr double kPsnrCap = 100.0;

// 10 log10(1 / MSE) for data range 1; capped at 100 dB.
double psnr(const Image& pred, const Image& gt);

struct ModelTag {
    Sampling sampling = Sampling::Cartesian;
    bool trajectory_learning = false;
    NoiseKind noise = NoiseKind::None;

    // e.g. "radial_tl_adversarial", "cartesian_fixed_none"
    std::string name() const;
    bool operator==(const ModelTag&) const = default;
};

struct TrainedModel {
    ModelTag tag;
    std::string name;  // defaults to tag.name()
    ReconNetParams params;
    SamplingPattern pattern;
};

struct EvalRecord {
    std::uint32_t sample_id = 0;
    Domain domain = Domain::Source;
    std::string model;
    double psnr = 0.0;
};

struct EvalOptions {
    // Replace the model's own pattern.
    std::optional<SamplingPattern> pattern_override;
    // Score the zero-filled network input instead of the reconstruction.
    bool bypass_net = false;
};

// Clean (noise-free) acquisition, forward pass, PSNR against gt.
std::vector<EvalRecord> evaluate_model(const TrainedModel& model, std::span<const Sample> dataset,
                                       const EvalOptions& opts = {});

struct PairedEvalReport {
    std::string model_a;
    std::string model_b;
    Domain domain = Domain::Source;
    std::vector<std::uint32_t> ids;
    std::vector<double> diffs;  // psnr_a - psnr_b, ordered by id
    double mean_diff = 0.0;
    double std_diff = 0.0;  // population
    std::size_t n = 0;
};

// Diffs over the sample ids present in both record sets.
PairedEvalReport paired_diff(std::span<const EvalRecord> a, std::span<const EvalRecord> b);

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;  // population
};
MeanStd mean_std(std::span<const double> v);

struct MatrixCell {
    std::string model;
    Domain domain = Domain::Source;
    double mean_psnr = 0.0;
    double std_psnr = 0.0;
    std::size_t n = 0;
};

struct CrossDomainReport {
    std::vector<MatrixCell> cells;
    // PSNR(no TL) - PSNR(TL) for matching sampling and noise; negative means
    // trajectory learning generalizes better.
    std::vector<PairedEvalReport> tl_pairs;
    // PSNR(noise) - PSNR(no noise) among fixed-trajectory models; positive
    // means the noise strategy helps.
    std::vector<PairedEvalReport> noise_pairs;
    std::vector<EvalRecord> records;
};

struct DomainSet {
    Domain domain;
    std::span<const Sample> samples;
};

CrossDomainReport cross_domain_matrix(std::span<const TrainedModel> models, std::span<const DomainSet> datasets);

// CSV writers: `model,domain,mean_psnr,std_psnr` and
// `model_a,model_b,mean_diff,std_diff,n`.
std::string matrix_csv(std::span<const MatrixCell> cells);
std::string paired_csv(std::span<const PairedEvalReport> pairs);
std::string records_csv(std::span<const EvalRecord> records);

}  // namespace kdg
