#pragma once

// Domain-generalization noise injectors: random trajectory jitter,
// single-step adversarial trajectory noise, and image-domain noise, plus the
// warmup-then-decay intensity schedule and the Bernoulli application gate.

#include <functional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "kdg/image.hpp"
#include "kdg/sampling_types.hpp"
#include "kdg/trajectory.hpp"

namespace kdg {

enum class NoiseKind { None, Image, Trajectory, TrajectoryAdversarial };

std::string_view noise_kind_name(NoiseKind k);
NoiseKind parse_noise_kind(std::string_view s);

struct NoiseConfig {
    NoiseKind kind = NoiseKind::None;
    double tau_cartesian = 10.0;  // lines
    double tau_radial = 30.0;     // grid units
    double epsilon_adv = 1.0;     // grid units
    int num_bits = 4;
    double sigma_image = 6e-5;
    double eps_max = 1.0;
    int t_warmup = 4;
    double apply_prob = 0.5;
    // Std of complex Gaussian measurement noise added to acquired samples.
    double measurement_sigma = 0.0;

    void validate() const;

    // Copy with the grid-dependent magnitudes (tau_cartesian, tau_radial,
    // num_bits) rescaled from a reference_size grid to `size`.
    NoiseConfig scaled_to_grid(int size, int reference_size = 320) const;

    bool operator==(const NoiseConfig&) const = default;
};

// eps_max * t / t_warmup while warming up, then linear decay to 0 at t = T.
double noise_schedule(double t, double total, double t_warmup, double eps_max);

// Records how each acquired line moved; used by diagnostics and tests.
struct LineShift {
    int from;
    int to;
};

// Each acquired line moves by round(N(0, (strength*tau)^2)), clamped to the
// grid. A landing on an occupied line is redrawn (up to 100 times) and then
// falls back to the nearest free line, so cardinality is preserved.
CartesianMask perturb_cartesian_random(const CartesianMask& mask, double tau, double strength, std::mt19937_64& rng,
                                       std::vector<LineShift>* shifts = nullptr);

// Independent N(0, (strength*tau)^2) offsets on kx and ky of every point.
RadialTrajectory perturb_radial_random(const RadialTrajectory& traj, double tau, double strength,
                                       std::mt19937_64& rng);

// coords + strength*epsilon*sign(grad), with sign(0) = 0.
RadialTrajectory fgsm_radial(const RadialTrajectory& traj, std::span<const KCoord> coord_grads, double epsilon,
                             double strength);

// Turns off the num_bits acquired lines with the largest |grad| and turns on
// the num_bits skipped lines with the smallest |grad| (ties to lower index).
CartesianMask adversarial_cartesian_xor(const CartesianMask& mask, std::span<const double> line_grads, int num_bits);

// x + N(0, (strength*sigma)^2) on every pixel (real part for complex input).
Image image_noise(const Image& x, double sigma, double strength, std::mt19937_64& rng);
ComplexImage image_noise(const ComplexImage& x, double sigma, double strength, std::mt19937_64& rng);

// ---- gate ----------------------------------------------------------------

using SamplingPattern = std::variant<CartesianMask, RadialTrajectory>;

struct DgInputs {
    Image image;  // ground truth fed to the acquisition
    SamplingPattern pattern;
};

// Computes the loss gradient with respect to the sampling pattern at the
// current network parameters. Needed only for adversarial noise.
struct GradProvider {
    std::function<std::vector<double>(const Image&, const CartesianMask&)> line_grads;
    std::function<std::vector<KCoord>(const Image&, const RadialTrajectory&)> coord_grads;
};

struct DgResult {
    DgInputs inputs;
    bool applied = false;
    double strength = 0.0;
};

// Schedule strength used by the gate; t_warmup is clamped into [1, T-1] so
// short runs still follow the warmup-then-decay shape.
double scheduled_strength(const NoiseConfig& cfg, int epoch, int total_epochs);

// With probability apply_prob, perturbs the inputs with the configured
// injector at strength scheduled_strength(epoch). Adversarial Cartesian
// noise flips round(strength * num_bits) lines per class.
DgResult apply_dg(DgInputs inputs, const NoiseConfig& cfg, int epoch, int total_epochs, std::mt19937_64& rng,
                  const GradProvider* grads = nullptr);

}  // namespace kdg
