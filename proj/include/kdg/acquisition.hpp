#pragma once

// Acquisition simulation for one sample and its reverse pass.
//
//   Cartesian: object -> fft2 -> row mask -> ifft2 -> |.| -> normalize01
//   Radial:    object -> nudft_forward -> nudft_adjoint -> |.| -> normalize01
//
// The context keeps every intermediate needed to carry a gradient on the
// network input back to the mask lines or to the radial coordinates.

#include <cstddef>
#include <random>
#include <string_view>
#include <vector>

#include "kdg/image.hpp"
#include "kdg/perturbation.hpp"
#include "kdg/transform.hpp"

namespace kdg {

enum class Sampling { Cartesian, Radial };

std::string_view sampling_name(Sampling s);
Sampling parse_sampling(std::string_view s);

struct AcquisitionContext {
    SamplingPattern pattern;
    ComplexImage object;       // image the operator was applied to
    ComplexImage kspace;       // Cartesian: unmasked fft2(object)
    KSamples samples;          // Radial: acquired samples (incl. measurement noise)
    ComplexImage zero_filled;  // adjoint / zero-filled inverse
    Image magnitude;
    double lo = 0.0;
    double hi = 0.0;
    std::size_t argmin = 0;
    std::size_t argmax = 0;
    bool constant = false;
};

struct Acquired {
    Image net_input;
    AcquisitionContext ctx;
};

// `measurement_sigma` > 0 adds complex Gaussian noise to the acquired
// samples (requires `rng`).
Acquired acquire(const Image& object, const SamplingPattern& pattern, double measurement_sigma = 0.0,
                 std::mt19937_64* rng = nullptr);

// dL/dRe(z) + i dL/dIm(z) for the zero-filled image z, given dL/d(net input).
ComplexImage zero_filled_grad(const AcquisitionContext& ctx, const Image& net_input_grad);

// dL/dm_r for each mask line r, treating the mask as a continuous row gain.
std::vector<double> mask_line_grads(const AcquisitionContext& ctx, const Image& net_input_grad);

// dL/dk_j for each radial coordinate (through both the forward operator and
// its adjoint).
std::vector<KCoord> coord_grads(const AcquisitionContext& ctx, const Image& net_input_grad);

}  // namespace kdg
