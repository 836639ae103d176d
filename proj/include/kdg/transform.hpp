#pragma once

// Orthonormal Fourier operators on complex images: uniform 2D FFT, the
// direct non-uniform DFT with its adjoint, and gradients of NUDFT samples
// with respect to the sample coordinates.

#include <span>
#include <vector>

#include "kdg/image.hpp"
#include "kdg/sampling_types.hpp"

namespace kdg {

// Values sampled at a list of k-space coordinates.
struct KSamples {
    std::vector<cplx> values;
    std::size_t count() const noexcept { return values.size(); }
};

// Orthonormal 2D DFT (1/sqrt(HW)). Radix-2 FFT along power-of-two axes,
// direct DFT otherwise. Requires an image-domain input.
ComplexImage fft2(const ComplexImage& img);

// Inverse of fft2. Requires a k-space input.
ComplexImage ifft2(const ComplexImage& ksp);

// s_j = 1/sqrt(HW) sum_{p,q} img[p,q] exp(-i 2pi (kx_j q / W + ky_j p / H))
KSamples nudft_forward(const ComplexImage& img, std::span<const KCoord> coords);

// Exact adjoint of nudft_forward (zero-filled gridding without density
// compensation). Returns an image-domain result.
ComplexImage nudft_adjoint(const KSamples& samples, std::span<const KCoord> coords, int height, int width);

// For a real loss L of the samples s = nudft_forward(img, coords), given
// upstream[j] = dL/dRe(s_j) + i dL/dIm(s_j), returns dL/dkx_j and dL/dky_j
// packed as KCoord{dL/dkx, dL/dky}.
std::vector<KCoord> nudft_coord_grad(const ComplexImage& img, std::span<const KCoord> coords,
                                     std::span<const cplx> upstream);

// Coordinate gradient of the adjoint z = nudft_adjoint(samples, coords)
// given upstream_img = dL/dRe(z) + i dL/dIm(z). Uses the identity
// dL/dk_j = Re(conj(s_j) d(A g)_j / dk_j), i.e. the forward coordinate
// gradient evaluated on the upstream image with the samples as upstream.
std::vector<KCoord> nudft_adjoint_coord_grad(const KSamples& samples, std::span<const KCoord> coords,
                                             const ComplexImage& upstream_img);

// fft2(img) with rows where mask == 0 zeroed. The mask selects rows
// (phase-encoding lines); mask.size() must equal img.height().
ComplexImage cartesian_sample(const ComplexImage& img, const CartesianMask& mask);

// Zero rows of an existing k-space array.
ComplexImage apply_row_mask(const ComplexImage& ksp, const CartesianMask& mask);

void require_finite(std::span<const KCoord> coords);

}  // namespace kdg
