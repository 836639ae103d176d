#include "kdg/transform.hpp"

#include <bit>
#include <cmath>
#include <numbers>
#include <string>

#include "kdg/simd.hpp"

namespace kdg {

std::size_t CartesianMask::n_acquired() const noexcept {
    std::size_t n = 0;
    for (auto v : lines) n += v != 0;
    return n;
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Unnormalized 1D DFT with sign `sign` (-1 forward, +1 inverse), in place.
void dft1d(std::span<cplx> x, int sign, std::vector<cplx>& scratch) {
    const std::size_t n = x.size();
    if (n <= 1) return;
    if (std::has_single_bit(n)) {
        // Iterative radix-2 Cooley-Tukey.
        for (std::size_t i = 1, j = 0; i < n; ++i) {
            std::size_t bit = n >> 1;
            for (; j & bit; bit >>= 1) j ^= bit;
            j ^= bit;
            if (i < j) std::swap(x[i], x[j]);
        }
        for (std::size_t len = 2; len <= n; len <<= 1) {
            const double ang = sign * kTwoPi / static_cast<double>(len);
            for (std::size_t i = 0; i < n; i += len) {
                for (std::size_t k = 0; k < len / 2; ++k) {
                    const cplx w = std::polar(1.0, ang * static_cast<double>(k));
                    const cplx u = x[i + k];
                    const cplx v = x[i + k + len / 2] * w;
                    x[i + k] = u + v;
                    x[i + k + len / 2] = u - v;
                }
            }
        }
        return;
    }
    scratch.assign(n, cplx{});
    for (std::size_t k = 0; k < n; ++k) {
        cplx acc{};
        for (std::size_t t = 0; t < n; ++t) {
            const double ang = sign * kTwoPi * static_cast<double>((k * t) % n) / static_cast<double>(n);
            acc += x[t] * std::polar(1.0, ang);
        }
        scratch[k] = acc;
    }
    std::copy(scratch.begin(), scratch.end(), x.begin());
}

ComplexImage dft2(const ComplexImage& in, int sign) {
    ComplexImage out = in;
    const int h = in.height(), w = in.width();
    std::vector<cplx> scratch, col(static_cast<std::size_t>(h));
    for (int r = 0; r < h; ++r) dft1d(out.row(r), sign, scratch);
    for (int c = 0; c < w; ++c) {
        for (int r = 0; r < h; ++r) col[r] = out(r, c);
        dft1d(col, sign, scratch);
        for (int r = 0; r < h; ++r) out(r, c) = col[r];
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(h) * w);
    for (auto& v : out.data()) v *= scale;
    return out;
}

// Per-coordinate phase ramps ex[q] = exp(-i 2pi kx q / W), ey[p] likewise.
void fill_ramp(std::vector<cplx>& ramp, double k, int n) {
    ramp.resize(static_cast<std::size_t>(n));
    const double step = -kTwoPi * k / n;
    for (int i = 0; i < n; ++i) ramp[i] = std::polar(1.0, step * i);
}

}  // namespace

void require_finite(std::span<const KCoord> coords) {
    for (std::size_t j = 0; j < coords.size(); ++j) {
        if (!std::isfinite(coords[j].kx) || !std::isfinite(coords[j].ky)) throw NonFiniteCoordinate(j);
    }
}

ComplexImage fft2(const ComplexImage& img) {
    if (img.tag() != DomainTag::Image) throw ArgumentError("fft2 expects an image-domain input");
    ComplexImage out = dft2(img, -1);
    out.set_tag(DomainTag::KSpace);
    return out;
}

ComplexImage ifft2(const ComplexImage& ksp) {
    if (ksp.tag() != DomainTag::KSpace) throw ArgumentError("ifft2 expects a k-space input");
    ComplexImage out = dft2(ksp, +1);
    out.set_tag(DomainTag::Image);
    return out;
}

KSamples nudft_forward(const ComplexImage& img, std::span<const KCoord> coords) {
    if (img.tag() != DomainTag::Image) throw ArgumentError("nudft_forward expects an image-domain input");
    require_finite(coords);
    const int h = img.height(), w = img.width();
    const double scale = 1.0 / std::sqrt(static_cast<double>(h) * w);
    const auto& k = simd::kernels();

    KSamples out;
    out.values.resize(coords.size());
    std::vector<cplx> ex, ey, rows(static_cast<std::size_t>(h));
    for (std::size_t j = 0; j < coords.size(); ++j) {
        fill_ramp(ex, coords[j].kx, w);
        fill_ramp(ey, coords[j].ky, h);
        for (int p = 0; p < h; ++p) rows[p] = k.cdot(img.row(p).data(), ex.data(), w);
        out.values[j] = k.cdot(rows.data(), ey.data(), h) * scale;
    }
    return out;
}

ComplexImage nudft_adjoint(const KSamples& samples, std::span<const KCoord> coords, int height, int width) {
    if (samples.count() != coords.size())
        throw ShapeError("nudft_adjoint: " + std::to_string(samples.count()) + " samples for " +
                         std::to_string(coords.size()) + " coordinates");
    require_finite(coords);
    ComplexImage out(height, width, DomainTag::Image);
    const double scale = 1.0 / std::sqrt(static_cast<double>(height) * width);
    const auto& k = simd::kernels();

    std::vector<cplx> ex, ey;
    for (std::size_t j = 0; j < coords.size(); ++j) {
        const cplx s = samples.values[j] * scale;
        if (s == cplx{}) continue;
        fill_ramp(ex, -coords[j].kx, width);  // conjugated ramps
        fill_ramp(ey, -coords[j].ky, height);
        for (int p = 0; p < height; ++p) k.caxpy(s * ey[p], ex.data(), out.row(p).data(), width);
    }
    return out;
}

std::vector<KCoord> nudft_coord_grad(const ComplexImage& img, std::span<const KCoord> coords,
                                     std::span<const cplx> upstream) {
    if (upstream.size() != coords.size()) throw ShapeError("nudft_coord_grad: upstream length != coordinate count");
    require_finite(coords);
    const int h = img.height(), w = img.width();
    const double scale = 1.0 / std::sqrt(static_cast<double>(h) * w);
    const auto& k = simd::kernels();

    std::vector<KCoord> grads(coords.size());
    std::vector<cplx> ex, exq(static_cast<std::size_t>(w)), ey, eyp(static_cast<std::size_t>(h));
    std::vector<cplx> rows(static_cast<std::size_t>(h)), rows_q(static_cast<std::size_t>(h));
    for (std::size_t j = 0; j < coords.size(); ++j) {
        const cplx g = upstream[j];
        if (g == cplx{}) continue;
        fill_ramp(ex, coords[j].kx, w);
        fill_ramp(ey, coords[j].ky, h);
        for (int q = 0; q < w; ++q) exq[q] = ex[q] * static_cast<double>(q);
        for (int p = 0; p < h; ++p) eyp[p] = ey[p] * static_cast<double>(p);
        for (int p = 0; p < h; ++p) {
            rows[p] = k.cdot(img.row(p).data(), ex.data(), w);
            rows_q[p] = k.cdot(img.row(p).data(), exq.data(), w);
        }
        const cplx minus_i{0.0, -1.0};
        const cplx ds_dkx = minus_i * (kTwoPi / w) * scale * k.cdot(rows_q.data(), ey.data(), h);
        const cplx ds_dky = minus_i * (kTwoPi / h) * scale * k.cdot(rows.data(), eyp.data(), h);
        grads[j].kx = (std::conj(g) * ds_dkx).real();
        grads[j].ky = (std::conj(g) * ds_dky).real();
    }
    return grads;
}

std::vector<KCoord> nudft_adjoint_coord_grad(const KSamples& samples, std::span<const KCoord> coords,
                                             const ComplexImage& upstream_img) {
    if (samples.count() != coords.size()) throw ShapeError("nudft_adjoint_coord_grad: sample/coordinate count mismatch");
    return nudft_coord_grad(upstream_img, coords, samples.values);
}

ComplexImage apply_row_mask(const ComplexImage& ksp, const CartesianMask& mask) {
    if (mask.size() != static_cast<std::size_t>(ksp.height()))
        throw ShapeError("mask length " + std::to_string(mask.size()) + " != image height " +
                         std::to_string(ksp.height()));
    ComplexImage out = ksp;
    for (int r = 0; r < out.height(); ++r) {
        if (mask.lines[r] == 0) std::fill(out.row(r).begin(), out.row(r).end(), cplx{});
    }
    return out;
}

ComplexImage cartesian_sample(const ComplexImage& img, const CartesianMask& mask) {
    if (mask.size() != static_cast<std::size_t>(img.height()))
        throw ShapeError("mask length " + std::to_string(mask.size()) + " != image height " +
                         std::to_string(img.height()));
    return apply_row_mask(fft2(img), mask);
}

}  // namespace kdg
