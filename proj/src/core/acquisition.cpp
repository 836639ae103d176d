#include "kdg/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "kdg/data.hpp"
#include "kdg/trajectory.hpp"

namespace kdg {

std::string_view sampling_name(Sampling s) { return s == Sampling::Cartesian ? "cartesian" : "radial"; }

Sampling parse_sampling(std::string_view s) {
    if (s == "cartesian") return Sampling::Cartesian;
    if (s == "radial") return Sampling::Radial;
    throw ArgumentError("unknown sampling '" + std::string(s) + "'");
}

namespace {

// Mask in centered line order -> mask over uncentered k-space rows.
CartesianMask to_row_mask(const CartesianMask& lines) {
    const int h = static_cast<int>(lines.size());
    CartesianMask rows{std::vector<std::uint8_t>(lines.size(), 0)};
    for (int i = 0; i < h; ++i) rows.lines[kspace_row_for_line(i, h)] = lines.lines[i];
    return rows;
}

}  // namespace

Acquired acquire(const Image& object, const SamplingPattern& pattern, double measurement_sigma,
                 std::mt19937_64* rng) {
    if (measurement_sigma > 0.0 && rng == nullptr) throw ArgumentError("measurement noise needs an RNG");
    Acquired out;
    AcquisitionContext& c = out.ctx;
    c.pattern = pattern;
    c.object = to_complex(object);
    std::normal_distribution<double> normal(0.0, measurement_sigma > 0.0 ? measurement_sigma : 1.0);

    if (const auto* mask = std::get_if<CartesianMask>(&pattern)) {
        if (mask->size() != static_cast<std::size_t>(object.height()))
            throw ShapeError("mask length " + std::to_string(mask->size()) + " != image height " +
                             std::to_string(object.height()));
        c.kspace = fft2(c.object);
        ComplexImage sampled = apply_row_mask(c.kspace, to_row_mask(*mask));
        if (measurement_sigma > 0.0) {
            const CartesianMask rows = to_row_mask(*mask);
            for (int r = 0; r < sampled.height(); ++r)
                if (rows.lines[r])
                    for (auto& v : sampled.row(r)) v += cplx(normal(*rng), normal(*rng));
        }
        c.zero_filled = ifft2(sampled);
    } else {
        const auto& traj = std::get<RadialTrajectory>(pattern);
        c.samples = nudft_forward(c.object, traj.coords);
        if (measurement_sigma > 0.0)
            for (auto& v : c.samples.values) v += cplx(normal(*rng), normal(*rng));
        c.zero_filled = nudft_adjoint(c.samples, traj.coords, object.height(), object.width());
    }

    c.magnitude = magnitude(c.zero_filled);
    const auto data = c.magnitude.data();
    const auto [lo, hi] = std::minmax_element(data.begin(), data.end());
    c.argmin = static_cast<std::size_t>(lo - data.begin());
    c.argmax = static_cast<std::size_t>(hi - data.begin());
    c.lo = *lo;
    c.hi = *hi;
    const Normalized n = normalize01(c.magnitude);
    c.constant = n.constant;
    out.net_input = n.image;
    return out;
}

ComplexImage zero_filled_grad(const AcquisitionContext& c, const Image& g) {
    require_same_shape(c.magnitude, g, "zero_filled_grad");
    ComplexImage gz(g.height(), g.width(), DomainTag::Image);
    if (c.constant) return gz;

    // Through normalize01: n_i = (m_i - lo) / (hi - lo).
    const double range = c.hi - c.lo;
    const auto m = c.magnitude.data();
    std::vector<double> gm(g.size());
    double s_lo = 0.0, s_hi = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double gi = g.data()[i];
        gm[i] = gi / range;
        const double t = (m[i] - c.lo) / (range * range);
        s_lo += gi * (t - 1.0 / range);
        s_hi -= gi * t;
    }
    gm[c.argmin] += s_lo;
    gm[c.argmax] += s_hi;

    // Through |z|: d|z| = Re(conj(z/|z|) dz).
    const auto z = c.zero_filled.data();
    for (std::size_t i = 0; i < gm.size(); ++i) {
        const double a = std::abs(z[i]);
        if (a > 0.0) gz.data()[i] = gm[i] * z[i] / a;
    }
    return gz;
}

std::vector<double> mask_line_grads(const AcquisitionContext& c, const Image& g) {
    const auto* mask = std::get_if<CartesianMask>(&c.pattern);
    if (mask == nullptr) throw ArgumentError("mask_line_grads needs a Cartesian acquisition");
    ComplexImage gz = zero_filled_grad(c, g);
    // z = F^H M F x  =>  dL/dm_r = Re sum_q conj((F gz)[r,q]) (F x)[r,q]
    const ComplexImage G = fft2(gz);
    const int h = G.height();
    std::vector<double> out(static_cast<std::size_t>(h));
    for (int line = 0; line < h; ++line) {
        const int r = kspace_row_for_line(line, h);
        double acc = 0.0;
        for (int q = 0; q < G.width(); ++q) acc += (std::conj(G(r, q)) * c.kspace(r, q)).real();
        out[line] = acc;
    }
    return out;
}

std::vector<KCoord> coord_grads(const AcquisitionContext& c, const Image& g) {
    const auto* traj = std::get_if<RadialTrajectory>(&c.pattern);
    if (traj == nullptr) throw ArgumentError("coord_grads needs a radial acquisition");
    const ComplexImage gz = zero_filled_grad(c, g);
    // z = A^H(u) s with s = A(u) x; both factors depend on u.
    const KSamples gs = nudft_forward(gz, traj->coords);
    std::vector<KCoord> via_forward = nudft_coord_grad(c.object, traj->coords, gs.values);
    const std::vector<KCoord> via_adjoint = nudft_adjoint_coord_grad(c.samples, traj->coords, gz);
    for (std::size_t j = 0; j < via_forward.size(); ++j) {
        via_forward[j].kx += via_adjoint[j].kx;
        via_forward[j].ky += via_adjoint[j].ky;
    }
    return via_forward;
}

}  // namespace kdg
