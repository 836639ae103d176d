#include "kdg/perturbation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "kdg/error.hpp"

namespace kdg {

std::string_view noise_kind_name(NoiseKind k) {
    switch (k) {
        case NoiseKind::None: return "none";
        case NoiseKind::Image: return "image";
        case NoiseKind::Trajectory: return "trajectory";
        case NoiseKind::TrajectoryAdversarial: return "adversarial";
    }
    return "none";
}

NoiseKind parse_noise_kind(std::string_view s) {
    if (s == "none") return NoiseKind::None;
    if (s == "image") return NoiseKind::Image;
    if (s == "trajectory") return NoiseKind::Trajectory;
    if (s == "adversarial") return NoiseKind::TrajectoryAdversarial;
    throw ArgumentError("unknown noise kind '" + std::string(s) + "'");
}

void NoiseConfig::validate() const {
    if (tau_cartesian < 0 || tau_radial < 0 || epsilon_adv < 0 || sigma_image < 0 || eps_max < 0 ||
        measurement_sigma < 0)
        throw ArgumentError("noise magnitudes must be >= 0");
    if (num_bits < 0) throw ArgumentError("noise.num_bits must be >= 0");
    if (t_warmup < 1) throw ArgumentError("noise.t_warmup must be >= 1");
    if (!(apply_prob >= 0.0 && apply_prob <= 1.0)) throw ArgumentError("noise.apply_prob must be in [0,1]");
}

NoiseConfig NoiseConfig::scaled_to_grid(int size, int reference_size) const {
    NoiseConfig c = *this;
    const double r = static_cast<double>(size) / reference_size;
    c.tau_cartesian *= r;
    c.tau_radial *= r;
    c.num_bits = std::max(1, static_cast<int>(std::lround(num_bits * r)));
    return c;
}

double noise_schedule(double t, double total, double t_warmup, double eps_max) {
    if (t < 0 || t > total) throw ArgumentError("noise_schedule: epoch outside [0, T]");
    if (!(t_warmup > 0 && t_warmup < total)) throw ArgumentError("noise_schedule: need 0 < t_warmup < T");
    if (t <= t_warmup) return eps_max * t / t_warmup;
    return eps_max * (1.0 - (t - t_warmup) / (total - t_warmup));
}

CartesianMask perturb_cartesian_random(const CartesianMask& mask, double tau, double strength, std::mt19937_64& rng,
                                       std::vector<LineShift>* shifts) {
    const int h = static_cast<int>(mask.size());
    const double sd = tau * strength;
    if (shifts) shifts->clear();
    if (sd <= 0.0) {
        if (shifts)
            for (int i = 0; i < h; ++i)
                if (mask.lines[i]) shifts->push_back({i, i});
        return mask;
    }
    std::normal_distribution<double> normal(0.0, sd);
    auto draw = [&](int i) { return std::clamp(i + static_cast<int>(std::lround(normal(rng))), 0, h - 1); };

    CartesianMask out{std::vector<std::uint8_t>(static_cast<std::size_t>(h), 0)};
    for (int i = 0; i < h; ++i) {
        if (!mask.lines[i]) continue;
        int to = draw(i);
        for (int attempt = 0; attempt < 100 && out.lines[to]; ++attempt) to = draw(i);
        if (out.lines[to]) {
            // Nearest free line to the last draw, lower index first.
            for (int d = 1; d < h; ++d) {
                if (to - d >= 0 && !out.lines[to - d]) {
                    to -= d;
                    break;
                }
                if (to + d < h && !out.lines[to + d]) {
                    to += d;
                    break;
                }
            }
        }
        out.lines[to] = 1;
        if (shifts) shifts->push_back({i, to});
    }
    return out;
}

RadialTrajectory perturb_radial_random(const RadialTrajectory& traj, double tau, double strength,
                                       std::mt19937_64& rng) {
    RadialTrajectory out = traj;
    const double sd = tau * strength;
    if (sd <= 0.0) return out;
    out.control_points.reset();  // jittered coords no longer follow the controls
    std::normal_distribution<double> normal(0.0, sd);
    for (auto& c : out.coords) {
        c.kx += normal(rng);
        c.ky += normal(rng);
    }
    return out;
}

namespace {
double sign(double v) { return (v > 0.0) - (v < 0.0); }
}  // namespace

RadialTrajectory fgsm_radial(const RadialTrajectory& traj, std::span<const KCoord> coord_grads, double epsilon,
                             double strength) {
    if (coord_grads.size() != traj.coords.size()) throw ShapeError("fgsm_radial: gradient count != coordinate count");
    RadialTrajectory out = traj;
    const double step = strength * epsilon;
    if (step == 0.0) return out;
    out.control_points.reset();
    for (std::size_t j = 0; j < out.coords.size(); ++j) {
        out.coords[j].kx += step * sign(coord_grads[j].kx);
        out.coords[j].ky += step * sign(coord_grads[j].ky);
    }
    return out;
}

CartesianMask adversarial_cartesian_xor(const CartesianMask& mask, std::span<const double> line_grads, int num_bits) {
    if (line_grads.size() != mask.size()) throw ShapeError("adversarial_cartesian_xor: gradient length != mask length");
    if (num_bits < 0) throw ArgumentError("num_bits must be >= 0");
    std::vector<int> on, off;
    for (int i = 0; i < static_cast<int>(mask.size()); ++i) (mask.lines[i] ? on : off).push_back(i);
    if (static_cast<int>(on.size()) < num_bits || static_cast<int>(off.size()) < num_bits)
        throw ArgumentError("adversarial_cartesian_xor: fewer than num_bits lines in a class");

    auto mag = [&](int i) { return std::abs(line_grads[i]); };
    std::stable_sort(on.begin(), on.end(), [&](int a, int b) { return mag(a) > mag(b); });
    std::stable_sort(off.begin(), off.end(), [&](int a, int b) { return mag(a) < mag(b); });

    CartesianMask out = mask;
    for (int k = 0; k < num_bits; ++k) {
        out.lines[on[k]] ^= 1;
        out.lines[off[k]] ^= 1;
    }
    return out;
}

Image image_noise(const Image& x, double sigma, double strength, std::mt19937_64& rng) {
    Image out = x;
    const double sd = sigma * strength;
    if (sd <= 0.0) return out;
    std::normal_distribution<double> normal(0.0, sd);
    for (auto& v : out.data()) v += normal(rng);
    return out;
}

ComplexImage image_noise(const ComplexImage& x, double sigma, double strength, std::mt19937_64& rng) {
    if (x.tag() != DomainTag::Image) throw ArgumentError("image_noise expects an image-domain input");
    ComplexImage out = x;
    const double sd = sigma * strength;
    if (sd <= 0.0) return out;
    std::normal_distribution<double> normal(0.0, sd);
    for (auto& v : out.data()) v += normal(rng);
    return out;
}

double scheduled_strength(const NoiseConfig& cfg, int epoch, int total_epochs) {
    if (total_epochs < 2) return cfg.eps_max;
    const int warm = std::clamp(cfg.t_warmup, 1, total_epochs - 1);
    return noise_schedule(std::clamp(epoch, 0, total_epochs), total_epochs, warm, cfg.eps_max);
}

DgResult apply_dg(DgInputs inputs, const NoiseConfig& cfg, int epoch, int total_epochs, std::mt19937_64& rng,
                  const GradProvider* grads) {
    DgResult r{std::move(inputs), false, 0.0};
    if (cfg.kind == NoiseKind::None) return r;
    const bool cartesian = std::holds_alternative<CartesianMask>(r.inputs.pattern);
    if (cfg.kind == NoiseKind::TrajectoryAdversarial &&
        (grads == nullptr || (cartesian ? !grads->line_grads : !grads->coord_grads)))
        throw ArgumentError("adversarial trajectory noise needs a gradient provider");

    std::bernoulli_distribution gate(cfg.apply_prob);
    if (!gate(rng)) return r;
    r.applied = true;
    r.strength = scheduled_strength(cfg, epoch, total_epochs);

    switch (cfg.kind) {
        case NoiseKind::None: break;
        case NoiseKind::Image:
            r.inputs.image = image_noise(r.inputs.image, cfg.sigma_image, r.strength, rng);
            break;
        case NoiseKind::Trajectory:
            if (cartesian) {
                auto& m = std::get<CartesianMask>(r.inputs.pattern);
                m = perturb_cartesian_random(m, cfg.tau_cartesian, r.strength, rng);
            } else {
                auto& t = std::get<RadialTrajectory>(r.inputs.pattern);
                t = perturb_radial_random(t, cfg.tau_radial, r.strength, rng);
            }
            break;
        case NoiseKind::TrajectoryAdversarial:
            if (cartesian) {
                auto& m = std::get<CartesianMask>(r.inputs.pattern);
                const int bits = static_cast<int>(std::lround(r.strength * cfg.num_bits));
                if (bits > 0) m = adversarial_cartesian_xor(m, grads->line_grads(r.inputs.image, m), bits);
            } else {
                auto& t = std::get<RadialTrajectory>(r.inputs.pattern);
                if (r.strength * cfg.epsilon_adv > 0.0)
                    t = fgsm_radial(t, grads->coord_grads(r.inputs.image, t), cfg.epsilon_adv, r.strength);
            }
            break;
    }
    return r;
}

}  // namespace kdg
