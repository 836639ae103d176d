#include "kdg/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "kdg/error.hpp"

namespace kdg {

int RadialTrajectory::controls_per_shot() const {
    if (!control_points || shots <= 0) return points_per_shot;
    return static_cast<int>(control_points->size()) / shots;
}

int kspace_row_for_line(int line, int height) { return (line + height - height / 2) % height; }

std::vector<int> center_band(int height, int n_acquired, double center_fraction) {
    const int n = static_cast<int>(std::floor(center_fraction * n_acquired));
    std::vector<int> band;
    if (n <= 0) return band;
    const int start = height / 2 - n / 2;
    for (int i = 0; i < n; ++i) band.push_back(start + i);
    return band;
}

CartesianMask make_fixed_cartesian(int height, int n_acquired, double center_fraction, std::uint64_t seed) {
    if (height <= 0) throw ArgumentError("mask height must be positive");
    if (n_acquired < 0 || n_acquired > height)
        throw ArgumentError("n_acquired (" + std::to_string(n_acquired) + ") exceeds mask height (" +
                            std::to_string(height) + ")");
    if (center_fraction < 0.0 || center_fraction > 1.0) throw ArgumentError("center_fraction must be in [0,1]");

    CartesianMask mask{std::vector<std::uint8_t>(static_cast<std::size_t>(height), 0)};
    for (int i : center_band(height, n_acquired, center_fraction)) mask.lines[i] = 1;

    std::vector<int> free;
    for (int i = 0; i < height; ++i)
        if (!mask.lines[i]) free.push_back(i);
    std::mt19937_64 rng(seed);
    std::shuffle(free.begin(), free.end(), rng);
    const int remaining = n_acquired - static_cast<int>(mask.n_acquired());
    for (int i = 0; i < remaining; ++i) mask.lines[free[i]] = 1;
    return mask;
}

RadialTrajectory make_fixed_radial(int shots, int points_per_shot, int height, int width) {
    if (shots < 1) throw ArgumentError("radial trajectory needs at least one shot");
    if (points_per_shot < 2) throw ArgumentError("radial trajectory needs at least two points per shot");
    RadialTrajectory t;
    t.shots = shots;
    t.points_per_shot = points_per_shot;
    t.coords.reserve(static_cast<std::size_t>(shots) * points_per_shot);
    for (int s = 0; s < shots; ++s) {
        const double theta = s * std::numbers::pi / shots;
        const double c = std::cos(theta), sn = std::sin(theta);
        for (int i = 0; i < points_per_shot; ++i) {
            // Exact zero at the midpoint for odd point counts.
            const double r = static_cast<double>(2 * i - (points_per_shot - 1)) / (points_per_shot - 1);
            t.coords.push_back({r * (width / 2.0) * c, r * (height / 2.0) * sn});
        }
    }
    return t;
}

CartesianMask binarize_quantile(const CartesianScores& scores, int n_acquired) {
    const int h = static_cast<int>(scores.scores.size());
    if (n_acquired < 0 || n_acquired > h) throw ArgumentError("n_acquired exceeds score count");
    CartesianMask mask{std::vector<std::uint8_t>(static_cast<std::size_t>(h), 0)};
    for (int i : center_band(h, n_acquired, scores.center_fraction)) mask.lines[i] = 1;

    std::vector<int> order(static_cast<std::size_t>(h));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return scores.scores[a] > scores.scores[b]; });
    int need = n_acquired - static_cast<int>(mask.n_acquired());
    for (int i : order) {
        if (need <= 0) break;
        if (mask.lines[i]) continue;
        mask.lines[i] = 1;
        --need;
    }
    return mask;
}

std::vector<double> straight_through_mask_grad(std::span<const double> upstream_per_line,
                                               const CartesianScores& scores, int n_acquired) {
    if (upstream_per_line.size() != scores.scores.size())
        throw ShapeError("straight_through_mask_grad: length mismatch");
    std::vector<double> g(upstream_per_line.begin(), upstream_per_line.end());
    for (int i : center_band(static_cast<int>(g.size()), n_acquired, scores.center_fraction)) g[i] = 0.0;
    return g;
}

namespace {

// Position of output point i on the control polyline: segment index and the
// weight of the segment's far end. Integer arithmetic keeps knots exact.
struct Knot {
    int segment;
    double frac;
};

Knot knot_for(int i, int n_controls, int points_per_shot) {
    if (points_per_shot == 1) return {0, 0.0};
    const long num = static_cast<long>(i) * (n_controls - 1);
    const long den = points_per_shot - 1;
    int seg = static_cast<int>(num / den);
    double frac = static_cast<double>(num % den) / static_cast<double>(den);
    if (seg >= n_controls - 1) {
        seg = n_controls - 2;
        frac = 1.0;
    }
    return {seg, frac};
}

}  // namespace

std::vector<KCoord> interpolate_controls(std::span<const KCoord> controls, int shots, int points_per_shot) {
    if (shots <= 0 || controls.size() % static_cast<std::size_t>(shots) != 0)
        throw ShapeError("control point count is not a multiple of the shot count");
    const int nc = static_cast<int>(controls.size()) / shots;
    if (nc < 2) throw ArgumentError("interpolation needs at least two control points per shot");
    std::vector<KCoord> out(static_cast<std::size_t>(shots) * points_per_shot);
    for (int s = 0; s < shots; ++s) {
        const KCoord* c = controls.data() + static_cast<std::size_t>(s) * nc;
        for (int i = 0; i < points_per_shot; ++i) {
            const auto [seg, f] = knot_for(i, nc, points_per_shot);
            KCoord& o = out[static_cast<std::size_t>(s) * points_per_shot + i];
            if (f == 0.0) {
                o = c[seg];
            } else if (f == 1.0) {
                o = c[seg + 1];
            } else {
                o.kx = (1.0 - f) * c[seg].kx + f * c[seg + 1].kx;
                o.ky = (1.0 - f) * c[seg].ky + f * c[seg + 1].ky;
            }
        }
    }
    return out;
}

std::vector<KCoord> controls_grad_from_coords(std::span<const KCoord> coord_grads, int shots,
                                              int controls_per_shot, int points_per_shot) {
    if (coord_grads.size() != static_cast<std::size_t>(shots) * points_per_shot)
        throw ShapeError("controls_grad_from_coords: gradient count != shots * points_per_shot");
    if (controls_per_shot < 2) throw ArgumentError("interpolation needs at least two control points per shot");
    std::vector<KCoord> g(static_cast<std::size_t>(shots) * controls_per_shot);
    for (int s = 0; s < shots; ++s) {
        KCoord* gc = g.data() + static_cast<std::size_t>(s) * controls_per_shot;
        for (int i = 0; i < points_per_shot; ++i) {
            const KCoord& gi = coord_grads[static_cast<std::size_t>(s) * points_per_shot + i];
            const auto [seg, f] = knot_for(i, controls_per_shot, points_per_shot);
            gc[seg].kx += (1.0 - f) * gi.kx;
            gc[seg].ky += (1.0 - f) * gi.ky;
            gc[seg + 1].kx += f * gi.kx;
            gc[seg + 1].ky += f * gi.ky;
        }
    }
    return g;
}

int controls_for_gap(int points_per_shot, int gap) {
    if (gap < 1) throw ArgumentError("interpolation gap must be >= 1");
    const int n = (points_per_shot - 1 + gap - 1) / gap + 1;
    return std::clamp(n, 2, std::max(points_per_shot, 2));
}

int gap_schedule(int epoch, int total_epochs, int initial_gap) {
    if (total_epochs < 2) throw ArgumentError("gap_schedule needs total_epochs >= 2");
    if (initial_gap < 1) throw ArgumentError("initial gap must be >= 1");
    const int half = total_epochs / 2;
    if (epoch >= half) return 1;
    const double g = initial_gap - (initial_gap - 1.0) * static_cast<double>(std::max(epoch, 0)) / half;
    return std::max(1, static_cast<int>(std::floor(g + 0.5)));
}

RadialTrajectory parameterize(const RadialTrajectory& traj, int gap) {
    RadialTrajectory out = traj;
    const int nc = controls_for_gap(traj.points_per_shot, gap);
    out.control_points = interpolate_controls(traj.coords, traj.shots, nc);
    out.gap = gap;
    refresh_coords(out);
    return out;
}

void refresh_coords(RadialTrajectory& traj) {
    if (!traj.control_points) return;
    traj.coords = interpolate_controls(*traj.control_points, traj.shots, traj.points_per_shot);
}

// ---- export / import ------------------------------------------------------

namespace {

std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void write_trajectory_csv(const std::filesystem::path& path, const RadialTrajectory& traj) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path.string() + " for writing");
    f << "shot,point,kx,ky\n";
    for (int s = 0; s < traj.shots; ++s) {
        for (int i = 0; i < traj.points_per_shot; ++i) {
            const KCoord& c = traj.coords[static_cast<std::size_t>(s) * traj.points_per_shot + i];
            f << s << ',' << i << ',' << fmt_double(c.kx) << ',' << fmt_double(c.ky) << '\n';
        }
    }
}

RadialTrajectory read_trajectory_csv(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot open " + path.string());
    std::string line;
    std::getline(f, line);
    if (line != "shot,point,kx,ky") throw Error(path.string() + ": unexpected trajectory CSV header");
    RadialTrajectory t;
    int max_shot = -1, max_point = -1;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string a, b, c, d;
        std::getline(ss, a, ',');
        std::getline(ss, b, ',');
        std::getline(ss, c, ',');
        std::getline(ss, d, ',');
        max_shot = std::max(max_shot, std::stoi(a));
        max_point = std::max(max_point, std::stoi(b));
        t.coords.push_back({std::strtod(c.c_str(), nullptr), std::strtod(d.c_str(), nullptr)});
    }
    t.shots = max_shot + 1;
    t.points_per_shot = max_point + 1;
    if (t.coords.size() != static_cast<std::size_t>(t.shots) * t.points_per_shot)
        throw Error(path.string() + ": trajectory CSV is not a full shots x points grid");
    return t;
}

void write_mask_txt(const std::filesystem::path& path, const CartesianMask& mask) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path.string() + " for writing");
    for (auto v : mask.lines) f << (v ? '1' : '0') << '\n';
}

CartesianMask read_mask_txt(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw Error("cannot open " + path.string());
    CartesianMask m;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        if (line != "0" && line != "1") throw Error(path.string() + ": mask lines must be 0 or 1");
        m.lines.push_back(line == "1");
    }
    return m;
}

}  // namespace kdg
