#pragma once

// Fixed and learnable acquisition patterns.
//
// Cartesian masks index phase-encoding lines in centered frequency order:
// mask line i selects k-space frequency i - H/2, so the central band of the
// mask is the low-frequency band. Radial coordinates are in grid units
// centered on DC (kx, ky in [-W/2, W/2] x [-H/2, H/2]).

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "kdg/sampling_types.hpp"

namespace kdg {

struct CartesianScores {
    std::vector<double> scores;
    double center_fraction = 0.1;
};

struct RadialTrajectory {
    int shots = 0;
    int points_per_shot = 0;
    std::vector<KCoord> coords;  // shot-major, shots * points_per_shot
    // Sparse per-shot control points (shot-major) when the trajectory is
    // parameterized; coords is then their linear interpolation at `gap`.
    std::optional<std::vector<KCoord>> control_points;
    int gap = 1;

    int controls_per_shot() const;
};

// Row of the uncentered fft2 output that holds mask line `line`.
int kspace_row_for_line(int line, int height);

// Indices of the floor(center_fraction * n_acquired) central lines.
std::vector<int> center_band(int height, int n_acquired, double center_fraction);

CartesianMask make_fixed_cartesian(int height, int n_acquired, double center_fraction, std::uint64_t seed);

// Shot s lies at angle s*pi/shots; points span the full diameter.
RadialTrajectory make_fixed_radial(int shots, int points_per_shot, int height, int width);

// Forces the center band, then takes the highest remaining scores (ties to
// the lower index) until exactly n_acquired lines are set.
CartesianMask binarize_quantile(const CartesianScores& scores, int n_acquired);

// Straight-through estimator: d/dscores = d/dmask, zero on the center band.
std::vector<double> straight_through_mask_grad(std::span<const double> upstream_per_line,
                                               const CartesianScores& scores, int n_acquired);

// Resamples each shot's control polyline to points_per_shot points at
// uniform parameter spacing. Endpoints are preserved.
std::vector<KCoord> interpolate_controls(std::span<const KCoord> controls, int shots, int points_per_shot);

// Transpose of interpolate_controls.
std::vector<KCoord> controls_grad_from_coords(std::span<const KCoord> coord_grads, int shots,
                                              int controls_per_shot, int points_per_shot);

// Number of control points per shot for a given gap: ceil((P-1)/gap)+1.
int controls_for_gap(int points_per_shot, int gap);

// Linear from initial_gap at epoch 0 down to 1 at floor(total/2); round half up.
int gap_schedule(int epoch, int total_epochs, int initial_gap);

// Builds a control-point parameterization of `traj` at `gap` by sampling its
// current coordinates, and refreshes coords from the new controls.
RadialTrajectory parameterize(const RadialTrajectory& traj, int gap);

// Recomputes coords from control_points.
void refresh_coords(RadialTrajectory& traj);

// ---- export / import ------------------------------------------------------

// CSV with header `shot,point,kx,ky`, doubles printed round-trip exact.
void write_trajectory_csv(const std::filesystem::path& path, const RadialTrajectory& traj);
RadialTrajectory read_trajectory_csv(const std::filesystem::path& path);

// One 0/1 per line.
void write_mask_txt(const std::filesystem::path& path, const CartesianMask& mask);
CartesianMask read_mask_txt(const std::filesystem::path& path);

}  // namespace kdg
