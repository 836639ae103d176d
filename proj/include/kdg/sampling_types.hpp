#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace kdg {

// k-space location in grid units: integer values coincide with DFT bins.
// Coordinates are periodic (kx and kx + W address the same frequency).
struct KCoord {
    double kx = 0.0;
    double ky = 0.0;
    bool operator==(const KCoord&) const = default;
};

// Phase-encoding line selector over image rows (1 = acquired).
struct CartesianMask {
    std::vector<std::uint8_t> lines;

    std::size_t size() const noexcept { return lines.size(); }
    std::size_t n_acquired() const noexcept;
    bool operator==(const CartesianMask&) const = default;
};

}  // namespace kdg
