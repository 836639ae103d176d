#pragma once

// Synthetic two-domain phantom generation, the preprocessing chain (RSS coil
// combination, bilinear resize, [0,1] normalization) and dataset file I/O.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "kdg/error.hpp"
#include "kdg/image.hpp"

namespace kdg {

enum class Domain : std::uint8_t { Source = 0, Target = 1 };

std::string_view domain_name(Domain d);
Domain parse_domain(std::string_view s);

struct PhantomSpec {
    Domain domain = Domain::Source;
    int size = 64;
    int min_ellipses = 4;
    int max_ellipses = 8;
    // Std of the additive texture noise (target domain only).
    double texture_noise_floor = 0.04;
    // Target-domain phantoms are drawn at this fraction of `size` and
    // bilinearly upscaled.
    double native_fraction = 0.8;

    int native_size() const;
    void validate() const;
};

struct Sample {
    Image gt;  // [0,1]
    std::uint32_t id = 0;
    Domain domain = Domain::Source;

    bool operator==(const Sample&) const = default;
};

// Deterministic random overlapping-ellipse phantom.
//  Source: one head ellipse plus high-contrast smooth inner ellipses.
//  Target: smaller head with a bright rim, low-contrast darker inner
//  ellipses, additive texture noise, generated at native_size() then
//  resized to size.
Sample generate_phantom(const PhantomSpec& spec, std::uint64_t seed, std::uint32_t id = 0);

// `count` phantoms with ids first_id.. and per-sample seeds derived from
// (seed, domain, index).
std::vector<Sample> generate_dataset(const PhantomSpec& spec, int count, std::uint64_t seed,
                                     std::uint32_t first_id = 0);

// out = sqrt(sum_c |coil_c|^2)
Image rss_combine(std::span<const ComplexImage> coils);

// Bilinear resize on a corner-aligned grid: output pixel i maps to input
// coordinate i * (in - 1) / (out - 1).
Image resize_bilinear(const Image& img, int new_height, int new_width);

struct Normalized {
    Image image;
    bool constant = false;  // input was constant; image is all zeros
};

// (x - min) / (max - min).
Normalized normalize01(const Image& img);

// ---- dataset file -----------------------------------------------------------
// "KDGD", u32 version, u32 count, then per sample: u32 id, u8 domain,
// u16 H, u16 W, H*W little-endian f64.

inline constexpr std::uint32_t kDatasetVersion = 1;

class DatasetError : public Error {
public:
    enum class Kind { BadMagic, Truncated, VersionMismatch, Malformed };
    DatasetError(Kind kind, const std::string& msg, std::size_t expected = 0, std::size_t actual = 0)
        : Error(msg), kind_(kind), expected_(expected), actual_(actual) {}
    Kind kind() const noexcept { return kind_; }
    std::size_t expected_bytes() const noexcept { return expected_; }
    std::size_t actual_bytes() const noexcept { return actual_; }

private:
    Kind kind_;
    std::size_t expected_, actual_;
};

std::vector<std::uint8_t> encode_dataset(std::span<const Sample> samples);
std::vector<Sample> decode_dataset(const std::vector<std::uint8_t>& bytes);
void write_dataset(const std::filesystem::path& path, std::span<const Sample> samples);
std::vector<Sample> read_dataset(const std::filesystem::path& path);

// Binary PGM (P5) with maxval 65535; values clamped to [0,1] and scaled.
void write_pgm16(const std::filesystem::path& path, const Image& img);

}  // namespace kdg
