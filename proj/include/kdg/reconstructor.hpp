#pragma once

// Small U-Net-style reconstruction network on real single-channel images:
// two 3x3 conv + ReLU blocks per level, 2x2 max pooling, nearest-neighbour
// upsampling, channel-concatenated skips and a final 1x1 projection. All
// arithmetic is 64-bit; backward() returns exact reverse-mode gradients for
// every parameter and for the input image.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "kdg/image.hpp"

namespace kdg {

struct ReconNetConfig {
    int depth = 2;          // encoder levels
    int base_channels = 8;  // channels at level 0, doubling per level

    void validate() const;
    int channels(int level) const { return base_channels << level; }
    bool operator==(const ReconNetConfig&) const = default;
};

struct LayerShape {
    int cin = 0;
    int cout = 0;
    int kernel = 3;
    std::size_t weight_offset = 0;  // into ReconNetParams::values, [cout][cin][k][k]
    std::size_t bias_offset = 0;

    std::size_t weight_count() const { return static_cast<std::size_t>(cout) * cin * kernel * kernel; }
};

// Layer shapes in declaration order: encoder levels, bottleneck, decoder
// levels (deepest first), final projection.
std::vector<LayerShape> layer_layout(const ReconNetConfig& config);

struct ReconNetParams {
    ReconNetConfig config;
    std::vector<LayerShape> layers;
    std::vector<double> values;  // all weights and biases, flat

    std::span<const double> weights(std::size_t layer) const;
    std::span<const double> bias(std::size_t layer) const;
    std::size_t count() const { return values.size(); }
    bool operator==(const ReconNetParams& o) const { return config == o.config && values == o.values; }
};

// Weights ~ U(-sqrt(6/fan_in), sqrt(6/fan_in)), biases zero.
ReconNetParams init_params(const ReconNetConfig& config, std::uint64_t seed);

// Requires height and width divisible by 2^depth.
Image forward(const ReconNetParams& params, const Image& x);

// Mean absolute difference.
double loss_l1(const Image& pred, const Image& target);

struct GradBundle {
    std::vector<double> params;  // same layout as ReconNetParams::values
    Image input;
};

struct BackwardResult {
    double loss = 0.0;
    Image prediction;
    GradBundle grads;
};

// Gradients of loss_l1(forward(x), target) + 0.5 * weight_decay * |theta|^2.
// The L1 subgradient at zero is 0.
BackwardResult backward(const ReconNetParams& params, const Image& x, const Image& target, double weight_decay = 0.0);

// Backward pass from an arbitrary upstream gradient on the prediction.
BackwardResult backward_from(const ReconNetParams& params, const Image& x, const Image& upstream);

// Adaptive-moment optimizer state for one parameter group.
struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    long step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

void adam_step(std::span<double> params, std::span<const double> grads, double lr, AdamState& state);

// Checkpoint file: "KDGW", u32 version, u32 depth, u32 base_channels,
// u64 value count, then little-endian f64 values in layer order.
inline constexpr std::uint32_t kCheckpointVersion = 1;
void save_checkpoint(const std::filesystem::path& path, const ReconNetParams& params);
ReconNetParams load_checkpoint(const std::filesystem::path& path);

}  // namespace kdg
