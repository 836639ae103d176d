#pragma once

// JSON run configuration shared by every CLI command. Every field has a
// default; unknown fields are rejected.

#include <cstdint>
#include <string>
#include <vector>

#include "kdg/data.hpp"
#include "kdg/error.hpp"
#include "kdg/training.hpp"

namespace kdg {

// Bad or unknown config field; the message names the field.
class ConfigError : public ArgumentError {
public:
    using ArgumentError::ArgumentError;
};

// A dataset, checkpoint or other input file that a command needs is missing.
class MissingArtifact : public Error {
public:
    using Error::Error;
};

struct DataConfig {
    int size = 64;
    int n_source = 200;
    int n_target = 100;
    int min_ellipses = 4;
    int max_ellipses = 8;
    double texture_noise_floor = 0.04;
    double native_fraction = 0.8;
    // Empty: <out>/source.kdgd and <out>/target.kdgd.
    std::string source_path;
    std::string target_path;

    PhantomSpec phantom(Domain d) const;
    bool operator==(const DataConfig&) const = default;
};

struct EvalConfig {
    // Run directories; empty means every run found under <out>.
    std::vector<std::string> runs;
    std::vector<std::string> domains{"source", "target"};
    int max_samples = 0;  // 0 = all
    bool operator==(const EvalConfig&) const = default;
};

struct ExportConfig {
    std::vector<std::string> runs;
    std::string domain = "source";
    std::vector<std::uint32_t> sample_ids;  // empty: first `count` samples
    int count = 4;
    bool operator==(const ExportConfig&) const = default;
};

struct RunConfig {
    std::uint64_t seed = 0;
    std::string out = "out";
    DataConfig data;
    TrainConfig train;  // train.seed mirrors `seed`
    // When > 0, grid-dependent noise magnitudes are rescaled from this grid
    // size to data.size before training.
    int noise_reference_size = 0;
    EvalConfig eval;
    ExportConfig export_;

    void validate() const;
    // Noise config after optional grid rescaling.
    NoiseConfig effective_noise() const;
    std::string source_path() const;
    std::string target_path() const;
    bool operator==(const RunConfig&) const = default;
};

std::string to_json(const RunConfig& c, int indent = 2);
RunConfig run_config_from_json(const std::string& text);
RunConfig load_run_config(const std::string& path);

}  // namespace kdg
