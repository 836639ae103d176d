#pragma once

// The four CLI commands. Each takes a fully resolved RunConfig and writes
// its artifacts below config.out.
//
//   <out>/source.kdgd, <out>/target.kdgd, <out>/manifest.json   gen-data
//   <out>/runs/<model>/{config.json, checkpoint.kdgw, metrics.csv,
//                       noise_log.csv, trajectory.csv | mask.txt} train
//   <out>/eval/{matrix.csv, records.csv, paired_tl_<domain>.csv,
//               paired_noise_<domain>.csv}                        eval
//   <run>/<id>_{input,recon,gt}.pgm, <run>/trajectory.csv         export

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kdg/evaluation.hpp"
#include "kdg/run_config.hpp"

namespace kdg {

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitData = 3, kExitNumeric = 4 };

struct GenDataResult {
    std::filesystem::path source;
    std::filesystem::path target;
    std::filesystem::path manifest;
};
GenDataResult cmd_gen_data(const RunConfig& config, std::ostream& log);

// The 2 sampling x 2 TL x 4 noise sweep, in a fixed order.
std::vector<RunConfig> expand_grid(const RunConfig& base);
ModelTag model_tag(const TrainConfig& t);
std::filesystem::path run_dir(const RunConfig& config);

// Trains one model (or the full grid) and returns the run directories.
std::vector<std::filesystem::path> cmd_train(const RunConfig& config, bool grid, std::ostream& log);

// Loads config.json, checkpoint.kdgw and the sampling pattern of a run.
TrainedModel load_run(const std::filesystem::path& dir);
// Run directories under <out>/runs that hold a checkpoint, sorted by name.
std::vector<std::filesystem::path> find_runs(const RunConfig& config);

CrossDomainReport cmd_eval(const RunConfig& config, std::ostream& log);

// Returns every file written.
std::vector<std::filesystem::path> cmd_export(const RunConfig& config, std::ostream& log);

// Full command line entry point; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace kdg
