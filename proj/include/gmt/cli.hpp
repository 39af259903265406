#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gmt/io.hpp"

namespace gmt::cli {

enum ExitCode : int { kSuccess = 0, kFailure = 1, kUsage = 2, kBudget = 3 };

/// Settings for one command. Fields start at their defaults, are overridden by
/// a config file, and then by explicit command-line flags.
struct RunConfig {
    std::string command;
    std::optional<io::json> kernel;
    std::optional<io::json> target;
    std::optional<io::json> alpha;
    std::vector<std::string> grids;
    std::vector<double> mesh_sequence;
    std::string mode;
    std::string interval = "0:1";
    long paths = 10000;
    std::uint64_t seed = 20240601;
    double step = 1e-3;
    std::string out = ".";
    std::vector<double> targets{0.25, 1.0, 4.0};
    int i_max = 2;
    int k_cut = 60;
    long long budget = 1'000'000;
    long export_paths = 100;
};

/// Default values that depend on the command.
RunConfig defaults_for(const std::string& command);

/// Overlays the fields present in a JSON config object.
void apply_config(RunConfig& cfg, const io::json& file);

int cmd_psd_check(const RunConfig& cfg, std::ostream& log);
int cmd_transform(const RunConfig& cfg, std::ostream& log);
int cmd_converge(const RunConfig& cfg, std::ostream& log);
int cmd_counterexample(const RunConfig& cfg, std::ostream& log);
int cmd_simulate(const RunConfig& cfg, std::ostream& log);

/// Dispatches a configured command and maps errors to exit codes.
int run(const RunConfig& cfg, std::ostream& log, std::ostream& err);

/// Full entry point: parses argv, applies precedence and runs.
int main(int argc, const char* const* argv, std::ostream& log, std::ostream& err);

}  // namespace gmt::cli
