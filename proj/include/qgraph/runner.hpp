#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "qgraph/config.hpp"

namespace qgraph {

inline constexpr const char* kToolVersion = "qgraph 0.1.0";

enum ExitCode : int { kExitOk = 0, kExitInvalid = 1, kExitNumerical = 2 };

struct RunOptions {
    std::filesystem::path out;  // base directory; the job writes into out/<name>
    bool verify = false;
    bool plots = true;
};

struct ResultSet {
    ExperimentKind kind = ExperimentKind::simulate;
    std::filesystem::path dir;
    std::vector<std::string> files;  // CSV names relative to dir
};

struct RunResult {
    int exit_code = kExitOk;
    std::string message;
    ResultSet results;
};

// Results are computed in memory and written only when the job succeeds.
RunResult run(const ExperimentConfig& cfg, const RunOptions& opt);

// Bounded worker pool over independent jobs; the batch exit code is the maximum.
std::vector<RunResult> run_jobs(const std::vector<ExperimentConfig>& jobs, const RunOptions& opt, int workers);

// Writes plot.py next to the CSVs. Throws when the set is empty or a file is missing.
std::filesystem::path emit_plots(const ResultSet& results);

// "# qgraph 0.1.0 config=<hash> kind=<kind> seed=<seed>"
std::string provenance_header(const ExperimentConfig& cfg);

// Resolution order: explicit flag, config output.dir, QGRAPH_OUT_DIR, ./qgraph_out.
std::filesystem::path resolve_output_dir(const std::string& flag, const ExperimentConfig& cfg);

}  // namespace qgraph
