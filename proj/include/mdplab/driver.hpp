#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "mdplab/config.hpp"
#include "mdplab/verify.hpp"

namespace mdplab {

struct RunArtifacts {
  std::vector<std::string> trace_paths;
  std::string csv_path;
  std::string summary_path;
  std::vector<std::string> plot_paths;
  std::vector<double> global_regret_by_seed;
};

// Executes the configured runs across seeds, writes traces, the merged regret
// CSV, a summary, and optional SVG plots. Deterministic byte-for-byte for a
// fixed config.
RunArtifacts cli_run(const ExperimentConfig& config);

struct SweepRow {
  int64_t steps = 0;
  double mean_regret = 0.0;
  double sem = 0.0;
  double ratio_to_prev = 0.0;  // 0 for the first row
};

// Runs the seed set at every length in config.sweep_steps and writes a
// summary CSV with regret means and growth ratios.
std::vector<SweepRow> cli_sweep(const ExperimentConfig& config);

// Runs the verification suite configured by [verify]; writes the report and
// prints the summary table. Returns a nonzero exit code on hard failure.
int cli_verify(const ExperimentConfig& config, std::ostream& out);

// Environment diagnostics: sizes, assumption estimates, horizons, optimal
// value range.
std::string inspect_env(const EnvSpec& spec, double eval_tol = 1e-9);

VerifyConfig verify_config_from(const ExperimentConfig& config);

}  // namespace mdplab
