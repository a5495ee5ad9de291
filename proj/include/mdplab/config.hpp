#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mdplab/envs.hpp"

namespace mdplab {

// Experiment description parsed from a sectioned key = value text file.
// Unknown sections or keys are hard errors with a line diagnostic.
struct ExperimentConfig {
  EnvSpec env;

  // [run]
  int64_t steps = 10000;
  bool doubling = false;
  std::vector<uint64_t> seeds = {1};
  int snapshot_cadence = 1;
  int initial_state = 0;
  int horizon_override = -1;

  // [learner]
  std::string learner_kind = "exp3";  // exp3 | uniform
  double eta_override = 0.0;          // 0 selects the default tuning
  bool wrapper = true;
  bool raw_gain_exponent = false;

  // [output]
  std::string output_dir = "out";
  bool plot = false;
  int jobs = 0;  // 0 -> hardware concurrency

  // [sweep]
  std::vector<int64_t> sweep_steps;

  // [verify]
  std::string verify_only;      // substring filter over check names
  int verify_trials = 1000;
  int verify_run_seeds = 20;
  int64_t verify_run_steps = 20000;

  double eval_tol = 1e-9;

  std::string raw_text;  // the exact file contents, echoed into outputs
};

ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// "3" -> {3}; "1..4" -> {1,2,3,4}.
std::vector<uint64_t> parse_seed_range(const std::string& token);

}  // namespace mdplab
