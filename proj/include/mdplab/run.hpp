#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mdplab/learners.hpp"
#include "mdplab/mdp.hpp"

namespace mdplab {

// Truncation depth: ceil(log_gamma((1-gamma)/sqrt(T))), clamped at 0.
// Guarantees gamma^(H+1)/(1-gamma) <= 1/sqrt(T).
int horizon_steps(double gamma, int64_t num_steps);

// sum_k gamma^k rewards[k] over a window of length H+1.
double mc_return(std::span<const double> rewards, double gamma);

struct RunOptions {
  int initial_state = 0;
  int snapshot_cadence = 1;
  // Use gamma^i with the absolute step index in the truncated gain instead of
  // gamma^(i - (t-H)); kept for comparison with the unnormalized reading.
  bool raw_gain_exponent = false;
  int horizon_override = -1;  // < 0 selects horizon_steps(gamma, T)
  bool record_slot_changes = true;
  // Metadata echoed into traces.
  std::string learner_kind = "exp3";
  double eta = 0.0;
  int delay = -1;
  std::string config_hash = "none";
};

struct Step {
  int64_t t;
  int state;
  int action;
  double reward;
};

struct FeedbackEvent {
  int64_t t_delivered;
  int64_t t_of_action;
  int state;   // the state whose learner received the gain
  double gain;
};

// Everything realized by one environment loop: the trajectory, the policy
// snapshots, the feedback deliveries, and the per-step change of the
// slot-expanded policy (one row per (state, base) pair when the delay wrapper
// is in use).
struct RunTrace {
  uint64_t seed = 0;
  int64_t num_steps = 0;
  int horizon = 0;
  double gamma = 0.0;
  RunOptions options;
  std::vector<Step> steps;
  std::vector<Matrix> policy_snapshots;
  std::vector<FeedbackEvent> feedback_log;
  int num_slots = 1;
  std::vector<double> slot_change;      // entry t-1: change between steps t and t+1
  std::vector<int> slot_rows_changed;
  int final_state = 0;                  // state reached after the last step

  const Step& step(int64_t t) const { return steps[static_cast<size_t>(t - 1)]; }
  const Matrix& snapshot(int64_t t) const;  // requires cadence 1
};

// The environment interaction loop: one learner per state, sampled actions,
// and truncated Monte Carlo gains delivered with constant delay H.
RunTrace run_main(const TabularMdp& mdp, int64_t num_steps, const LearnerFactory& local_factory,
                  uint64_t seed, const RunOptions& options = {});

struct ChangeRateReport {
  double c_hat = 0.0;
  std::vector<double> per_step;      // size T-1
  std::vector<int> rows_changed;     // states whose row differs, per step
};

// c_hat = max_t ||pi_{t+1} - pi_t||_{1,inf} over every-step snapshots.
ChangeRateReport measured_change_rate(const RunTrace& trace);

// Re-derives every feedback event from the trajectory and checks the routing
// invariants. Throws std::logic_error on any mismatch.
void audit_feedback(const RunTrace& trace);

struct Epoch {
  int64_t nominal = 0;  // the length used to tune eta and H
  int64_t length = 0;   // actual steps run (last epoch may be truncated)
};

// Epoch lengths 1, 2, 4, ... covering exactly t_max steps.
std::vector<Epoch> doubling_schedule(int64_t t_max);

}  // namespace mdplab
