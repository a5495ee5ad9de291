#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mdplab/mdp.hpp"
#include "mdplab/run.hpp"

namespace mdplab {

// One named inequality with both sides evaluated; slack = rhs - lhs.
struct BoundCheck {
  std::string name;
  std::string statement;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;
  int64_t trials = 1;
  std::string note;

  bool holds(double slack_tol = 0.0) const { return slack >= -slack_tol; }
};

inline BoundCheck make_check(std::string name, std::string statement, double lhs, double rhs,
                             int64_t trials = 1, std::string note = {}) {
  return BoundCheck{std::move(name), std::move(statement), lhs, rhs, rhs - lhs, trials,
                    std::move(note)};
}

// Contiguous policy snapshots {pi_t, ..., pi_{t+H}} cut out of a trace.
struct FrozenSchedule {
  int64_t start_t = 1;
  std::vector<Policy> policies;
};

FrozenSchedule frozen_schedule(const RunTrace& trace, int64_t start_t, int length);

// Exact per-step oracle series for one realized trace: optimal values, Q_t
// per snapshot (warm-started evaluations), plug-in nu_t, stationary mu_t, and
// the regret accounting built from them. Summation order is fixed: ascending
// t, then state, then action.
struct TraceAnalysis {
  int64_t num_steps = 0;
  double gamma = 0.0;
  double eval_tol = 0.0;

  OptimalPolicyResult optimal;

  std::vector<double> global_gap;   // V*(s_t) - V_t(s_t)
  double global_total = 0.0;

  Vector local_regret_by_state;     // R_s(T)
  double full_span = 0.0;           // triple sum over (t, s, a)
  double observed = 0.0;            // nu_t weighted
  double unobserved = 0.0;          // full_span - observed, exactly
  double observed_surrogate = 0.0;  // mu_t weighted
  double unobserved_surrogate = 0.0;

  std::vector<Matrix> q_tables;     // Q_t per step
  std::vector<Vector> v_tables;     // V_t per step
  std::vector<Vector> nu;           // plug-in state distribution per step
  std::vector<Vector> mu;           // stationary distribution per step (empty slots when flagged)
  std::vector<int64_t> non_ergodic_steps;

  std::vector<double> nu_mu_gap;    // ||nu_t - mu_t||_1
  double c_hat = 0.0;               // max per-step raw policy change
  std::vector<double> change_series;
  std::vector<int64_t> visits;      // per state
};

TraceAnalysis analyze_trace(const RunTrace& trace, const TabularMdp& mdp, double tol,
                            const StateDistribution* nu1 = nullptr);

// sum_t [V*(s_t) - V_t(s_t)], with V_t from warm-started exact evaluation.
struct GlobalRegret {
  std::vector<double> per_step;
  double total = 0.0;
};
GlobalRegret global_regret(const RunTrace& trace, const TabularMdp& mdp, double tol);

// sum_t <pi*(.|s) - pi_t(.|s), Q_t(s, .)>.
double local_regret(const RunTrace& trace, const TabularMdp& mdp, int state, double tol);

struct SplitRegret {
  double full_span = 0.0;
  double observed = 0.0;
  double unobserved = 0.0;
  double observed_surrogate = 0.0;
  double unobserved_surrogate = 0.0;
  std::vector<int64_t> non_ergodic_steps;
};
SplitRegret split_regret(const RunTrace& trace, const TabularMdp& mdp,
                         const StateDistribution* nu1 = nullptr, double tol = 1e-9);

// Exact truncated return from (s, a) under the frozen policy sequence:
// first reward r(s, a), then the state distribution pushed through the
// kernels of pi_{t+1}, ..., pi_{t+H}.
double ubar_exact(const TabularMdp& mdp, const FrozenSchedule& schedule, int state, int action);

// lhs = max_{s,a} |Q^{pi_late}(s,a) - Q^{pi_early}(s,a)| against the drift
// bound (S + H A) n c_hat / (1 - gamma) + 2 / sqrt(T).
BoundCheck q_drift(const TabularMdp& mdp, const Policy& pi_early, const Policy& pi_late, int64_t n,
                   double c_hat, int horizon, int64_t num_steps, double tol = 1e-10);

// Per-step ||nu_t - mu_t||_1 against tau(tau+1) c + 2 exp(-(t-1)/tau).
struct TrackingReport {
  std::vector<double> gap;
  std::vector<double> bound;
  double min_slack = 0.0;
};
TrackingReport nu_mu_tracking(const TraceAnalysis& analysis, double tau_hat, double c_hat);

// Empirical inter-visit moments for one state against 1/beta and 2/beta^3.
struct StickyStats {
  int64_t num_gaps = 0;
  double mean_gap = 0.0;
  double mean_sq_gap = 0.0;
  double se_gap = 0.0;     // standard error of the mean gap
  double se_sq_gap = 0.0;
  double mean_bound = 0.0;
  double sq_bound = 0.0;
};
StickyStats sticky_stats(const RunTrace& trace, int state, double beta_hat,
                         int64_t min_visits = 30);

// Seed-averaged surrogate unobserved regret against
// ob~/beta + 2 (S + H A) c T / (beta^3 (1 - gamma)) + 4 S sqrt(T).
BoundCheck full_span_check(const std::vector<TraceAnalysis>& analyses, const TabularMdp& mdp,
                           int horizon, double beta_hat);

// Regret accounting for one run, with the per-trace bound checks attached.
struct RegretReport {
  std::vector<double> global_series;
  double global_total = 0.0;
  Vector local;  // per state
  double full_span = 0.0;
  double observed = 0.0;
  double unobserved = 0.0;
  double observed_surrogate = 0.0;
  double unobserved_surrogate = 0.0;
  double beta_hat = 0.0;
  double tau_hat = 0.0;
  double c_hat = 0.0;
  bool assumptions_ok = true;
  std::vector<BoundCheck> bound_checks;
};

RegretReport build_regret_report(const TraceAnalysis& analysis, const TabularMdp& mdp, int horizon,
                                 double beta_hat, double tau_hat, bool assumptions_ok);

}  // namespace mdplab
