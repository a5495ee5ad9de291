#include "mdplab/regret.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mdplab {

FrozenSchedule frozen_schedule(const RunTrace& trace, int64_t start_t, int length) {
  if (trace.options.snapshot_cadence != 1)
    throw std::logic_error("frozen_schedule: requires every-step snapshots");
  if (start_t < 1 || start_t + length - 1 > trace.num_steps)
    throw std::invalid_argument("frozen_schedule: window outside the trace");
  FrozenSchedule out;
  out.start_t = start_t;
  out.policies.reserve(length);
  for (int k = 0; k < length; ++k)
    out.policies.push_back(Policy{trace.snapshot(start_t + k)});
  return out;
}

TraceAnalysis analyze_trace(const RunTrace& trace, const TabularMdp& mdp,
                            double tol, const StateDistribution* nu1) {
  if (trace.options.snapshot_cadence != 1)
    throw std::logic_error("analyze_trace: requires every-step snapshots");
  const int S = mdp.num_states;
  const int A = mdp.num_actions;
  const int64_t T = trace.num_steps;

  TraceAnalysis out;
  out.num_steps = T;
  out.gamma = mdp.gamma;
  out.eval_tol = tol;
  out.optimal = optimal_policy(mdp, tol);

  out.global_gap.reserve(T);
  out.q_tables.reserve(T);
  out.v_tables.reserve(T);
  out.nu.reserve(T);
  out.mu.reserve(T);
  out.nu_mu_gap.reserve(T);
  out.local_regret_by_state = Vector::Zero(S);
  out.visits.assign(S, 0);

  Vector nu_t = nu1 ? nu1->mass : StateDistribution::point_mass(S, trace.step(1).state).mass;
  Vector warm;
  const Matrix& pi_star = out.optimal.policy.probs;

  for (int64_t t = 1; t <= T; ++t) {
    const Policy pi_t{trace.snapshot(t)};
    ValueTables vt = policy_evaluation(mdp, pi_t, tol, t == 1 ? nullptr : &warm);
    warm = vt.v;

    const int s_t = trace.step(t).state;
    ++out.visits[s_t];
    const double gap = out.optimal.values.v[s_t] - vt.v[s_t];
    out.global_gap.push_back(gap);
    out.global_total += gap;

    Matrix kernel = induced_kernel(mdp, pi_t);
    bool ergodic = true;
    Vector mu_t;
    try {
      mu_t = stationary_distribution(kernel).mass;
    } catch (const NotErgodicError&) {
      ergodic = false;
      out.non_ergodic_steps.push_back(t);
    }

    for (int s = 0; s < S; ++s) {
      double f = 0.0;
      for (int a = 0; a < A; ++a)
        f += (pi_star(s, a) - pi_t.probs(s, a)) * vt.q(s, a);
      out.local_regret_by_state[s] += f;
      out.full_span += f;
      out.observed += nu_t[s] * f;
      if (ergodic) out.observed_surrogate += mu_t[s] * f;
    }

    out.nu.push_back(nu_t);
    out.nu_mu_gap.push_back(ergodic ? (nu_t - mu_t).cwiseAbs().sum() : -1.0);
    out.mu.push_back(ergodic ? mu_t : Vector());
    out.q_tables.push_back(std::move(vt.q));
    out.v_tables.push_back(std::move(vt.v));

    if (t < T) nu_t = (nu_t.transpose() * kernel).transpose();
  }

  out.unobserved = out.full_span - out.observed;
  out.unobserved_surrogate = out.full_span - out.observed_surrogate;

  ChangeRateReport change = measured_change_rate(trace);
  out.c_hat = change.c_hat;
  out.change_series = std::move(change.per_step);
  return out;
}

GlobalRegret global_regret(const RunTrace& trace, const TabularMdp& mdp, double tol) {
  TraceAnalysis a = analyze_trace(trace, mdp, tol);
  GlobalRegret out;
  out.per_step = std::move(a.global_gap);
  out.total = a.global_total;
  return out;
}

double local_regret(const RunTrace& trace, const TabularMdp& mdp, int state, double tol) {
  if (state < 0 || state >= mdp.num_states)
    throw std::invalid_argument("local_regret: state out of range");
  TraceAnalysis a = analyze_trace(trace, mdp, tol);
  return a.local_regret_by_state[state];
}

SplitRegret split_regret(const RunTrace& trace, const TabularMdp& mdp,
                         const StateDistribution* nu1, double tol) {
  TraceAnalysis a = analyze_trace(trace, mdp, tol, nu1);
  SplitRegret out;
  out.full_span = a.full_span;
  out.observed = a.observed;
  out.unobserved = a.unobserved;
  out.observed_surrogate = a.observed_surrogate;
  out.unobserved_surrogate = a.unobserved_surrogate;
  out.non_ergodic_steps = a.non_ergodic_steps;
  return out;
}

double ubar_exact(const TabularMdp& mdp, const FrozenSchedule& schedule, int state, int action) {
  if (schedule.policies.empty()) throw std::invalid_argument("ubar_exact: empty schedule");
  if (state < 0 || state >= mdp.num_states || action < 0 || action >= mdp.num_actions)
    throw std::invalid_argument("ubar_exact: state or action out of range");
  const int H = static_cast<int>(schedule.policies.size()) - 1;

  double total = mdp.mean_rewards(state, action);
  if (H == 0) return total;

  Vector d = mdp.transitions[action].row(state).transpose();
  double factor = mdp.gamma;
  for (int k = 1; k <= H; ++k) {
    const Policy& pi = schedule.policies[k];
    double step_reward = (pi.probs.array() * mdp.mean_rewards.array()).rowwise().sum().matrix().dot(d);
    total += factor * step_reward;
    if (k < H) {
      d = (d.transpose() * induced_kernel(mdp, pi)).transpose();
      factor *= mdp.gamma;
    }
  }
  return total;
}

BoundCheck q_drift(const TabularMdp& mdp, const Policy& pi_early, const Policy& pi_late, int64_t n,
                   double c_hat, int horizon, int64_t num_steps, double tol) {
  const double hypothesis = one_inf_norm(pi_late.probs - pi_early.probs);
  BoundCheck check;
  if (hypothesis > static_cast<double>(n) * c_hat + kDerivedTol) {
    check = make_check("q-drift", "|Q_{t+n} - Q_t| <= (S + H A) n c / (1 - gamma) + 2/sqrt(T)", 0.0,
                       0.0, 1, "hypothesis ||pi_{t+n} - pi_t|| <= n c violated; check skipped");
    return check;
  }
  ValueTables early = policy_evaluation(mdp, pi_early, tol);
  ValueTables late = policy_evaluation(mdp, pi_late, tol);
  const double lhs = (late.q - early.q).cwiseAbs().maxCoeff();
  const double rhs = (mdp.num_states + static_cast<double>(horizon) * mdp.num_actions) *
                         static_cast<double>(n) * c_hat / (1.0 - mdp.gamma) +
                     2.0 / std::sqrt(static_cast<double>(num_steps));
  return make_check("q-drift", "|Q_{t+n} - Q_t| <= (S + H A) n c / (1 - gamma) + 2/sqrt(T)", lhs,
                    rhs);
}

TrackingReport nu_mu_tracking(const TraceAnalysis& analysis, double tau_hat, double c_hat) {
  TrackingReport out;
  out.min_slack = std::numeric_limits<double>::infinity();
  const int64_t T = analysis.num_steps;
  out.gap.reserve(T);
  out.bound.reserve(T);
  for (int64_t t = 1; t <= T; ++t) {
    const double gap = analysis.nu_mu_gap[static_cast<size_t>(t - 1)];
    if (gap < 0.0) throw NotErgodicError("nu_mu_tracking: non-ergodic snapshot at step " + std::to_string(t));
    const double bound = tau_hat * (tau_hat + 1.0) * c_hat +
                         2.0 * std::exp(-static_cast<double>(t - 1) / tau_hat);
    out.gap.push_back(gap);
    out.bound.push_back(bound);
    out.min_slack = std::min(out.min_slack, bound - gap);
  }
  return out;
}

StickyStats sticky_stats(const RunTrace& trace, int state, double beta_hat, int64_t min_visits) {
  std::vector<int64_t> visit_times;
  for (const Step& s : trace.steps)
    if (s.state == state) visit_times.push_back(s.t);
  if (static_cast<int64_t>(visit_times.size()) < min_visits)
    throw std::invalid_argument("sticky_stats: state " + std::to_string(state) + " visited only " +
                                std::to_string(visit_times.size()) + " times");
  StickyStats out;
  out.num_gaps = static_cast<int64_t>(visit_times.size()) - 1;
  double sum = 0.0, sum_sq = 0.0, sum_q4 = 0.0;
  for (size_t i = 0; i + 1 < visit_times.size(); ++i) {
    const double gap = static_cast<double>(visit_times[i + 1] - visit_times[i]);
    sum += gap;
    sum_sq += gap * gap;
    sum_q4 += gap * gap * gap * gap;
  }
  const double n = static_cast<double>(out.num_gaps);
  out.mean_gap = sum / n;
  out.mean_sq_gap = sum_sq / n;
  const double var_gap = std::max(0.0, sum_sq / n - out.mean_gap * out.mean_gap);
  const double var_sq = std::max(0.0, sum_q4 / n - out.mean_sq_gap * out.mean_sq_gap);
  out.se_gap = std::sqrt(var_gap / n);
  out.se_sq_gap = std::sqrt(var_sq / n);
  out.mean_bound = 1.0 / beta_hat;
  out.sq_bound = 2.0 / (beta_hat * beta_hat * beta_hat);
  return out;
}

BoundCheck full_span_check(const std::vector<TraceAnalysis>& analyses, const TabularMdp& mdp,
                           int horizon, double beta_hat) {
  if (analyses.empty()) throw std::invalid_argument("full_span_check: no analyses");
  double lhs_sum = 0.0, rhs_sum = 0.0, diff_sq = 0.0;
  std::vector<double> diffs;
  diffs.reserve(analyses.size());
  for (const TraceAnalysis& a : analyses) {
    const double T = static_cast<double>(a.num_steps);
    const double rhs = a.observed_surrogate / beta_hat +
                       2.0 * (mdp.num_states + static_cast<double>(horizon) * mdp.num_actions) *
                           a.c_hat * T / (beta_hat * beta_hat * beta_hat * (1.0 - mdp.gamma)) +
                       4.0 * mdp.num_states * std::sqrt(T);
    lhs_sum += a.unobserved_surrogate;
    rhs_sum += rhs;
    diffs.push_back(rhs - a.unobserved_surrogate);
  }
  const double n = static_cast<double>(analyses.size());
  const double mean_lhs = lhs_sum / n;
  const double mean_rhs = rhs_sum / n;
  double mean_diff = 0.0;
  for (double d : diffs) mean_diff += d;
  mean_diff /= n;
  for (double d : diffs) diff_sq += (d - mean_diff) * (d - mean_diff);
  const double se = n > 1 ? std::sqrt(diff_sq / (n - 1) / n) : 0.0;
  BoundCheck check = make_check(
      "full-span-bound",
      "un~ <= ob~/beta + 2 (S + H A) c T / (beta^3 (1 - gamma)) + 4 S sqrt(T), seed-averaged",
      mean_lhs, mean_rhs + 2.0 * se, static_cast<int64_t>(analyses.size()),
      "rhs includes a 2-standard-error allowance");
  return check;
}

RegretReport build_regret_report(const TraceAnalysis& analysis, const TabularMdp& mdp, int horizon,
                                 double beta_hat, double tau_hat, bool assumptions_ok) {
  RegretReport report;
  report.global_series = analysis.global_gap;
  report.global_total = analysis.global_total;
  report.local = analysis.local_regret_by_state;
  report.full_span = analysis.full_span;
  report.observed = analysis.observed;
  report.unobserved = analysis.unobserved;
  report.observed_surrogate = analysis.observed_surrogate;
  report.unobserved_surrogate = analysis.unobserved_surrogate;
  report.beta_hat = beta_hat;
  report.tau_hat = tau_hat;
  report.c_hat = analysis.c_hat;
  report.assumptions_ok = assumptions_ok;

  const double gamma = mdp.gamma;
  const double T = static_cast<double>(analysis.num_steps);
  report.bound_checks.push_back(make_check(
      "decomposition", "(1 - gamma) * global regret <= sum_s local regret + T * tol",
      (1.0 - gamma) * analysis.global_total, analysis.local_regret_by_state.sum() + T * analysis.eval_tol));
  report.bound_checks.push_back(make_check("split-identity", "full-span = observed + unobserved",
                                           std::abs(analysis.full_span -
                                                    (analysis.observed + analysis.unobserved)),
                                           1e-9));
  if (assumptions_ok && analysis.non_ergodic_steps.empty()) {
    TrackingReport tracking = nu_mu_tracking(analysis, tau_hat, analysis.c_hat);
    double worst_gap = 0.0, worst_bound = 0.0, min_slack = std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < tracking.gap.size(); ++k)
      if (tracking.bound[k] - tracking.gap[k] < min_slack) {
        min_slack = tracking.bound[k] - tracking.gap[k];
        worst_gap = tracking.gap[k];
        worst_bound = tracking.bound[k];
      }
    report.bound_checks.push_back(make_check(
        "distribution-tracking", "||nu_t - mu_t||_1 <= tau (tau+1) c + 2 exp(-(t-1)/tau)", worst_gap,
        worst_bound, analysis.num_steps));
    double budget = 0.0;
    for (double g : analysis.nu_mu_gap) budget += g;
    report.bound_checks.push_back(make_check("observed-surrogate-gap",
                                             "|ob - ob~| <= sum_t ||nu_t - mu_t||_1 / (1 - gamma)",
                                             std::abs(analysis.observed - analysis.observed_surrogate),
                                             budget / (1.0 - gamma) + 1e-9));
    const double rhs = analysis.observed_surrogate / beta_hat +
                       2.0 * (mdp.num_states + static_cast<double>(horizon) * mdp.num_actions) *
                           analysis.c_hat * T /
                           (beta_hat * beta_hat * beta_hat * (1.0 - gamma)) +
                       4.0 * mdp.num_states * std::sqrt(T);
    report.bound_checks.push_back(make_check(
        "full-span-bound", "un~ <= ob~/beta + 2 (S + H A) c T / (beta^3 (1 - gamma)) + 4 S sqrt(T)",
        analysis.unobserved_surrogate, rhs, 1, "single-run form of an expectation-level bound"));
  }
  return report;
}

}  // namespace mdplab
