#include "mdplab/run.hpp"

#include <cmath>

#include "mdplab/rng.hpp"

namespace mdplab {

int horizon_steps(double gamma, int64_t num_steps) {
  if (num_steps < 1) throw std::invalid_argument("horizon_steps: need at least one step");
  if (gamma < 0.0 || gamma >= 1.0) throw std::invalid_argument("horizon_steps: gamma must lie in [0, 1)");
  if (gamma == 0.0) return 0;
  const double target = (1.0 - gamma) / std::sqrt(static_cast<double>(num_steps));
  const double h = std::ceil(std::log(target) / std::log(gamma));
  return h > 0.0 ? static_cast<int>(h) : 0;
}

double mc_return(std::span<const double> rewards, double gamma) {
  if (rewards.empty()) throw std::invalid_argument("mc_return: empty reward window");
  double sum = 0.0;
  double factor = 1.0;
  for (double r : rewards) {
    sum += factor * r;
    factor *= gamma;
  }
  return sum;
}

const Matrix& RunTrace::snapshot(int64_t t) const {
  if (options.snapshot_cadence != 1)
    throw std::logic_error("RunTrace::snapshot: requires every-step snapshots");
  return policy_snapshots[static_cast<size_t>(t - 1)];
}

namespace {

Matrix slot_matrix(const std::vector<std::unique_ptr<Learner>>& locals, int num_actions,
                   int num_slots, int64_t t) {
  const int num_states = static_cast<int>(locals.size());
  Matrix m(num_states * num_slots, num_actions);
  for (int h = 0; h < num_slots; ++h)
    for (int s = 0; s < num_states; ++s)
      m.row(h * num_states + s) = locals[s]->slot_snapshot(h, t).transpose();
  return m;
}

int count_changed_rows(const Matrix& a, const Matrix& b) {
  int changed = 0;
  for (int i = 0; i < a.rows(); ++i)
    if ((a.row(i).array() != b.row(i).array()).any()) ++changed;
  return changed;
}

}  // namespace

RunTrace run_main(const TabularMdp& mdp, int64_t num_steps, const LearnerFactory& local_factory,
                  uint64_t seed, const RunOptions& options) {
  mdp.validate();
  if (num_steps < 1) throw std::invalid_argument("run_main: need at least one step");
  if (options.snapshot_cadence < 1) throw std::invalid_argument("run_main: snapshot cadence must be >= 1");
  if (options.initial_state < 0 || options.initial_state >= mdp.num_states)
    throw std::invalid_argument("run_main: initial state out of range");

  const int S = mdp.num_states;
  const int A = mdp.num_actions;
  const double gamma = mdp.gamma;
  const int H = options.horizon_override >= 0 ? options.horizon_override
                                              : horizon_steps(gamma, num_steps);

  std::vector<std::unique_ptr<Learner>> locals;
  locals.reserve(S);
  for (int s = 0; s < S; ++s) {
    locals.push_back(local_factory());
    if (locals.back()->num_actions() != A)
      throw std::invalid_argument("run_main: learner action count does not match MDP");
  }

  RngStream action_rng(seed, kStreamActions);
  RngStream transition_rng(seed, kStreamTransitions);
  RngStream reward_rng(seed, kStreamRewards);

  RunTrace trace;
  trace.seed = seed;
  trace.num_steps = num_steps;
  trace.horizon = H;
  trace.gamma = gamma;
  trace.options = options;
  trace.steps.reserve(num_steps);
  trace.num_slots = locals.front()->num_slots();

  const double gain_cap =
      gamma > 0.0 ? (1.0 - std::pow(gamma, H + 1)) / (1.0 - gamma) : 1.0;

  std::vector<double> rewards;
  rewards.reserve(num_steps);

  Matrix prev_slots;
  if (options.record_slot_changes) {
    prev_slots = slot_matrix(locals, A, trace.num_slots, 1);
    trace.slot_change.reserve(num_steps > 0 ? num_steps - 1 : 0);
    trace.slot_rows_changed.reserve(num_steps > 0 ? num_steps - 1 : 0);
  }

  int state = options.initial_state;
  for (int64_t t = 1; t <= num_steps; ++t) {
    Vector p = locals[state]->act(t);
    if (std::abs(p.sum() - 1.0) > kDerivedTol || (p.array() < -kDerivedTol).any())
      throw std::logic_error("run_main: learner emitted a non-simplex distribution");
    const int action = action_rng.categorical(p);
    locals[state]->observe_action(t, action);

    double reward = mdp.mean_rewards(state, action);
    if (mdp.reward_kind == RewardKind::kBernoulli)
      reward = reward_rng.bernoulli(reward) ? 1.0 : 0.0;

    trace.steps.push_back({t, state, action, reward});
    rewards.push_back(reward);

    if ((t - 1) % options.snapshot_cadence == 0) {
      Matrix snap(S, A);
      for (int s = 0; s < S; ++s)
        snap.row(s) = (s == state) ? p.transpose() : locals[s]->snapshot(t).transpose();
      trace.policy_snapshots.push_back(std::move(snap));
    }

    if (t > H) {
      const int64_t t0 = t - H;
      std::span<const double> window(rewards.data() + (t0 - 1), static_cast<size_t>(H + 1));
      double gain = mc_return(window, gamma);
      if (options.raw_gain_exponent) gain *= std::pow(gamma, static_cast<double>(t0));
      if (gain < -1e-9 || gain > gain_cap + 1e-9)
        throw std::logic_error("run_main: truncated gain outside its range");
      const int fed_state = trace.step(t0).state;
      locals[fed_state]->feed(t0, gain);
      trace.feedback_log.push_back({t, t0, fed_state, gain});
    }

    if (options.record_slot_changes && t < num_steps) {
      Matrix cur = slot_matrix(locals, A, trace.num_slots, t + 1);
      trace.slot_change.push_back(one_inf_norm(cur - prev_slots));
      trace.slot_rows_changed.push_back(count_changed_rows(cur, prev_slots));
      prev_slots = std::move(cur);
    }

    state = transition_rng.categorical(mdp.transitions[action].row(state).transpose());
  }
  trace.final_state = state;
  return trace;
}

ChangeRateReport measured_change_rate(const RunTrace& trace) {
  if (trace.options.snapshot_cadence != 1)
    throw std::logic_error("measured_change_rate: requires every-step snapshots");
  ChangeRateReport report;
  const auto& snaps = trace.policy_snapshots;
  report.per_step.reserve(snaps.size() > 0 ? snaps.size() - 1 : 0);
  for (size_t i = 0; i + 1 < snaps.size(); ++i) {
    double c = one_inf_norm(snaps[i + 1] - snaps[i]);
    report.per_step.push_back(c);
    report.rows_changed.push_back(count_changed_rows(snaps[i + 1], snaps[i]));
    if (c > report.c_hat) report.c_hat = c;
  }
  return report;
}

void audit_feedback(const RunTrace& trace) {
  const int64_t expected = trace.num_steps > trace.horizon ? trace.num_steps - trace.horizon : 0;
  if (static_cast<int64_t>(trace.feedback_log.size()) != expected)
    throw std::logic_error("audit_feedback: wrong number of deliveries");
  std::vector<double> rewards;
  rewards.reserve(trace.steps.size());
  for (const Step& s : trace.steps) rewards.push_back(s.reward);
  std::vector<bool> delivered(trace.steps.size() + 1, false);
  for (const FeedbackEvent& ev : trace.feedback_log) {
    if (ev.t_delivered - ev.t_of_action != trace.horizon)
      throw std::logic_error("audit_feedback: delivery delay mismatch");
    if (delivered[static_cast<size_t>(ev.t_of_action)])
      throw std::logic_error("audit_feedback: step fed twice");
    delivered[static_cast<size_t>(ev.t_of_action)] = true;
    if (ev.state != trace.step(ev.t_of_action).state)
      throw std::logic_error("audit_feedback: gain routed to the wrong state");
    std::span<const double> window(rewards.data() + (ev.t_of_action - 1),
                                   static_cast<size_t>(trace.horizon + 1));
    double expected_gain = mc_return(window, trace.gamma);
    if (trace.options.raw_gain_exponent)
      expected_gain *= std::pow(trace.gamma, static_cast<double>(ev.t_of_action));
    if (expected_gain != ev.gain)
      throw std::logic_error("audit_feedback: gain does not replay from the reward window");
  }
}

std::vector<Epoch> doubling_schedule(int64_t t_max) {
  if (t_max < 1) throw std::invalid_argument("doubling_schedule: need at least one step");
  std::vector<Epoch> epochs;
  int64_t remaining = t_max;
  int64_t nominal = 1;
  while (remaining > 0) {
    const int64_t len = nominal < remaining ? nominal : remaining;
    epochs.push_back({nominal, len});
    remaining -= len;
    nominal *= 2;
  }
  return epochs;
}

}  // namespace mdplab
