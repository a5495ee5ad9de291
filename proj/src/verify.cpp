#include "mdplab/verify.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "mdplab/parallel.hpp"
#include "mdplab/rng.hpp"

namespace mdplab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Tracks the worst (smallest-slack) instance across randomized trials.
struct WorstCase {
  double lhs = 0.0;
  double rhs = kInf;
  int64_t trials = 0;

  void observe(double lhs_i, double rhs_i) {
    ++trials;
    if (rhs_i - lhs_i < rhs - lhs) {
      lhs = lhs_i;
      rhs = rhs_i;
    }
  }

  CheckResult result(std::string name, std::string statement, double slack_tol,
                     std::string note = {}) const {
    CheckResult out;
    out.name = std::move(name);
    out.statement = std::move(statement);
    out.lhs = lhs;
    out.rhs = rhs;
    out.slack = rhs - lhs;
    out.trials = trials;
    out.verdict = out.slack >= -slack_tol ? Verdict::kPass : Verdict::kFail;
    out.note = std::move(note);
    return out;
  }
};

CheckResult from_bound(const BoundCheck& b, double slack_tol = 0.0) {
  CheckResult c;
  c.name = b.name;
  c.statement = b.statement;
  c.lhs = b.lhs;
  c.rhs = b.rhs;
  c.slack = b.slack;
  c.trials = b.trials;
  c.verdict = b.holds(slack_tol) ? Verdict::kPass : Verdict::kFail;
  c.note = b.note;
  return c;
}

Matrix random_stochastic(RngStream& rng, int rows, int cols) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) m.row(i) = rng.simplex(cols).transpose();
  return m;
}

TabularMdp random_mdp(RngStream& rng, int num_states, int num_actions, double gamma) {
  TabularMdp mdp;
  mdp.num_states = num_states;
  mdp.num_actions = num_actions;
  mdp.gamma = gamma;
  mdp.transitions.reserve(num_actions);
  for (int a = 0; a < num_actions; ++a)
    mdp.transitions.push_back(random_stochastic(rng, num_states, num_states));
  mdp.mean_rewards = Matrix(num_states, num_actions);
  for (int s = 0; s < num_states; ++s)
    for (int a = 0; a < num_actions; ++a) mdp.mean_rewards(s, a) = rng.uniform01();
  return mdp;
}

Policy random_policy(RngStream& rng, int num_states, int num_actions) {
  Policy pi;
  pi.probs = random_stochastic(rng, num_states, num_actions);
  return pi;
}

// Policy sequence whose per-step 1-inf change is at most max_step.
std::vector<Policy> slow_policy_chain(RngStream& rng, int num_states, int num_actions, int length,
                                      double max_step) {
  std::vector<Policy> chain;
  chain.reserve(length);
  chain.push_back(random_policy(rng, num_states, num_actions));
  for (int i = 1; i < length; ++i) {
    const double alpha = 0.5 * max_step * rng.uniform01();
    Policy target = random_policy(rng, num_states, num_actions);
    Policy next;
    next.probs = (1.0 - alpha) * chain.back().probs + alpha * target.probs;
    chain.push_back(std::move(next));
  }
  return chain;
}

double max_per_step_change(const std::vector<Policy>& chain) {
  double c = 0.0;
  for (size_t i = 0; i + 1 < chain.size(); ++i)
    c = std::max(c, one_inf_norm(chain[i + 1].probs - chain[i].probs));
  return c;
}

}  // namespace

std::string verdict_name(Verdict v) {
  switch (v) {
    case Verdict::kPass: return "pass";
    case Verdict::kFail: return "FAIL";
    case Verdict::kAssumptionsUnmet: return "assumptions-unmet";
    case Verdict::kDemonstrated: return "demonstrated";
  }
  return "?";
}

CheckResult check_norm_properties(int trials, uint64_t seed) {
  RngStream rng(seed, 101);
  WorstCase worst;
  for (int i = 0; i < trials; ++i) {
    const int rows = 2 + static_cast<int>(rng.integer(5));
    const int cols = 2 + static_cast<int>(rng.integer(5));
    Matrix x(rows, cols), y(rows, cols);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < cols; ++c) {
        x(r, c) = rng.uniform(-2.0, 2.0);
        y(r, c) = rng.uniform(-2.0, 2.0);
      }
    const double a = rng.uniform(-3.0, 3.0);
    // triangle inequality
    worst.observe(one_inf_norm(x + y), one_inf_norm(x) + one_inf_norm(y));
    // absolute homogeneity, as two-sided bound
    const double lhs = std::abs(one_inf_norm(a * x) - std::abs(a) * one_inf_norm(x));
    worst.observe(lhs, 1e-12 * (1.0 + std::abs(a) * one_inf_norm(x)));
    // positive definiteness
    if (one_inf_norm(x) == 0.0) worst.observe(x.cwiseAbs().maxCoeff(), 0.0);
    worst.observe(0.0, one_inf_norm(x));
  }
  return worst.result("norm-1inf", "max-row L1 is a norm (triangle, homogeneity, definiteness)",
                      1e-10);
}

CheckResult check_multi_step_change(int trials, uint64_t seed) {
  RngStream rng(seed, 102);
  WorstCase worst;
  for (int i = 0; i < trials; ++i) {
    const int S = 2 + static_cast<int>(rng.integer(4));
    const int A = 2 + static_cast<int>(rng.integer(3));
    const int len = 3 + static_cast<int>(rng.integer(10));
    auto chain = slow_policy_chain(rng, S, A, len, 0.2);
    const double c = max_per_step_change(chain);
    const int k = 1 + static_cast<int>(rng.integer(len - 1));
    worst.observe(one_inf_norm(chain[k].probs - chain[0].probs), k * c);
  }
  return worst.result("multi-step-change", "||pi_{t+k} - pi_t||_{1,inf} <= k c", 1e-10);
}

CheckResult check_kernel_policy_shift(int trials, uint64_t seed) {
  RngStream rng(seed, 103);
  WorstCase worst;
  for (int i = 0; i < trials; ++i) {
    const int S = 2 + static_cast<int>(rng.integer(5));
    const int A = 2 + static_cast<int>(rng.integer(3));
    TabularMdp mdp = random_mdp(rng, S, A, 0.9);
    Policy pi = random_policy(rng, S, A);
    Policy pi2 = random_policy(rng, S, A);
    Vector d = rng.simplex(S);
    const double lhs =
        ((d.transpose() * induced_kernel(mdp, pi)) - (d.transpose() * induced_kernel(mdp, pi2)))
            .cwiseAbs()
            .sum();
    worst.observe(lhs, one_inf_norm(pi.probs - pi2.probs));
  }
  return worst.result("kernel-policy-shift", "||d K^pi - d K^pi'||_1 <= ||pi - pi'||_{1,inf}",
                      1e-10);
}

CheckResult check_kernel_contraction(int trials, uint64_t seed) {
  RngStream rng(seed, 104);
  WorstCase worst;
  for (int i = 0; i < trials; ++i) {
    const int S = 2 + static_cast<int>(rng.integer(5));
    const int A = 2 + static_cast<int>(rng.integer(3));
    TabularMdp mdp = random_mdp(rng, S, A, 0.9);
    Matrix k = induced_kernel(mdp, random_policy(rng, S, A));
    Vector d = rng.simplex(S);
    Vector d2 = rng.simplex(S);
    const double lhs = ((d - d2).transpose() * k).cwiseAbs().sum();
    worst.observe(lhs, (d - d2).cwiseAbs().sum());
  }
  return worst.result("kernel-contraction", "||d K^pi - d' K^pi||_1 <= ||d - d'||_1", 1e-10);
}

CheckResult check_kernel_joint_step(int trials, uint64_t seed) {
  RngStream rng(seed, 105);
  WorstCase worst;
  for (int i = 0; i < trials; ++i) {
    const int S = 2 + static_cast<int>(rng.integer(5));
    const int A = 2 + static_cast<int>(rng.integer(3));
    TabularMdp mdp = random_mdp(rng, S, A, 0.9);
    Policy pi = random_policy(rng, S, A);
    Policy pi2 = random_policy(rng, S, A);
    Vector d = rng.simplex(S);
    Vector d2 = rng.simplex(S);
    const double lhs = ((d.transpose() * induced_kernel(mdp, pi)) -
                        (d2.transpose() * induced_kernel(mdp, pi2)))
                           .cwiseAbs()
                           .sum();
    worst.observe(lhs, one_inf_norm(pi.probs - pi2.probs) + (d - d2).cwiseAbs().sum());
  }
  return worst.result("kernel-joint-step", "||d K^pi - d' K^pi'||_1 <= c + delta", 1e-10);
}

CheckResult check_kernel_product_error(int trials, uint64_t seed) {
  RngStream rng(seed, 106);
  WorstCase worst;
  for (int i = 0; i < trials; ++i) {
    const int S = 2 + static_cast<int>(rng.integer(4));
    const int A = 2 + static_cast<int>(rng.integer(3));
    const int K = 1 + static_cast<int>(rng.integer(5));
    TabularMdp mdp = random_mdp(rng, S, A, 0.9);
    Vector d = rng.simplex(S);
    Vector d2 = rng.simplex(S);
    double c = 0.0;
    Vector left = d, right = d2;
    for (int k = 0; k < K; ++k) {
      Policy pi = random_policy(rng, S, A);
      Policy pi2 = random_policy(rng, S, A);
      c = std::max(c, one_inf_norm(pi.probs - pi2.probs));
      left = (left.transpose() * induced_kernel(mdp, pi)).transpose();
      right = (right.transpose() * induced_kernel(mdp, pi2)).transpose();
    }
    worst.observe((left - right).cwiseAbs().sum(), K * c + (d - d2).cwiseAbs().sum());
  }
  return worst.result("kernel-product-error",
                      "||d (K^pi_1 .. K^pi_K) - d' (K^pi'_1 .. K^pi'_K)||_1 <= K c + delta", 1e-10);
}

CheckResult check_kernel_product_lag(int trials, uint64_t seed) {
  RngStream rng(seed, 107);
  WorstCase worst;
  for (int i = 0; i < trials; ++i) {
    const int S = 2 + static_cast<int>(rng.integer(4));
    const int A = 2 + static_cast<int>(rng.integer(3));
    const int K = 1 + static_cast<int>(rng.integer(5));
    const int len = 8;
    auto chain = slow_policy_chain(rng, S, A, len, 0.15);
    const double c = max_per_step_change(chain);
    const int n = 1 + static_cast<int>(rng.integer(len - 1));
    TabularMdp mdp = random_mdp(rng, S, A, 0.9);
    Matrix early = induced_kernel(mdp, chain[0]);
    Matrix late = induced_kernel(mdp, chain[n]);
    Vector d = rng.simplex(S);
    Vector a = d, b = d;
    for (int k = 0; k < K; ++k) {
      a = (a.transpose() * late).transpose();
      b = (b.transpose() * early).transpose();
    }
    worst.observe((a - b).cwiseAbs().sum(), static_cast<double>(K) * n * c);
  }
  return worst.result("kernel-product-lag", "||d (K^pi_{t+n})^K - d (K^pi_t)^K||_1 <= K n c",
                      1e-10);
}

CheckResult check_kernel_product_freeze(int trials, uint64_t seed) {
  RngStream rng(seed, 108);
  WorstCase worst;
  for (int i = 0; i < trials; ++i) {
    const int S = 2 + static_cast<int>(rng.integer(4));
    const int A = 2 + static_cast<int>(rng.integer(3));
    const int K = 1 + static_cast<int>(rng.integer(6));
    auto chain = slow_policy_chain(rng, S, A, K, 0.15);
    const double c = max_per_step_change(chain);
    TabularMdp mdp = random_mdp(rng, S, A, 0.9);
    Matrix frozen = induced_kernel(mdp, chain[0]);
    Vector d = rng.simplex(S);
    Vector a = d, b = d;
    for (int k = 0; k < K; ++k) {
      a = (a.transpose() * induced_kernel(mdp, chain[k])).transpose();
      b = (b.transpose() * frozen).transpose();
    }
    worst.observe((a - b).cwiseAbs().sum(), static_cast<double>(K) * K * c);
  }
  return worst.result("kernel-product-freeze",
                      "||d (K^pi_t .. K^pi_{t+K-1}) - d (K^pi_t)^K||_1 <= K^2 c", 1e-10);
}

CheckResult check_kernel_product_window(int trials, uint64_t seed) {
  RngStream rng(seed, 109);
  WorstCase worst;
  for (int i = 0; i < trials; ++i) {
    const int S = 2 + static_cast<int>(rng.integer(4));
    const int A = 2 + static_cast<int>(rng.integer(3));
    const int K = 1 + static_cast<int>(rng.integer(4));
    const int n = 1 + static_cast<int>(rng.integer(4));
    auto chain = slow_policy_chain(rng, S, A, K + n, 0.15);
    const double c = max_per_step_change(chain);
    TabularMdp mdp = random_mdp(rng, S, A, 0.9);
    Vector d = rng.simplex(S);
    Vector a = d, b = d;
    for (int k = 0; k < K; ++k) {
      a = (a.transpose() * induced_kernel(mdp, chain[k + n])).transpose();
      b = (b.transpose() * induced_kernel(mdp, chain[k])).transpose();
    }
    worst.observe((a - b).cwiseAbs().sum(), static_cast<double>(K) * n * c);
  }
  return worst.result("kernel-product-window",
                      "||d (K^pi_{t+n} .. K^pi_{t+n+K-1}) - d (K^pi_t .. K^pi_{t+K-1})||_1 <= K n c",
                      1e-10);
}

CheckResult check_performance_difference(int instances, uint64_t seed) {
  RngStream rng(seed, 110);
  WorstCase worst;
  for (int i = 0; i < instances; ++i) {
    const int S = 2 + static_cast<int>(rng.integer(5));  // up to 6 states
    const int A = 2 + static_cast<int>(rng.integer(2));  // up to 3 actions
    TabularMdp mdp = random_mdp(rng, S, A, rng.uniform(0.3, 0.95));
    Policy pi = random_policy(rng, S, A);
    Policy pi2 = random_policy(rng, S, A);
    const int s0 = static_cast<int>(rng.integer(S));
    ValueTables base = policy_evaluation(mdp, pi, 1e-12);
    ValueTables other = policy_evaluation(mdp, pi2, 1e-12);
    Vector d = discounted_occupancy(mdp, pi2, s0).mass;
    double advantage = 0.0;
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a)
        advantage += d[s] * pi2.probs(s, a) * (base.q(s, a) - base.v[s]);
    const double lhs = std::abs((other.v[s0] - base.v[s0]) - advantage / (1.0 - mdp.gamma));
    worst.observe(lhs, 1e-8);
  }
  return worst.result("performance-difference",
                      "V^pi'(s0) - V^pi(s0) = E_{d^pi'}[<pi', Q^pi - V^pi>] / (1 - gamma)", 0.0);
}

CheckResult check_horizon_tail() {
  WorstCase worst;
  for (double gamma : {0.5, 0.9, 0.99})
    for (int64_t t : {100LL, 1000LL, 10000LL, 100000LL}) {
      const int h = horizon_steps(gamma, t);
      const double tail = std::pow(gamma, h + 1) / (1.0 - gamma);
      worst.observe(tail, 1.0 / std::sqrt(static_cast<double>(t)));
    }
  return worst.result("horizon-tail", "gamma^(H+1) / (1 - gamma) <= 1/sqrt(T)", 0.0);
}

CheckResult check_finite_horizon_gap(int trials, uint64_t seed) {
  RngStream rng(seed, 111);
  WorstCase worst;
  for (int i = 0; i < trials; ++i) {
    const int S = 2 + static_cast<int>(rng.integer(4));
    const int A = 2 + static_cast<int>(rng.integer(3));
    const double gamma = rng.uniform(0.3, 0.95);
    const int64_t t = 100 + static_cast<int64_t>(rng.integer(10000));
    TabularMdp mdp = random_mdp(rng, S, A, gamma);
    Policy pi = random_policy(rng, S, A);
    const int h = horizon_steps(gamma, t);
    Matrix truncated = finite_horizon_q(mdp, pi, h);
    ValueTables exact = policy_evaluation(mdp, pi, 1e-12);
    const double gap = (truncated - exact.q).cwiseAbs().maxCoeff();
    const double tail = std::pow(gamma, h + 1) / (1.0 - gamma);
    worst.observe(gap, tail);
    worst.observe(tail, 1.0 / std::sqrt(static_cast<double>(t)));
  }
  return worst.result("finite-horizon-gap",
                      "|Qbar - Q| <= gamma^(H+1)/(1 - gamma) <= 1/sqrt(T) entrywise", 1e-9);
}

CheckResult check_augmented_stationary(int instances, uint64_t seed) {
  RngStream rng(seed, 112);
  WorstCase worst;
  for (int i = 0; i < instances; ++i) {
    const int S = 2 + static_cast<int>(rng.integer(4));
    const int A = 2 + static_cast<int>(rng.integer(3));
    const int extra = static_cast<int>(rng.integer(11));  // H <= 10
    TabularMdp mdp = random_ergodic(S, A, rng.uniform(0.2, 1.0), 0.9, rng.integer(1u << 30));
    Policy pi = random_policy(rng, S, A);
    AugmentedMdp aug = augment(mdp, extra);
    Vector mu = stationary_distribution(induced_kernel(mdp, pi)).mass;
    Vector mu_aug = stationary_distribution(induced_kernel(aug.derived, aug.lift(pi))).mass;
    double gap = 0.0;
    for (int h = 0; h < aug.clock_len; ++h)
      for (int s = 0; s < S; ++s)
        gap = std::max(gap, std::abs(mu_aug[aug.index(s, h)] - mu[s] / aug.clock_len));
    worst.observe(gap, 1e-10);
  }
  return worst.result("augmented-stationary",
                      "stationary(K~^pi) = [mu, ..., mu] / (H+1), entrywise", 0.0);
}

CheckResult check_augmented_contraction(int instances, uint64_t seed) {
  RngStream rng(seed, 113);
  WorstCase worst;
  for (int i = 0; i < instances; ++i) {
    const int S = 2 + static_cast<int>(rng.integer(4));
    const int A = 2 + static_cast<int>(rng.integer(3));
    const int extra = static_cast<int>(rng.integer(11));
    TabularMdp mdp = random_ergodic(S, A, rng.uniform(0.2, 1.0), 0.9, rng.integer(1u << 30));
    Policy pi = random_policy(rng, S, A);
    AugmentedMdp aug = augment(mdp, extra);
    const double base = contraction_factor(induced_kernel(mdp, pi));
    const double lifted = augmented_contraction_factor(aug, pi);
    worst.observe(lifted, base);
  }
  return worst.result("augmented-contraction",
                      "clock-aligned contraction factor of K~^pi <= factor of K^pi", 1e-12,
                      "factor measured over basis pairs sharing a clock value");
}

CheckResult check_exp3_slow_change(int runs, int64_t steps, int num_actions, double gamma,
                                   uint64_t seed) {
  const double eta = exp3_default_eta(num_actions, steps);
  const double range = 1.0 / (1.0 - gamma);
  WorstCase worst;
  std::vector<double> run_max(runs, 0.0);
  parallel_for(runs, 0, [&](int r) {
    RngStream rng(seed + r, 114);
    Exp3 learner(num_actions, eta, gamma);
    Vector prev = learner.distribution();
    double biggest = 0.0;
    for (int64_t t = 1; t <= steps; ++t) {
      Vector p = learner.act(t);
      const int a = rng.categorical(p);
      learner.observe_action(t, a);
      learner.feed(t, rng.uniform(0.0, range));
      Vector cur = learner.distribution();
      biggest = std::max(biggest, (cur - prev).cwiseAbs().sum());
      prev = std::move(cur);
    }
    run_max[r] = biggest;
  });
  for (double m : run_max) worst.observe(m, 2.0 * eta / num_actions + 1e-12);
  CheckResult out = worst.result("exp3-slow-change", "max_t ||p_{t+1} - p_t||_1 <= 2 eta / A", 0.0);
  out.trials = runs;
  return out;
}

CheckResult check_exp3_floor(int runs, int64_t steps, int num_actions, double gamma,
                             uint64_t seed) {
  const double eta = exp3_default_eta(num_actions, steps);
  const double range = 1.0 / (1.0 - gamma);
  double min_prob = kInf;
  for (int r = 0; r < runs; ++r) {
    RngStream rng(seed + r, 115);
    Exp3 learner(num_actions, eta, gamma);
    for (int64_t t = 1; t <= steps; ++t) {
      Vector p = learner.act(t);
      min_prob = std::min(min_prob, p.minCoeff());
      const int a = rng.categorical(p);
      learner.observe_action(t, a);
      learner.feed(t, rng.uniform(0.0, range));
    }
  }
  WorstCase worst;
  worst.observe(eta / num_actions, min_prob);
  CheckResult out = worst.result("exp3-floor", "p_t(a) >= eta / A for every action", 1e-15);
  out.trials = runs;
  return out;
}

CheckResult check_sticky_adversary(int64_t steps, uint64_t seed) {
  // Two actions, reward flips between phases; the learner may react only on
  // steps t = 1 mod period, all of which sit in the first phase.
  StickyRewardStream stream;
  const double eta = exp3_default_eta(2, steps / stream.period + 1);
  Exp3 learner(2, eta, 0.0);
  RngStream rng(seed, 116);
  double learner_reward = 0.0;
  double dynamic_best = 0.0;
  Vector p = learner.distribution();
  for (int64_t t = 1; t <= steps; ++t) {
    if (t % stream.period == 1) {
      p = learner.act(t);
      const int a = rng.categorical(p);
      learner.observe_action(t, a);
      learner.feed(t, stream.reward(t, a));
    }
    learner_reward += p[0] * stream.reward(t, 0) + p[1] * stream.reward(t, 1);
    dynamic_best += std::max(stream.reward(t, 0), stream.reward(t, 1));
  }
  const double regret_rate = (dynamic_best - learner_reward) / static_cast<double>(steps);
  CheckResult out;
  out.name = "sticky-adversary";
  out.statement = "abrupt reward flips defeat a sticky learner: per-step full-span regret stays bounded away from 0";
  out.lhs = 0.3;
  out.rhs = regret_rate;
  out.slack = out.rhs - out.lhs;
  out.trials = steps;
  out.verdict = regret_rate >= 0.3 ? Verdict::kDemonstrated : Verdict::kFail;
  out.note = "the learner only ever observes first-phase rewards";
  return out;
}

CheckResult check_hard_chain_hitting() {
  WorstCase worst;
  double previous = 0.0;
  std::ostringstream note;
  note << std::setprecision(4) << "ratios:";
  for (int n = 6; n <= 12; ++n) {
    TabularMdp mdp = hard_chain(n, hard_chain_default_reward(n), 0.9);
    Matrix kernel = induced_kernel(mdp, Policy::uniform(n, 3));
    const double hit = expected_hitting_times(kernel, n - 1)[0];
    if (n > 6) {
      const double ratio = hit / previous;
      note << ' ' << ratio;
      worst.observe(1.8, ratio);
      worst.observe(ratio, 2.2);
    }
    previous = hit;
  }
  return worst.result("hard-chain-hitting",
                      "expected first hits of the chain end double per extra state (ratio in [1.8, 2.2])",
                      0.0, note.str());
}

namespace {

struct RunBundle {
  std::vector<RunTrace> traces;
  std::vector<TraceAnalysis> analyses;
  double eta = 0.0;
};

RunBundle gather_runs(const TabularMdp& mdp, const VerifyConfig& cfg, int64_t steps, int seeds) {
  RunBundle bundle;
  bundle.eta = cfg.eta_override > 0.0 ? cfg.eta_override
                                      : exp3_default_eta(mdp.num_actions, steps);
  bundle.traces.resize(seeds);
  bundle.analyses.resize(seeds);
  const double gamma = mdp.gamma;
  const double eta = bundle.eta;
  const bool wrapper = cfg.wrapper;
  const int horizon = horizon_steps(gamma, steps);
  parallel_for(seeds, cfg.jobs, [&](int i) {
    RunOptions options;
    options.learner_kind = "exp3";
    options.eta = eta;
    options.delay = wrapper ? horizon : -1;
    const int num_actions = mdp.num_actions;
    LearnerFactory base = [num_actions, eta, gamma] {
      return std::make_unique<Exp3>(num_actions, eta, gamma);
    };
    LearnerFactory local = base;
    if (wrapper) local = [base, horizon] { return wrap_delay(base, horizon); };
    bundle.traces[i] = run_main(mdp, steps, local, cfg.seed + 1000 + i, options);
    bundle.analyses[i] = analyze_trace(bundle.traces[i], mdp, cfg.eval_tol);
  });
  return bundle;
}

void append_run_checks(std::vector<CheckResult>& out, const TabularMdp& mdp,
                       const VerifyConfig& cfg, const RunBundle& bundle, bool assumptions_ok,
                       double beta_hat, double tau_hat, const std::string& assumption_note) {
  const int S = mdp.num_states;
  const int A = mdp.num_actions;
  const double gamma = mdp.gamma;
  const int64_t T = cfg.run_steps;
  const int horizon = bundle.traces.front().horizon;

  auto unmet = [&](std::string name, std::string statement) {
    CheckResult c;
    c.name = std::move(name);
    c.statement = std::move(statement);
    c.verdict = Verdict::kAssumptionsUnmet;
    c.note = assumption_note;
    out.push_back(std::move(c));
  };

  // Regret decomposition and the observed/unobserved identity.
  {
    WorstCase decomposition, identity, local_sum;
    for (const TraceAnalysis& a : bundle.analyses) {
      const double local_total = a.local_regret_by_state.sum();
      decomposition.observe((1.0 - gamma) * a.global_total,
                            local_total + static_cast<double>(T) * cfg.eval_tol);
      identity.observe(std::abs(a.full_span - (a.observed + a.unobserved)), 1e-9);
      local_sum.observe(std::abs(a.full_span - local_total), 1e-9);
    }
    out.push_back(decomposition.result(
        "decomposition", "(1 - gamma) * global regret <= sum_s local regret + T * tol", 0.0));
    out.push_back(identity.result("split-identity", "full-span = observed + unobserved", 0.0));
    out.push_back(local_sum.result("full-span-sum", "full-span = sum_s local regret", 0.0));
  }

  // Slot-expanded slow change; with EXP3 bases each update obeys 2 eta / A.
  {
    WorstCase change, rows;
    for (const RunTrace& trace : bundle.traces) {
      double biggest = 0.0;
      int worst_rows = 0;
      for (double c : trace.slot_change) biggest = std::max(biggest, c);
      for (int r : trace.slot_rows_changed) worst_rows = std::max(worst_rows, r);
      change.observe(biggest, 2.0 * bundle.eta / A + 1e-12);
      rows.observe(worst_rows, 1.0);
    }
    out.push_back(change.result("main-slow-change",
                                "per-step change of the slot-expanded policy <= 2 eta / A", 0.0));
    out.push_back(rows.result("single-update",
                              "at most one learner row changes per step", 0.0));
  }

  // Objective mismatch: exact frozen-sequence returns vs Q_t.
  {
    WorstCase worst;
    RngStream rng(cfg.seed, 117);
    for (size_t i = 0; i < bundle.analyses.size(); ++i) {
      const TraceAnalysis& a = bundle.analyses[i];
      const RunTrace& trace = bundle.traces[i];
      const double c_hat = a.c_hat;
      const double rhs_fixed = static_cast<double>(horizon) * (S + static_cast<double>(horizon) * A) /
                                   (1.0 - gamma) * c_hat +
                               1.0 / std::sqrt(static_cast<double>(T));
      for (int probe = 0; probe < cfg.probes_per_run; ++probe) {
        const int64_t t = 1 + static_cast<int64_t>(rng.integer(T - horizon));
        const int s = static_cast<int>(rng.integer(S));
        const int act = static_cast<int>(rng.integer(A));
        FrozenSchedule schedule = frozen_schedule(trace, t, horizon + 1);
        const double ubar = ubar_exact(mdp, schedule, s, act);
        const double q = a.q_tables[static_cast<size_t>(t - 1)](s, act);
        worst.observe(std::abs(ubar - q), rhs_fixed);
      }
    }
    out.push_back(worst.result(
        "objective-mismatch", "|Ubar_t(s,a) - Q_t(s,a)| <= H (S + H A) c / (1 - gamma) + 1/sqrt(T)",
        0.0));
  }

  // Q drift between sampled snapshot pairs.
  {
    WorstCase worst;
    RngStream rng(cfg.seed, 118);
    for (size_t i = 0; i < bundle.analyses.size(); ++i) {
      const TraceAnalysis& a = bundle.analyses[i];
      for (int probe = 0; probe < cfg.probes_per_run; ++probe) {
        const int64_t t = 1 + static_cast<int64_t>(rng.integer(T - 1));
        const int64_t n = 1 + static_cast<int64_t>(rng.integer(T - t));
        const double lhs =
            (a.q_tables[static_cast<size_t>(t + n - 1)] - a.q_tables[static_cast<size_t>(t - 1)])
                .cwiseAbs()
                .maxCoeff();
        const double rhs = (S + static_cast<double>(horizon) * A) * static_cast<double>(n) *
                               a.c_hat / (1.0 - gamma) +
                           2.0 / std::sqrt(static_cast<double>(T));
        worst.observe(lhs, rhs);
      }
    }
    out.push_back(worst.result("q-drift",
                               "|Q_{t+n} - Q_t| <= (S + H A) n c / (1 - gamma) + 2/sqrt(T)", 0.0));
  }

  if (!assumptions_ok) {
    unmet("distribution-tracking", "||nu_t - mu_t||_1 <= tau (tau+1) c + 2 exp(-(t-1)/tau)");
    unmet("observed-surrogate-gap", "|ob - ob~| <= sum_t ||nu_t - mu_t||_1 / (1 - gamma)");
    unmet("sticky-moments-mean", "seed-averaged E[X_{i+1} - X_i] <= 1/beta + 2 SE");
    unmet("sticky-moments-square", "seed-averaged E[(X_{i+1} - X_i)^2] <= 2/beta^3 + 2 SE");
    unmet("full-span-bound", "un~ <= ob~/beta + 2 (S + H A) c T / (beta^3 (1 - gamma)) + 4 S sqrt(T)");
    return;
  }

  // nu-mu tracking with measured constants.
  {
    WorstCase worst;
    for (const TraceAnalysis& a : bundle.analyses) {
      TrackingReport tracking = nu_mu_tracking(a, tau_hat, a.c_hat);
      size_t worst_t = 0;
      double min_slack = kInf;
      for (size_t k = 0; k < tracking.gap.size(); ++k) {
        if (tracking.bound[k] - tracking.gap[k] < min_slack) {
          min_slack = tracking.bound[k] - tracking.gap[k];
          worst_t = k;
        }
      }
      worst.observe(tracking.gap[worst_t], tracking.bound[worst_t]);
    }
    CheckResult c = worst.result(
        "distribution-tracking", "||nu_t - mu_t||_1 <= tau (tau+1) c + 2 exp(-(t-1)/tau)", 0.0,
        "tau_hat from sampled policies can understate the true mixing time, which only tightens "
        "this check");
    c.trials = static_cast<int64_t>(bundle.analyses.size()) * T;
    out.push_back(std::move(c));
  }

  // Observed regret vs its stationary surrogate.
  {
    WorstCase worst;
    for (const TraceAnalysis& a : bundle.analyses) {
      double budget = 0.0;
      for (double g : a.nu_mu_gap) budget += g;
      worst.observe(std::abs(a.observed - a.observed_surrogate), budget / (1.0 - gamma));
    }
    out.push_back(worst.result("observed-surrogate-gap",
                               "|ob - ob~| <= sum_t ||nu_t - mu_t||_1 / (1 - gamma)", 1e-9));
  }

  // Sticky-bandit inter-visit moments, seed-averaged per state.
  {
    WorstCase mean_worst, sq_worst;
    bool enough_visits = true;
    for (int s = 0; s < S && enough_visits; ++s) {
      double mean_sum = 0.0, sq_sum = 0.0, mean_se_sq = 0.0, sq_se_sq = 0.0;
      int counted = 0;
      for (const RunTrace& trace : bundle.traces) {
        try {
          StickyStats stats = sticky_stats(trace, s, beta_hat);
          mean_sum += stats.mean_gap;
          sq_sum += stats.mean_sq_gap;
          mean_se_sq += stats.se_gap * stats.se_gap;
          sq_se_sq += stats.se_sq_gap * stats.se_sq_gap;
          ++counted;
        } catch (const std::invalid_argument&) {
          enough_visits = false;
          break;
        }
      }
      if (!enough_visits || counted == 0) break;
      const double n = static_cast<double>(counted);
      mean_worst.observe(mean_sum / n, 1.0 / beta_hat + 2.0 * std::sqrt(mean_se_sq) / n);
      sq_worst.observe(sq_sum / n, 2.0 / (beta_hat * beta_hat * beta_hat) +
                                       2.0 * std::sqrt(sq_se_sq) / n);
    }
    if (enough_visits) {
      const std::string bias_note =
          "beta_hat can only overstate beta, which only tightens this check";
      out.push_back(mean_worst.result("sticky-moments-mean",
                                      "seed-averaged E[X_{i+1} - X_i] <= 1/beta + 2 SE", 0.0,
                                      bias_note));
      out.push_back(sq_worst.result("sticky-moments-square",
                                    "seed-averaged E[(X_{i+1} - X_i)^2] <= 2/beta^3 + 2 SE", 0.0,
                                    bias_note));
    } else {
      unmet("sticky-moments-mean", "seed-averaged E[X_{i+1} - X_i] <= 1/beta + 2 SE");
      unmet("sticky-moments-square", "seed-averaged E[(X_{i+1} - X_i)^2] <= 2/beta^3 + 2 SE");
    }
  }

  out.push_back(from_bound(full_span_check(bundle.analyses, mdp, horizon, beta_hat)));
}

}  // namespace

VerifyReport verify_suite(const VerifyConfig& config) {
  VerifyReport report;
  auto wanted = [&](const char* name) {
    return config.only.empty() || std::string(name).find(config.only) != std::string::npos;
  };

  if (wanted("norm-1inf")) report.checks.push_back(check_norm_properties(config.trials, config.seed));
  if (wanted("multi-step-change"))
    report.checks.push_back(check_multi_step_change(config.trials, config.seed));
  if (wanted("kernel-policy-shift"))
    report.checks.push_back(check_kernel_policy_shift(config.trials, config.seed));
  if (wanted("kernel-contraction"))
    report.checks.push_back(check_kernel_contraction(config.trials, config.seed));
  if (wanted("kernel-joint-step"))
    report.checks.push_back(check_kernel_joint_step(config.trials, config.seed));
  if (wanted("kernel-product-error"))
    report.checks.push_back(check_kernel_product_error(config.trials, config.seed));
  if (wanted("kernel-product-lag"))
    report.checks.push_back(check_kernel_product_lag(config.trials, config.seed));
  if (wanted("kernel-product-freeze"))
    report.checks.push_back(check_kernel_product_freeze(config.trials, config.seed));
  if (wanted("kernel-product-window"))
    report.checks.push_back(check_kernel_product_window(config.trials, config.seed));
  if (wanted("performance-difference"))
    report.checks.push_back(check_performance_difference(config.pdl_instances, config.seed));
  if (wanted("horizon-tail")) report.checks.push_back(check_horizon_tail());
  if (wanted("finite-horizon-gap"))
    report.checks.push_back(check_finite_horizon_gap(std::min(config.trials, 200), config.seed));
  if (wanted("augmented-stationary"))
    report.checks.push_back(check_augmented_stationary(config.augmented_instances, config.seed));
  if (wanted("augmented-contraction"))
    report.checks.push_back(check_augmented_contraction(config.augmented_instances, config.seed));
  if (wanted("exp3-slow-change"))
    report.checks.push_back(
        check_exp3_slow_change(config.exp3_runs, config.exp3_steps, 3, 0.9, config.seed));
  if (wanted("exp3-floor"))
    report.checks.push_back(
        check_exp3_floor(std::min(config.exp3_runs, 10), config.exp3_steps, 3, 0.9, config.seed));
  if (wanted("sticky-adversary"))
    report.checks.push_back(check_sticky_adversary(5000, config.seed));
  if (wanted("hard-chain-hitting")) report.checks.push_back(check_hard_chain_hitting());

  const bool need_runs =
      wanted("decomposition") || wanted("split-identity") || wanted("full-span-sum") ||
      wanted("main-slow-change") || wanted("single-update") || wanted("objective-mismatch") ||
      wanted("q-drift") || wanted("distribution-tracking") || wanted("observed-surrogate-gap") ||
      wanted("sticky-moments-mean") || wanted("sticky-moments-square") ||
      wanted("full-span-bound");

  if (need_runs || wanted("assumption-estimates")) {
    TabularMdp mdp = config.env.build();
    bool assumptions_ok = true;
    std::string assumption_note;
    double beta_hat = 0.0, tau_hat = 1.0;
    try {
      BetaEstimate beta = estimate_beta(mdp, 256, config.seed);
      MixingEstimate mix = estimate_mixing(mdp, 256, config.seed);
      beta_hat = beta.beta_hat;
      tau_hat = mix.tau_hat;
      if (beta_hat < 1e-9) {
        assumptions_ok = false;
        assumption_note = "stationary mass not bounded away from zero (beta_hat = " +
                          std::to_string(beta_hat) + ")";
      }
    } catch (const AssumptionViolation& e) {
      assumptions_ok = false;
      assumption_note = e.what();
    }

    if (wanted("assumption-estimates")) {
      CheckResult c;
      c.name = "assumption-estimates";
      c.statement = "estimated stationary floor and one-step contraction for the environment";
      c.lhs = beta_hat;
      c.rhs = tau_hat;
      c.slack = 0.0;
      c.trials = 1;
      c.verdict = assumptions_ok ? Verdict::kPass : Verdict::kAssumptionsUnmet;
      c.note = assumptions_ok
                   ? "beta_hat = " + std::to_string(beta_hat) + ", tau_hat = " + std::to_string(tau_hat) +
                         " (estimates from sampled policies; beta_hat can only overestimate beta)"
                   : assumption_note;
      report.checks.push_back(std::move(c));
    }

    if (need_runs) {
      RunBundle bundle = gather_runs(mdp, config, config.run_steps, config.run_seeds);
      std::vector<CheckResult> run_checks;
      append_run_checks(run_checks, mdp, config, bundle, assumptions_ok, beta_hat, tau_hat,
                        assumption_note);
      for (CheckResult& c : run_checks)
        if (wanted(c.name.c_str())) report.checks.push_back(std::move(c));
    }
  }

  if (config.include_scaling && wanted("scaling-ratio")) {
    TabularMdp mdp = config.env.build();
    bool assumptions_ok = true;
    std::string note;
    try {
      estimate_mixing(mdp, 64, config.seed);
    } catch (const AssumptionViolation& e) {
      assumptions_ok = false;
      note = e.what();
    }
    if (!assumptions_ok) {
      CheckResult c;
      c.name = "scaling-ratio";
      c.statement = "seed-averaged regret(4T) / regret(T) <= 3";
      c.verdict = Verdict::kAssumptionsUnmet;
      c.note = note;
      report.checks.push_back(std::move(c));
    } else {
      VerifyConfig scaling_cfg = config;
      scaling_cfg.wrapper = config.scaling_wrapper;
      scaling_cfg.eta_override = config.scaling_eta;
      const std::vector<int64_t> lengths{2000, 8000, 32000};
      std::vector<double> mean_regret(lengths.size(), 0.0);
      for (size_t li = 0; li < lengths.size(); ++li) {
        RunBundle bundle = gather_runs(mdp, scaling_cfg, lengths[li], config.run_seeds);
        for (const TraceAnalysis& a : bundle.analyses) mean_regret[li] += a.global_total;
        mean_regret[li] /= static_cast<double>(bundle.analyses.size());
      }
      WorstCase worst;
      std::ostringstream detail;
      detail << std::setprecision(4)
             << (config.scaling_wrapper ? "delay-wrapped local" : "plain local") << ", eta "
             << (config.scaling_eta > 0.0 ? config.scaling_eta : 0.0) << "; mean regret:";
      for (size_t li = 0; li < lengths.size(); ++li) detail << ' ' << mean_regret[li];
      detail << "; ratios:";
      for (size_t li = 0; li + 1 < lengths.size(); ++li) {
        const double ratio = mean_regret[li + 1] / mean_regret[li];
        detail << ' ' << ratio;
        worst.observe(ratio, 3.0);
      }
      CheckResult c = worst.result("scaling-ratio",
                                   "seed-averaged regret(4T) / regret(T) <= 3 for T in {2000, 8000}",
                                   0.0, detail.str());
      c.trials = config.run_seeds;
      report.checks.push_back(std::move(c));
    }
  }

  for (const CheckResult& c : report.checks)
    if (c.verdict == Verdict::kFail) report.hard_failure = true;
  return report;
}

std::string VerifyReport::to_text() const {
  std::ostringstream os;
  os << "verify-report v1\n";
  for (const CheckResult& c : checks) {
    os << "check " << c.name << '\n';
    os << "  statement " << c.statement << '\n';
    os << "  lhs " << c.lhs << '\n';
    os << "  rhs " << c.rhs << '\n';
    os << "  slack " << c.slack << '\n';
    os << "  trials " << c.trials << '\n';
    os << "  verdict " << verdict_name(c.verdict) << '\n';
    if (!c.note.empty()) os << "  note " << c.note << '\n';
  }
  return os.str();
}

std::string VerifyReport::summary_table() const {
  std::ostringstream os;
  os << std::left << std::setw(26) << "check" << std::right << std::setw(14) << "lhs"
     << std::setw(14) << "rhs" << std::setw(14) << "slack" << std::setw(10) << "trials"
     << "  verdict\n";
  for (const CheckResult& c : checks) {
    os << std::left << std::setw(26) << c.name << std::right << std::setprecision(5)
       << std::setw(14) << c.lhs << std::setw(14) << c.rhs << std::setw(14) << c.slack
       << std::setw(10) << c.trials << "  " << verdict_name(c.verdict) << '\n';
  }
  return os.str();
}

}  // namespace mdplab
