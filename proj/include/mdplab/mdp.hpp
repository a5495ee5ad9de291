#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "mdplab/types.hpp"

namespace mdplab {

enum class RewardKind { kDeterministic, kBernoulli };

// Finite MDP with a dense transition tensor and a mean-reward table.
// Transitions are stored per action: transitions[a](s, s') = P(s' | s, a).
struct TabularMdp {
  int num_states = 0;
  int num_actions = 0;
  std::vector<Matrix> transitions;  // one S x S row-stochastic matrix per action
  Matrix mean_rewards;              // S x A, entries in [0, 1]
  RewardKind reward_kind = RewardKind::kDeterministic;
  double gamma = 0.0;

  double transition(int s, int a, int s2) const { return transitions[a](s, s2); }
  double reward(int s, int a) const { return mean_rewards(s, a); }

  // Throws std::invalid_argument if any invariant fails.
  void validate() const;
};

// Row-stochastic S x A matrix, probs(s, a) = pi(a | s).
struct Policy {
  Matrix probs;

  int num_states() const { return static_cast<int>(probs.rows()); }
  int num_actions() const { return static_cast<int>(probs.cols()); }
  Vector row(int s) const { return probs.row(s).transpose(); }

  static Policy uniform(int num_states, int num_actions);
  static Policy deterministic(const std::vector<int>& actions, int num_actions);

  void validate() const;
};

using PolicySchedule = std::vector<Policy>;

// Probability vector over states.
struct StateDistribution {
  Vector mass;

  static StateDistribution point_mass(int num_states, int state);
  void validate(double tol = kDerivedTol) const;
};

// V and Q tables for one policy, together with the achieved solve tolerance.
struct ValueTables {
  Vector v;  // length S
  Matrix q;  // S x A
  double residual = 0.0;
};

struct OptimalPolicyResult {
  Policy policy;
  ValueTables values;
};

struct BetaEstimate {
  double beta_hat = 0.0;
  Policy argmin_policy;
  int argmin_state = -1;
  int num_policies = 0;
  bool exhaustive = false;  // true when all deterministic policies were enumerated
};

struct MixingEstimate {
  double tau_hat = 1.0;
  double worst_factor = 0.0;  // largest one-step L1 contraction factor seen
  int num_policies = 0;
  bool exhaustive = false;
};

// Base MDP crossed with a cyclic clock of length clock_len.
// Augmented state index = h * S + s for h in [0, clock_len).
struct AugmentedMdp {
  TabularMdp base;
  int clock_len = 1;
  TabularMdp derived;

  int index(int state, int clock) const { return clock * base.num_states + state; }
  int state_of(int idx) const { return idx % base.num_states; }
  int clock_of(int idx) const { return idx / base.num_states; }

  // pi_tilde(a | s∘h) = pi(a | s).
  Policy lift(const Policy& pi) const;
};

// K(s, s') = sum_a pi(a|s) P(s'|s, a). Rows stochastic within kDerivedTol.
Matrix induced_kernel(const TabularMdp& mdp, const Policy& pi);

// Fixed point of the Bellman expectation operator, iterated from warm_start
// (zeros when null) until the value is within tol of V^pi in sup norm.
ValueTables policy_evaluation(const TabularMdp& mdp, const Policy& pi, double tol,
                              const Vector* warm_start = nullptr);

// Exact H-step truncated action values by backward recursion.
Matrix finite_horizon_q(const TabularMdp& mdp, const Policy& pi, int horizon);

// Value iteration run far enough that the greedy policy's value is within tol
// of optimal; ties broken toward the lowest action index. The returned tables
// are the greedy policy's own evaluation.
OptimalPolicyResult optimal_policy(const TabularMdp& mdp, double tol);

// Solves mu K = mu, sum(mu) = 1 by direct linear solve. Throws NotErgodicError
// when the stationary distribution is not unique.
StateDistribution stationary_distribution(const Matrix& kernel, double tol = kDerivedTol);

// Dobrushin coefficient: max over basis pairs of ||(e_i - e_j) K||_1 / 2.
double contraction_factor(const Matrix& kernel);

// Contraction factor of the augmented kernel measured over basis pairs that
// share a clock value (the differences realizable by the augmented chain).
double augmented_contraction_factor(const AugmentedMdp& aug, const Policy& base_pi);

// min over sampled policies and states of mu^pi(s). Enumerates all A^S
// deterministic policies when feasible, otherwise samples policy_samples
// random corners and Dirichlet mixtures. Throws AssumptionViolation when a
// sampled policy has no unique stationary distribution.
BetaEstimate estimate_beta(const TabularMdp& mdp, int policy_samples, uint64_t seed,
                           int exhaustive_cap = 4096);

// Worst one-step contraction factor over sampled policies; tau_hat =
// -1 / ln(factor), floored at 1. Throws AssumptionViolation when some factor
// reaches 1 (one-step contraction fails).
MixingEstimate estimate_mixing(const TabularMdp& mdp, int policy_samples, uint64_t seed,
                               int exhaustive_cap = 4096);

// Exact plug-in propagation nu_{t+1} = nu_t K^{pi_t}; returns nu_1..nu_T for a
// schedule of length T.
std::vector<StateDistribution> rollforward(const StateDistribution& nu1,
                                           std::span<const Policy> schedule,
                                           const TabularMdp& mdp);

// Normalized discounted occupancy measure d(s) = (1-gamma) sum_t gamma^t
// Pr(S_t = s | pi, S_0 = s0), via the direct solve d = (1-gamma) e_{s0} + gamma d K.
StateDistribution discounted_occupancy(const TabularMdp& mdp, const Policy& pi, int start_state);

// Expected first-hitting times of `target` from every state under `kernel`
// (absorbing-chain linear solve). h(target) = 0.
Vector expected_hitting_times(const Matrix& kernel, int target);

AugmentedMdp augment(const TabularMdp& mdp, int extra_clock, int max_states = 1 << 20);

// All A^S deterministic policies in mixed-radix order. Throws when the count
// exceeds `cap`.
std::vector<Policy> enumerate_deterministic_policies(int num_states, int num_actions, int cap);

}  // namespace mdplab
