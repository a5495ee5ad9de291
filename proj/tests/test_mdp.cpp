#include <cmath>

#include "doctest.h"
#include "mdplab/envs.hpp"
#include "mdplab/mdp.hpp"
#include "mdplab/rng.hpp"

using namespace mdplab;

namespace {

// Two states, deterministic cycle 0 -> 1 -> 0, rewards (1, 0), one action.
TabularMdp cycle_mdp(double gamma) { return cycle_chain(2, gamma); }

TabularMdp single_state(int num_actions, std::vector<double> rewards, double gamma) {
  TabularMdp mdp;
  mdp.num_states = 1;
  mdp.num_actions = num_actions;
  mdp.gamma = gamma;
  mdp.transitions.assign(num_actions, Matrix::Ones(1, 1));
  mdp.mean_rewards = Matrix(1, num_actions);
  for (int a = 0; a < num_actions; ++a) mdp.mean_rewards(0, a) = rewards[a];
  mdp.validate();
  return mdp;
}

// Long-run distribution by iterating the lazy kernel (I + K)/2; independent of
// the direct solve used by the library.
Vector power_iteration_stationary(const Matrix& kernel, int iterations = 200000) {
  const int S = static_cast<int>(kernel.rows());
  Matrix lazy = 0.5 * (Matrix::Identity(S, S) + kernel);
  Vector mu = Vector::Constant(S, 1.0 / S);
  for (int i = 0; i < iterations; ++i) mu = (mu.transpose() * lazy).transpose();
  return mu;
}

}  // namespace

TEST_CASE("induced kernel: uniform policy over uniform transitions is uniform") {
  TabularMdp mdp = random_ergodic(3, 2, 1.0, 0.9, 5);
  Matrix k = induced_kernel(mdp, Policy::uniform(3, 2));
  CHECK(one_inf_norm(k - Matrix::Constant(3, 3, 1.0 / 3)) < 1e-12);
}

TEST_CASE("induced kernel: deterministic policy selects transition rows") {
  TabularMdp mdp = random_ergodic(4, 3, 0.3, 0.9, 11);
  Policy pi = Policy::deterministic({2, 0, 1, 2}, 3);
  Matrix k = induced_kernel(mdp, pi);
  CHECK((k.row(0) - mdp.transitions[2].row(0)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((k.row(1) - mdp.transitions[0].row(1)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((k.row(3) - mdp.transitions[2].row(3)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("induced kernel: 50/50 policy averages the two action rows") {
  TabularMdp mdp = random_ergodic(2, 2, 0.5, 0.9, 3);
  Policy pi = Policy::uniform(2, 2);
  Matrix k = induced_kernel(mdp, pi);
  // hand product: K = 0.5 P_0 + 0.5 P_1
  Matrix expected = 0.5 * mdp.transitions[0] + 0.5 * mdp.transitions[1];
  CHECK(one_inf_norm(k - expected) < 1e-15);
  CHECK_THROWS_AS(induced_kernel(mdp, Policy::uniform(3, 2)), std::invalid_argument);
}

TEST_CASE("policy evaluation: single state geometric series") {
  TabularMdp mdp = single_state(1, {1.0}, 0.8);
  ValueTables vt = policy_evaluation(mdp, Policy::uniform(1, 1), 1e-12);
  CHECK(vt.v[0] == doctest::Approx(5.0).epsilon(1e-10));
}

TEST_CASE("policy evaluation: all rewards zero") {
  TabularMdp mdp = random_ergodic(3, 2, 0.4, 0.9, 7);
  mdp.mean_rewards.setZero();
  ValueTables vt = policy_evaluation(mdp, Policy::uniform(3, 2), 1e-12);
  CHECK(vt.v.cwiseAbs().maxCoeff() < 1e-11);
  CHECK(vt.q.cwiseAbs().maxCoeff() < 1e-11);
}

TEST_CASE("policy evaluation: two-state cycle solved by hand") {
  // V(0) = 1 + g V(1), V(1) = g V(0)  =>  V(0) = 1/(1 - g^2), V(1) = g/(1 - g^2)
  TabularMdp mdp = cycle_mdp(0.5);
  ValueTables vt = policy_evaluation(mdp, Policy::uniform(2, 1), 1e-12);
  CHECK(vt.v[0] == doctest::Approx(4.0 / 3).epsilon(1e-10));
  CHECK(vt.v[1] == doctest::Approx(2.0 / 3).epsilon(1e-10));
  // V = sum_a pi Q holds exactly by construction
  CHECK(vt.v[0] == vt.q(0, 0));
}

TEST_CASE("policy evaluation: warm start converges to the same fixed point") {
  TabularMdp mdp = random_ergodic(4, 3, 0.3, 0.9, 13);
  Policy pi = Policy::uniform(4, 3);
  ValueTables cold = policy_evaluation(mdp, pi, 1e-12);
  Vector warm_seed = cold.v.array() + 0.37;
  ValueTables warm = policy_evaluation(mdp, pi, 1e-12, &warm_seed);
  CHECK((cold.v - warm.v).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("policy evaluation agrees with a direct linear solve") {
  // independent route: V = (I - gamma K)^{-1} r_pi, then Q = r + gamma P V
  RngStream rng(4242, 1);
  for (int trial = 0; trial < 25; ++trial) {
    const int S = 2 + static_cast<int>(rng.integer(5));
    const int A = 2 + static_cast<int>(rng.integer(3));
    TabularMdp mdp = random_ergodic(S, A, rng.uniform(0.1, 1.0), rng.uniform(0.2, 0.95),
                                    1000 + trial);
    Policy pi;
    pi.probs = Matrix(S, A);
    for (int s = 0; s < S; ++s) pi.probs.row(s) = rng.simplex(A).transpose();

    Matrix kernel = induced_kernel(mdp, pi);
    Vector r_pi = (pi.probs.array() * mdp.mean_rewards.array()).rowwise().sum();
    Matrix system = Matrix::Identity(S, S) - mdp.gamma * kernel;
    Vector v_direct = system.partialPivLu().solve(r_pi);

    ValueTables vt = policy_evaluation(mdp, pi, 1e-12);
    CHECK((vt.v - v_direct).cwiseAbs().maxCoeff() < 1e-9);
    for (int s = 0; s < S; ++s)
      for (int a = 0; a < A; ++a) {
        const double q_direct =
            mdp.mean_rewards(s, a) + mdp.gamma * mdp.transitions[a].row(s).dot(v_direct);
        CHECK(vt.q(s, a) == doctest::Approx(q_direct).epsilon(1e-9));
      }
  }
}

TEST_CASE("discounted occupancy agrees with truncated forward simulation") {
  // independent route: partial sums of (1 - gamma) gamma^t e_s0 K^t
  RngStream rng(555, 2);
  for (int trial = 0; trial < 10; ++trial) {
    TabularMdp mdp = random_ergodic(4, 2, 0.4, 0.8, 2000 + trial);
    Policy pi;
    pi.probs = Matrix(4, 2);
    for (int s = 0; s < 4; ++s) pi.probs.row(s) = rng.simplex(2).transpose();
    const int s0 = static_cast<int>(rng.integer(4));
    Matrix kernel = induced_kernel(mdp, pi);
    Vector probe = Vector::Zero(4);
    probe[s0] = 1.0;
    Vector acc = Vector::Zero(4);
    double factor = 1.0 - mdp.gamma;
    for (int t = 0; t < 400; ++t) {
      acc += factor * probe;
      probe = (probe.transpose() * kernel).transpose();
      factor *= mdp.gamma;
    }
    Vector d = discounted_occupancy(mdp, pi, s0).mass;
    CHECK((d - acc).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("finite horizon q: zero lookahead returns the reward table") {
  TabularMdp mdp = random_ergodic(3, 2, 0.3, 0.9, 17);
  Matrix q0 = finite_horizon_q(mdp, Policy::uniform(3, 2), 0);
  CHECK(one_inf_norm(q0 - mdp.mean_rewards) == 0.0);
}

TEST_CASE("finite horizon q: converges to Q with the geometric tail") {
  TabularMdp mdp = random_ergodic(3, 2, 0.3, 0.9, 19);
  Policy pi = Policy::uniform(3, 2);
  ValueTables vt = policy_evaluation(mdp, pi, 1e-13);
  for (int h : {5, 20, 60}) {
    Matrix qh = finite_horizon_q(mdp, pi, h);
    const double tail = std::pow(mdp.gamma, h + 1) / (1.0 - mdp.gamma);
    CHECK((qh - vt.q).cwiseAbs().maxCoeff() <= tail + 1e-10);
  }
}

TEST_CASE("finite horizon q: one-step unroll on the cycle") {
  TabularMdp mdp = cycle_mdp(0.5);
  Matrix q1 = finite_horizon_q(mdp, Policy::uniform(2, 1), 1);
  CHECK(q1(0, 0) == doctest::Approx(1.0));       // 1 + 0.5 * 0
  CHECK(q1(1, 0) == doctest::Approx(0.5));       // 0 + 0.5 * 1
}

TEST_CASE("optimal policy: single state picks the best arm") {
  TabularMdp mdp = single_state(2, {1.0, 0.0}, 0.8);
  OptimalPolicyResult opt = optimal_policy(mdp, 1e-10);
  CHECK(opt.policy.probs(0, 0) == 1.0);
  CHECK(opt.values.v[0] == doctest::Approx(5.0).epsilon(1e-8));
}

TEST_CASE("optimal policy: ties break to the lowest action index") {
  TabularMdp mdp = random_ergodic(3, 1, 0.5, 0.9, 23);
  TabularMdp padded = mdp;
  padded.num_actions = 3;
  padded.transitions.assign(3, mdp.transitions[0]);
  padded.mean_rewards = Matrix(3, 3);
  for (int a = 0; a < 3; ++a) padded.mean_rewards.col(a) = mdp.mean_rewards.col(0);
  OptimalPolicyResult opt = optimal_policy(padded, 1e-10);
  for (int s = 0; s < 3; ++s) CHECK(opt.policy.probs(s, 0) == 1.0);
}

TEST_CASE("optimal policy: brute force over all deterministic policies agrees") {
  // Exhaustive evaluation is the oracle; the chain rewards going right even
  // though two of three arms pay immediately for going left.
  for (int n : {3, 4, 5}) {
    TabularMdp mdp = hard_chain(n, std::pow(2.0, n), 0.9);
    OptimalPolicyResult opt = optimal_policy(mdp, 1e-9);
    double best = -1.0;
    Policy best_pi;
    for (const Policy& pi : enumerate_deterministic_policies(n, 3, 4096)) {
      double v0 = policy_evaluation(mdp, pi, 1e-10).v[0];
      if (v0 > best) {
        best = v0;
        best_pi = pi;
      }
    }
    CHECK(opt.values.v[0] == doctest::Approx(best).epsilon(1e-7));
    for (int s = 1; s < n - 1; ++s) {
      CHECK(opt.policy.probs(s, 2) == 1.0);
      CHECK(best_pi.probs(s, 2) == 1.0);
    }
  }
}

TEST_CASE("stationary distribution: one-step mixing kernel") {
  Matrix k(3, 3);
  k << 0.2, 0.5, 0.3, 0.2, 0.5, 0.3, 0.2, 0.5, 0.3;
  Vector mu = stationary_distribution(k).mass;
  CHECK((mu - k.row(0).transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("stationary distribution: hand-solved balance equation") {
  Matrix k(2, 2);
  k << 0.9, 0.1, 0.5, 0.5;
  Vector mu = stationary_distribution(k).mass;
  CHECK(mu[0] == doctest::Approx(5.0 / 6).epsilon(1e-12));
  CHECK(mu[1] == doctest::Approx(1.0 / 6).epsilon(1e-12));
}

TEST_CASE("stationary distribution: identity kernel is not ergodic") {
  CHECK_THROWS_AS(stationary_distribution(Matrix::Identity(3, 3)), NotErgodicError);
}

TEST_CASE("stationary distribution: periodic two-cycle still solves") {
  Matrix k(2, 2);
  k << 0.0, 1.0, 1.0, 0.0;
  Vector mu = stationary_distribution(k).mass;
  CHECK(mu[0] == doctest::Approx(0.5));
}

TEST_CASE("stationary distribution: agrees with lazy power iteration") {
  RngStream rng(99, 1);
  for (int trial = 0; trial < 5; ++trial) {
    TabularMdp mdp = random_ergodic(4, 2, 0.3, 0.9, 100 + trial);
    Matrix k = induced_kernel(mdp, Policy::uniform(4, 2));
    Vector direct = stationary_distribution(k).mass;
    Vector iterated = power_iteration_stationary(k, 5000);
    CHECK((direct - iterated).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("estimate beta: single state") {
  TabularMdp mdp = single_state(2, {0.3, 0.7}, 0.5);
  BetaEstimate est = estimate_beta(mdp, 16, 1);
  CHECK(est.beta_hat == doctest::Approx(1.0));
  CHECK(est.exhaustive);
}

TEST_CASE("estimate beta: lazy uniform two-state chain") {
  TabularMdp mdp;
  mdp.num_states = 2;
  mdp.num_actions = 2;
  mdp.gamma = 0.5;
  mdp.transitions.assign(2, Matrix::Constant(2, 2, 0.5));
  mdp.mean_rewards = Matrix::Constant(2, 2, 0.5);
  mdp.validate();
  BetaEstimate est = estimate_beta(mdp, 16, 1);
  CHECK(est.beta_hat == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("estimate beta: exhaustive enumeration respects the mixing floor") {
  TabularMdp mdp = random_ergodic(3, 2, 0.2, 0.9, 41);
  BetaEstimate est = estimate_beta(mdp, 64, 2);
  CHECK(est.exhaustive);
  CHECK(est.num_policies == 8);
  CHECK(est.beta_hat >= 0.2 / 3 - 1e-12);
  // brute-force oracle: recompute the minimum via power iteration
  double oracle = 1.0;
  for (const Policy& pi : enumerate_deterministic_policies(3, 2, 64)) {
    Vector mu = power_iteration_stationary(induced_kernel(mdp, pi), 20000);
    oracle = std::min(oracle, mu.minCoeff());
  }
  CHECK(est.beta_hat == doctest::Approx(oracle).epsilon(1e-6));
}

TEST_CASE("estimators fall back to sampled policies when enumeration is too big") {
  // A^S = 2^13 = 8192 exceeds the default cap of 4096
  TabularMdp mdp = random_ergodic(13, 2, 0.5, 0.9, 37);
  BetaEstimate beta = estimate_beta(mdp, 40, 5);
  CHECK_FALSE(beta.exhaustive);
  CHECK(beta.num_policies == 40);
  CHECK(beta.beta_hat >= 0.5 / 13 - 1e-12);
  CHECK(beta.beta_hat < 1.0);
  MixingEstimate mix = estimate_mixing(mdp, 40, 5);
  CHECK_FALSE(mix.exhaustive);
  CHECK(mix.worst_factor <= 0.5 + 1e-12);
  // the same seed draws the same policy sample
  CHECK(estimate_beta(mdp, 40, 5).beta_hat == beta.beta_hat);
}

TEST_CASE("estimate beta: non-ergodic policy raises an assumption violation") {
  TabularMdp mdp;
  mdp.num_states = 2;
  mdp.num_actions = 2;
  mdp.gamma = 0.5;
  mdp.transitions.assign(2, Matrix::Identity(2, 2));  // every policy freezes the state
  mdp.mean_rewards = Matrix::Constant(2, 2, 0.5);
  mdp.validate();
  CHECK_THROWS_AS(estimate_beta(mdp, 8, 1), AssumptionViolation);
}

TEST_CASE("estimate mixing: one-step mixing kernel floors tau at 1") {
  TabularMdp mdp = random_ergodic(3, 2, 1.0, 0.9, 5);
  MixingEstimate est = estimate_mixing(mdp, 16, 1);
  CHECK(est.worst_factor == doctest::Approx(0.0));
  CHECK(est.tau_hat == doctest::Approx(1.0));
}

TEST_CASE("estimate mixing: identity kernel violates one-step contraction") {
  TabularMdp mdp;
  mdp.num_states = 2;
  mdp.num_actions = 1;
  mdp.gamma = 0.5;
  mdp.transitions.assign(1, Matrix::Identity(2, 2));
  mdp.mean_rewards = Matrix::Constant(2, 1, 0.5);
  try {
    estimate_mixing(mdp, 8, 1);
    FAIL("expected an assumption violation");
  } catch (const AssumptionViolation& e) {
    // the identity never contracts at any power
    CHECK(std::string(e.what()).find("no contraction up to k = 64") != std::string::npos);
  }
}

TEST_CASE("estimate mixing: k-step fallback reports the first contracting power") {
  // one-step factor is 1 (two rows with disjoint support) but the two-step
  // kernel contracts: hand computation gives factor 0.75 at k = 2
  TabularMdp mdp;
  mdp.num_states = 3;
  mdp.num_actions = 1;
  mdp.gamma = 0.5;
  Matrix k(3, 3);
  k << 0.5, 0.5, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0;
  mdp.transitions.assign(1, k);
  mdp.mean_rewards = Matrix::Constant(3, 1, 0.5);
  CHECK(contraction_factor(k) == 1.0);
  CHECK(contraction_factor(k * k) == doctest::Approx(0.75));
  try {
    estimate_mixing(mdp, 8, 1);
    FAIL("expected an assumption violation");
  } catch (const AssumptionViolation& e) {
    CHECK(std::string(e.what()).find("first contraction at k = 2") != std::string::npos);
  }
}

TEST_CASE("contraction factor: hand L1 computation") {
  Matrix k(2, 2);
  k << 0.9, 0.1, 0.5, 0.5;
  // ||(e_0 - e_1) K||_1 = |0.4| + |-0.4| = 0.8, normalized by ||e_0 - e_1||_1 = 2
  CHECK(contraction_factor(k) == doctest::Approx(0.4).epsilon(1e-14));
  TabularMdp mdp;
  mdp.num_states = 2;
  mdp.num_actions = 1;
  mdp.gamma = 0.5;
  mdp.transitions.assign(1, k);
  mdp.mean_rewards = Matrix::Constant(2, 1, 0.5);
  MixingEstimate est = estimate_mixing(mdp, 8, 1);
  CHECK(est.worst_factor == doctest::Approx(0.4));
  CHECK(est.tau_hat == doctest::Approx(std::max(1.0, -1.0 / std::log(0.4))));
}

TEST_CASE("rollforward: stationarity is preserved") {
  TabularMdp mdp = random_ergodic(3, 2, 0.4, 0.9, 43);
  Policy pi = Policy::uniform(3, 2);
  StateDistribution mu = stationary_distribution(induced_kernel(mdp, pi));
  std::vector<Policy> schedule(10, pi);
  auto nus = rollforward(mu, schedule, mdp);
  REQUIRE(nus.size() == 10);
  for (const auto& nu : nus) CHECK((nu.mass - mu.mass).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("rollforward: one step by hand and simplex invariant") {
  TabularMdp mdp = random_ergodic(2, 2, 0.5, 0.9, 47);
  Policy pi = Policy::uniform(2, 2);
  StateDistribution nu1 = StateDistribution::point_mass(2, 0);
  std::vector<Policy> schedule(2, pi);
  auto nus = rollforward(nu1, schedule, mdp);
  Vector expected = induced_kernel(mdp, pi).row(0).transpose();
  CHECK((nus[1].mass - expected).cwiseAbs().maxCoeff() < 1e-14);
  for (const auto& nu : nus) {
    CHECK(std::abs(nu.mass.sum() - 1.0) < 1e-10);
    CHECK(nu.mass.minCoeff() > -1e-10);
  }
}

TEST_CASE("discounted occupancy: gamma zero is the start state") {
  TabularMdp mdp = random_ergodic(3, 2, 0.5, 0.0, 53);
  Vector d = discounted_occupancy(mdp, Policy::uniform(3, 2), 1).mass;
  CHECK(d[1] == doctest::Approx(1.0));
}

TEST_CASE("discounted occupancy: absorbing single state") {
  TabularMdp mdp = single_state(1, {0.5}, 0.9);
  Vector d = discounted_occupancy(mdp, Policy::uniform(1, 1), 0).mass;
  CHECK(d[0] == doctest::Approx(1.0));
}

TEST_CASE("discounted occupancy: two-state cycle geometric series") {
  // From state 0: mass (1 - g)(1 + g^2 + g^4 + ...) = 1/(1 + g) at 0, g/(1 + g) at 1.
  TabularMdp mdp = cycle_mdp(0.5);
  Vector d = discounted_occupancy(mdp, Policy::uniform(2, 1), 0).mass;
  CHECK(d[0] == doctest::Approx(2.0 / 3).epsilon(1e-12));
  CHECK(d[1] == doctest::Approx(1.0 / 3).epsilon(1e-12));
}

TEST_CASE("augment: two states with one extra clock tick") {
  TabularMdp mdp = random_ergodic(2, 2, 0.5, 0.9, 59);
  AugmentedMdp aug = augment(mdp, 1);
  CHECK(aug.derived.num_states == 4);
  aug.derived.validate();
  // block structure: clock 0 rows land in clock 1 columns and vice versa
  for (int a = 0; a < 2; ++a) {
    CHECK(aug.derived.transitions[a].block(0, 2, 2, 2).isApprox(mdp.transitions[a]));
    CHECK(aug.derived.transitions[a].block(2, 0, 2, 2).isApprox(mdp.transitions[a]));
    CHECK(aug.derived.transitions[a].block(0, 0, 2, 2).cwiseAbs().maxCoeff() == 0.0);
  }
  // rewards survive the round trip
  for (int h = 0; h < 2; ++h)
    for (int s = 0; s < 2; ++s)
      for (int a = 0; a < 2; ++a)
        CHECK(aug.derived.mean_rewards(aug.index(s, h), a) == mdp.mean_rewards(s, a));
}

TEST_CASE("augment: stationary distribution replicates the base") {
  TabularMdp mdp = random_ergodic(3, 2, 0.3, 0.9, 61);
  Policy pi = Policy::uniform(3, 2);
  for (int extra : {0, 2, 5}) {
    AugmentedMdp aug = augment(mdp, extra);
    Vector mu = stationary_distribution(induced_kernel(mdp, pi)).mass;
    Vector mu_aug = stationary_distribution(induced_kernel(aug.derived, aug.lift(pi))).mass;
    for (int h = 0; h <= extra; ++h)
      for (int s = 0; s < 3; ++s)
        CHECK(mu_aug[aug.index(s, h)] ==
              doctest::Approx(mu[s] / (extra + 1)).epsilon(1e-9));
  }
}

TEST_CASE("augment: zero extra clock is the base MDP relabeled") {
  TabularMdp mdp = random_ergodic(3, 2, 0.3, 0.9, 67);
  AugmentedMdp aug = augment(mdp, 0);
  for (int a = 0; a < 2; ++a) CHECK(aug.derived.transitions[a].isApprox(mdp.transitions[a]));
  CHECK(aug.derived.mean_rewards.isApprox(mdp.mean_rewards));
}

TEST_CASE("augment: state cap guards against blowup") {
  TabularMdp mdp = random_ergodic(4, 2, 0.3, 0.9, 71);
  CHECK_THROWS_AS(augment(mdp, 100, 100), std::invalid_argument);
}

TEST_CASE("expected hitting times: two-state chain by hand") {
  Matrix k(2, 2);
  k << 0.5, 0.5, 0.0, 1.0;
  // from 0: geometric with p = 1/2 -> mean 2
  Vector h = expected_hitting_times(k, 1);
  CHECK(h[0] == doctest::Approx(2.0));
  CHECK(h[1] == 0.0);
}

TEST_CASE("mdp validate rejects bad tensors") {
  TabularMdp mdp = random_ergodic(2, 2, 0.5, 0.9, 73);
  TabularMdp broken = mdp;
  broken.transitions[0](0, 0) += 0.1;
  CHECK_THROWS_AS(broken.validate(), std::invalid_argument);
  broken = mdp;
  broken.mean_rewards(0, 0) = 1.5;
  CHECK_THROWS_AS(broken.validate(), std::invalid_argument);
  broken = mdp;
  broken.gamma = 1.0;
  CHECK_THROWS_AS(broken.validate(), std::invalid_argument);
}
