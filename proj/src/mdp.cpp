#include "mdplab/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mdplab/rng.hpp"

namespace mdplab {

namespace {

void check_row_stochastic(const Matrix& m, double tol, const char* what) {
  for (int i = 0; i < m.rows(); ++i) {
    double sum = 0.0;
    for (int j = 0; j < m.cols(); ++j) {
      if (m(i, j) < -tol) {
        std::ostringstream os;
        os << what << ": negative entry " << m(i, j) << " at row " << i;
        throw std::invalid_argument(os.str());
      }
      sum += m(i, j);
    }
    if (std::abs(sum - 1.0) > tol) {
      std::ostringstream os;
      os << what << ": row " << i << " sums to " << sum;
      throw std::invalid_argument(os.str());
    }
  }
}

}  // namespace

void TabularMdp::validate() const {
  if (num_states <= 0 || num_actions <= 0)
    throw std::invalid_argument("TabularMdp: state and action counts must be positive");
  if (gamma < 0.0 || gamma >= 1.0)
    throw std::invalid_argument("TabularMdp: gamma must lie in [0, 1)");
  if (static_cast<int>(transitions.size()) != num_actions)
    throw std::invalid_argument("TabularMdp: transition tensor has wrong action count");
  for (int a = 0; a < num_actions; ++a) {
    if (transitions[a].rows() != num_states || transitions[a].cols() != num_states)
      throw std::invalid_argument("TabularMdp: transition matrix has wrong shape");
    check_row_stochastic(transitions[a], kConstructTol, "TabularMdp transitions");
  }
  if (mean_rewards.rows() != num_states || mean_rewards.cols() != num_actions)
    throw std::invalid_argument("TabularMdp: reward table has wrong shape");
  if ((mean_rewards.array() < 0.0).any() || (mean_rewards.array() > 1.0).any())
    throw std::invalid_argument("TabularMdp: rewards must lie in [0, 1]");
}

Policy Policy::uniform(int num_states, int num_actions) {
  Policy p;
  p.probs = Matrix::Constant(num_states, num_actions, 1.0 / num_actions);
  return p;
}

Policy Policy::deterministic(const std::vector<int>& actions, int num_actions) {
  Policy p;
  p.probs = Matrix::Zero(static_cast<int>(actions.size()), num_actions);
  for (int s = 0; s < static_cast<int>(actions.size()); ++s) {
    if (actions[s] < 0 || actions[s] >= num_actions)
      throw std::invalid_argument("Policy::deterministic: action index out of range");
    p.probs(s, actions[s]) = 1.0;
  }
  return p;
}

void Policy::validate() const { check_row_stochastic(probs, kConstructTol, "Policy"); }

StateDistribution StateDistribution::point_mass(int num_states, int state) {
  if (state < 0 || state >= num_states)
    throw std::invalid_argument("point_mass: state index out of range");
  StateDistribution d;
  d.mass = Vector::Zero(num_states);
  d.mass[state] = 1.0;
  return d;
}

void StateDistribution::validate(double tol) const {
  if ((mass.array() < -tol).any())
    throw std::invalid_argument("StateDistribution: negative mass");
  if (std::abs(mass.sum() - 1.0) > tol)
    throw std::invalid_argument("StateDistribution: mass does not sum to 1");
}

Matrix induced_kernel(const TabularMdp& mdp, const Policy& pi) {
  if (pi.num_states() != mdp.num_states || pi.num_actions() != mdp.num_actions)
    throw std::invalid_argument("induced_kernel: policy shape does not match MDP");
  Matrix k = Matrix::Zero(mdp.num_states, mdp.num_states);
  for (int a = 0; a < mdp.num_actions; ++a)
    k.noalias() += pi.probs.col(a).asDiagonal() * mdp.transitions[a];
  return k;
}

ValueTables policy_evaluation(const TabularMdp& mdp, const Policy& pi, double tol,
                              const Vector* warm_start) {
  if (tol <= 0.0) throw std::invalid_argument("policy_evaluation: tol must be positive");
  if (pi.num_states() != mdp.num_states || pi.num_actions() != mdp.num_actions)
    throw std::invalid_argument("policy_evaluation: policy shape does not match MDP");

  const int S = mdp.num_states;
  const int A = mdp.num_actions;
  const double gamma = mdp.gamma;

  Vector v = warm_start ? *warm_start : Vector::Zero(S);
  Vector next(S);
  // Stop when the sup-norm step guarantees ||v - V^pi|| <= tol.
  const double step_tol = gamma > 0.0 ? tol * (1.0 - gamma) / gamma : tol;
  double diff = 0.0;
  for (int iter = 0; iter < 1000000; ++iter) {
    for (int s = 0; s < S; ++s) {
      double acc = 0.0;
      for (int a = 0; a < A; ++a) {
        double q = mdp.mean_rewards(s, a);
        if (gamma > 0.0) q += gamma * mdp.transitions[a].row(s).dot(v);
        acc += pi.probs(s, a) * q;
      }
      next[s] = acc;
    }
    diff = (next - v).cwiseAbs().maxCoeff();
    v.swap(next);
    if (diff <= step_tol) break;
  }

  ValueTables out;
  out.q = Matrix::Zero(S, A);
  for (int s = 0; s < S; ++s)
    for (int a = 0; a < A; ++a)
      out.q(s, a) = mdp.mean_rewards(s, a) + gamma * mdp.transitions[a].row(s).dot(v);
  // One more expectation application keeps V(s) = sum_a pi(a|s) Q(s,a) exact.
  out.v = (pi.probs.array() * out.q.array()).rowwise().sum();
  out.residual = tol;
  return out;
}

Matrix finite_horizon_q(const TabularMdp& mdp, const Policy& pi, int horizon) {
  if (horizon < 0) throw std::invalid_argument("finite_horizon_q: horizon must be >= 0");
  const int S = mdp.num_states;
  const int A = mdp.num_actions;
  Matrix q = mdp.mean_rewards;
  for (int k = 0; k < horizon; ++k) {
    Vector v = (pi.probs.array() * q.array()).rowwise().sum();
    Matrix next(S, A);
    for (int a = 0; a < A; ++a)
      next.col(a) = mdp.mean_rewards.col(a) + mdp.gamma * (mdp.transitions[a] * v);
    q.swap(next);
  }
  return q;
}

OptimalPolicyResult optimal_policy(const TabularMdp& mdp, double tol) {
  if (tol <= 0.0) throw std::invalid_argument("optimal_policy: tol must be positive");
  const int S = mdp.num_states;
  const int A = mdp.num_actions;
  const double gamma = mdp.gamma;

  Vector v = Vector::Zero(S);
  Vector next(S);
  const double step_tol = gamma > 0.0 ? tol * (1.0 - gamma) / (2.0 * gamma) : tol;
  for (int iter = 0; iter < 1000000; ++iter) {
    for (int s = 0; s < S; ++s) {
      double best = -1.0;
      for (int a = 0; a < A; ++a) {
        double q = mdp.mean_rewards(s, a) + gamma * mdp.transitions[a].row(s).dot(v);
        if (q > best) best = q;
      }
      next[s] = best;
    }
    double diff = (next - v).cwiseAbs().maxCoeff();
    v.swap(next);
    if (diff <= step_tol) break;
  }

  std::vector<int> greedy(S, 0);
  for (int s = 0; s < S; ++s) {
    double best = -1.0;
    for (int a = 0; a < A; ++a) {
      double q = mdp.mean_rewards(s, a) + gamma * mdp.transitions[a].row(s).dot(v);
      if (q > best) {  // strict improvement keeps the lowest index on ties
        best = q;
        greedy[s] = a;
      }
    }
  }

  OptimalPolicyResult out;
  out.policy = Policy::deterministic(greedy, A);
  out.values = policy_evaluation(mdp, out.policy, tol);
  return out;
}

StateDistribution stationary_distribution(const Matrix& kernel, double tol) {
  const int S = static_cast<int>(kernel.rows());
  if (kernel.cols() != S) throw std::invalid_argument("stationary_distribution: kernel not square");

  Matrix balance = kernel.transpose() - Matrix::Identity(S, S);
  // Rank with an absolute pivot threshold: kernel entries are O(1), so any
  // genuine balance structure produces pivots far above roundoff, while a
  // kernel that only differs from a disconnected one by fp noise must not
  // pass as ergodic.
  Eigen::FullPivLU<Matrix> lu(balance);
  int rank = 0;
  Vector pivots = lu.matrixLU().diagonal().cwiseAbs();
  for (int i = 0; i < pivots.size(); ++i)
    if (pivots[i] > 1e-9) ++rank;
  if (rank < S - 1)
    throw NotErgodicError("stationary distribution is not unique (kernel has multiple invariant distributions)");

  Matrix a(S + 1, S);
  a.topRows(S) = balance;
  a.row(S) = Eigen::RowVectorXd::Ones(S);
  Vector b = Vector::Zero(S + 1);
  b[S] = 1.0;
  Vector mu = a.colPivHouseholderQr().solve(b);

  double residual = (mu.transpose() * kernel - mu.transpose()).cwiseAbs().sum();
  if (residual > tol)
    throw NotErgodicError("stationary distribution solve residual " + std::to_string(residual));
  for (int s = 0; s < S; ++s) {
    if (mu[s] < -tol) throw NotErgodicError("stationary distribution has negative mass");
    if (mu[s] < 0.0) mu[s] = 0.0;
  }
  mu /= mu.sum();

  StateDistribution out;
  out.mass = mu;
  return out;
}

double contraction_factor(const Matrix& kernel) {
  const int S = static_cast<int>(kernel.rows());
  double worst = 0.0;
  for (int i = 0; i < S; ++i)
    for (int j = i + 1; j < S; ++j)
      worst = std::max(worst, 0.5 * (kernel.row(i) - kernel.row(j)).cwiseAbs().sum());
  return worst;
}

double augmented_contraction_factor(const AugmentedMdp& aug, const Policy& base_pi) {
  Matrix kernel = induced_kernel(aug.derived, aug.lift(base_pi));
  const int S = aug.base.num_states;
  double worst = 0.0;
  for (int h = 0; h < aug.clock_len; ++h)
    for (int i = 0; i < S; ++i)
      for (int j = i + 1; j < S; ++j) {
        double d = 0.5 * (kernel.row(aug.index(i, h)) - kernel.row(aug.index(j, h))).cwiseAbs().sum();
        worst = std::max(worst, d);
      }
  return worst;
}

std::vector<Policy> enumerate_deterministic_policies(int num_states, int num_actions, int cap) {
  double count = std::pow(static_cast<double>(num_actions), num_states);
  if (count > static_cast<double>(cap))
    throw std::invalid_argument("enumerate_deterministic_policies: A^S exceeds cap");
  const int total = static_cast<int>(std::llround(count));
  std::vector<Policy> out;
  out.reserve(total);
  std::vector<int> actions(num_states, 0);
  for (int idx = 0; idx < total; ++idx) {
    out.push_back(Policy::deterministic(actions, num_actions));
    for (int s = 0; s < num_states; ++s) {
      if (++actions[s] < num_actions) break;
      actions[s] = 0;
    }
  }
  return out;
}

namespace {

// All deterministic policies when A^S <= cap, otherwise policy_samples draws
// split between random corners and Dirichlet mixtures.
std::pair<std::vector<Policy>, bool> sample_policies(const TabularMdp& mdp, int policy_samples,
                                                     uint64_t seed, int cap) {
  const int S = mdp.num_states;
  const int A = mdp.num_actions;
  if (std::pow(static_cast<double>(A), S) <= static_cast<double>(cap))
    return {enumerate_deterministic_policies(S, A, cap), true};

  RngStream rng(seed, kStreamPolicies);
  std::vector<Policy> out;
  out.reserve(policy_samples);
  for (int i = 0; i < policy_samples; ++i) {
    if (i % 2 == 0) {
      std::vector<int> actions(S);
      for (int s = 0; s < S; ++s) actions[s] = static_cast<int>(rng.integer(A));
      out.push_back(Policy::deterministic(actions, A));
    } else {
      Policy p;
      p.probs = Matrix(S, A);
      for (int s = 0; s < S; ++s) p.probs.row(s) = rng.simplex(A).transpose();
      out.push_back(std::move(p));
    }
  }
  return {std::move(out), false};
}

std::string describe_policy(const Policy& pi) {
  std::ostringstream os;
  os << "policy rows:";
  for (int s = 0; s < pi.num_states(); ++s) {
    os << " [";
    for (int a = 0; a < pi.num_actions(); ++a) {
      if (a) os << " ";
      os << pi.probs(s, a);
    }
    os << "]";
  }
  return os.str();
}

}  // namespace

BetaEstimate estimate_beta(const TabularMdp& mdp, int policy_samples, uint64_t seed,
                           int exhaustive_cap) {
  auto [policies, exhaustive] = sample_policies(mdp, policy_samples, seed, exhaustive_cap);
  BetaEstimate est;
  est.beta_hat = 1.0;
  est.num_policies = static_cast<int>(policies.size());
  est.exhaustive = exhaustive;
  for (const Policy& pi : policies) {
    StateDistribution mu;
    try {
      mu = stationary_distribution(induced_kernel(mdp, pi));
    } catch (const NotErgodicError& e) {
      throw AssumptionViolation(std::string("stationary mass estimate: non-ergodic ") +
                                describe_policy(pi) + " (" + e.what() + ")");
    }
    int s_min = 0;
    double m = mu.mass.minCoeff(&s_min);
    if (m < est.beta_hat) {
      est.beta_hat = m;
      est.argmin_policy = pi;
      est.argmin_state = s_min;
    }
  }
  if (est.argmin_state < 0 && !policies.empty()) {
    est.argmin_policy = policies.front();
    est.argmin_state = 0;
  }
  return est;
}

namespace {

// Smallest k <= cap with a contracting k-step kernel; 0 when none is found.
// Diagnostic only: the one-step assumption stays the enforced form.
int multi_step_contraction_order(const Matrix& kernel, int cap) {
  Matrix power = kernel;
  for (int k = 1; k <= cap; ++k) {
    if (k > 1) power = power * kernel;
    if (contraction_factor(power) < 1.0) return k;
  }
  return 0;
}

}  // namespace

MixingEstimate estimate_mixing(const TabularMdp& mdp, int policy_samples, uint64_t seed,
                               int exhaustive_cap) {
  auto [policies, exhaustive] = sample_policies(mdp, policy_samples, seed, exhaustive_cap);
  MixingEstimate est;
  est.num_policies = static_cast<int>(policies.size());
  est.exhaustive = exhaustive;
  for (const Policy& pi : policies) {
    Matrix kernel = induced_kernel(mdp, pi);
    double f = contraction_factor(kernel);
    if (f >= 1.0) {
      const int order = multi_step_contraction_order(kernel, 64);
      std::string fallback = order > 0
                                 ? "k-step fallback: first contraction at k = " + std::to_string(order)
                                 : "k-step fallback: no contraction up to k = 64";
      throw AssumptionViolation("one-step contraction violated: factor " + std::to_string(f) +
                                " for " + describe_policy(pi) + "; " + fallback);
    }
    est.worst_factor = std::max(est.worst_factor, f);
  }
  est.tau_hat = est.worst_factor > 0.0 ? std::max(1.0, -1.0 / std::log(est.worst_factor)) : 1.0;
  return est;
}

std::vector<StateDistribution> rollforward(const StateDistribution& nu1,
                                           std::span<const Policy> schedule,
                                           const TabularMdp& mdp) {
  std::vector<StateDistribution> out;
  out.reserve(schedule.size());
  if (schedule.empty()) return out;
  out.push_back(nu1);
  for (size_t t = 0; t + 1 < schedule.size(); ++t) {
    Matrix k = induced_kernel(mdp, schedule[t]);
    StateDistribution next;
    next.mass = (out.back().mass.transpose() * k).transpose();
    next.validate();
    out.push_back(std::move(next));
  }
  return out;
}

StateDistribution discounted_occupancy(const TabularMdp& mdp, const Policy& pi, int start_state) {
  if (start_state < 0 || start_state >= mdp.num_states)
    throw std::invalid_argument("discounted_occupancy: start state out of range");
  const int S = mdp.num_states;
  Matrix k = induced_kernel(mdp, pi);
  // d (I - gamma K) = (1 - gamma) e_{s0}
  Matrix system = Matrix::Identity(S, S) - mdp.gamma * k.transpose();
  Vector rhs = Vector::Zero(S);
  rhs[start_state] = 1.0 - mdp.gamma;
  StateDistribution d;
  d.mass = system.partialPivLu().solve(rhs);
  d.validate();
  return d;
}

Vector expected_hitting_times(const Matrix& kernel, int target) {
  const int S = static_cast<int>(kernel.rows());
  if (target < 0 || target >= S)
    throw std::invalid_argument("expected_hitting_times: target out of range");
  // h = 1 + Q h on non-target states, h(target) = 0.
  Matrix q(S - 1, S - 1);
  int ri = 0;
  for (int i = 0; i < S; ++i) {
    if (i == target) continue;
    int ci = 0;
    for (int j = 0; j < S; ++j) {
      if (j == target) continue;
      q(ri, ci++) = kernel(i, j);
    }
    ++ri;
  }
  Matrix system = Matrix::Identity(S - 1, S - 1) - q;
  Vector h = system.partialPivLu().solve(Vector::Ones(S - 1));
  Vector out(S);
  ri = 0;
  for (int i = 0; i < S; ++i) out[i] = (i == target) ? 0.0 : h[ri++];
  return out;
}

Policy AugmentedMdp::lift(const Policy& pi) const {
  Policy out;
  out.probs = Matrix(derived.num_states, derived.num_actions);
  for (int h = 0; h < clock_len; ++h)
    out.probs.middleRows(h * base.num_states, base.num_states) = pi.probs;
  return out;
}

AugmentedMdp augment(const TabularMdp& mdp, int extra_clock, int max_states) {
  if (extra_clock < 0) throw std::invalid_argument("augment: clock extension must be >= 0");
  const int clock_len = extra_clock + 1;
  const long long total = static_cast<long long>(mdp.num_states) * clock_len;
  if (total > max_states)
    throw std::invalid_argument("augment: augmented state count " + std::to_string(total) +
                                " exceeds cap " + std::to_string(max_states));

  AugmentedMdp aug;
  aug.base = mdp;
  aug.clock_len = clock_len;
  aug.derived.num_states = static_cast<int>(total);
  aug.derived.num_actions = mdp.num_actions;
  aug.derived.gamma = mdp.gamma;
  aug.derived.reward_kind = mdp.reward_kind;
  aug.derived.mean_rewards = Matrix(total, mdp.num_actions);
  aug.derived.transitions.assign(mdp.num_actions, Matrix::Zero(total, total));
  for (int a = 0; a < mdp.num_actions; ++a) {
    for (int h = 0; h < clock_len; ++h) {
      const int next_h = (h + 1) % clock_len;
      aug.derived.transitions[a].block(h * mdp.num_states, next_h * mdp.num_states,
                                       mdp.num_states, mdp.num_states) = mdp.transitions[a];
    }
  }
  for (int h = 0; h < clock_len; ++h)
    aug.derived.mean_rewards.middleRows(h * mdp.num_states, mdp.num_states) = mdp.mean_rewards;
  return aug;
}

}  // namespace mdplab
