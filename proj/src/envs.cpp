#include "mdplab/envs.hpp"

#include <cmath>
#include <sstream>

#include "mdplab/rng.hpp"

namespace mdplab {

TabularMdp hard_chain(int num_states, double big_reward, double gamma) {
  if (num_states < 3) throw std::invalid_argument("hard_chain: need at least 3 states");
  if (big_reward < 1.0) throw std::invalid_argument("hard_chain: big reward must be >= 1");

  const int N = num_states;
  const int A = 3;
  TabularMdp mdp;
  mdp.num_states = N;
  mdp.num_actions = A;
  mdp.gamma = gamma;
  mdp.reward_kind = RewardKind::kDeterministic;
  mdp.transitions.assign(A, Matrix::Zero(N, N));
  mdp.mean_rewards = Matrix::Zero(N, A);

  const double small = 1.0 / big_reward;
  for (int a = 0; a < A; ++a) {
    // First and last state have a single move, duplicated across all actions.
    mdp.transitions[a](0, 1) = 1.0;
    mdp.transitions[a](N - 1, 0) = 1.0;
    mdp.mean_rewards(N - 1, a) = 1.0;  // the big payoff, scaled to 1
  }
  for (int s = 1; s < N - 1; ++s) {
    mdp.transitions[0](s, s - 1) = 1.0;  // left, small reward
    mdp.transitions[1](s, s - 1) = 1.0;  // left, small reward
    mdp.transitions[2](s, s + 1) = 1.0;  // right, nothing
    mdp.mean_rewards(s, 0) = small;
    mdp.mean_rewards(s, 1) = small;
  }
  mdp.validate();
  return mdp;
}

TabularMdp random_ergodic(int num_states, int num_actions, double epsilon, double gamma,
                          uint64_t seed) {
  if (epsilon <= 0.0 || epsilon > 1.0)
    throw std::invalid_argument("random_ergodic: epsilon must lie in (0, 1]");
  RngStream rng(seed, kStreamEnv);
  TabularMdp mdp;
  mdp.num_states = num_states;
  mdp.num_actions = num_actions;
  mdp.gamma = gamma;
  mdp.reward_kind = RewardKind::kDeterministic;
  mdp.transitions.assign(num_actions, Matrix(num_states, num_states));
  mdp.mean_rewards = Matrix(num_states, num_actions);
  const double u = 1.0 / num_states;
  for (int s = 0; s < num_states; ++s)
    for (int a = 0; a < num_actions; ++a) {
      Vector row = rng.simplex(num_states);
      for (int s2 = 0; s2 < num_states; ++s2)
        mdp.transitions[a](s, s2) = (1.0 - epsilon) * row[s2] + epsilon * u;
      mdp.mean_rewards(s, a) = rng.uniform01();
    }
  mdp.validate();
  return mdp;
}

TabularMdp two_state(double gamma) {
  TabularMdp mdp;
  mdp.num_states = 2;
  mdp.num_actions = 2;
  mdp.gamma = gamma;
  mdp.reward_kind = RewardKind::kDeterministic;
  mdp.transitions.assign(2, Matrix::Zero(2, 2));
  mdp.transitions[0](0, 0) = 1.0;  // stay
  mdp.transitions[0](1, 1) = 1.0;
  mdp.transitions[1](0, 1) = 1.0;  // switch
  mdp.transitions[1](1, 0) = 1.0;
  mdp.mean_rewards = Matrix(2, 2);
  mdp.mean_rewards << 1.0, 1.0, 0.0, 0.0;
  mdp.validate();
  return mdp;
}

TabularMdp cycle_chain(int num_states, double gamma) {
  if (num_states < 2) throw std::invalid_argument("cycle_chain: need at least 2 states");
  TabularMdp mdp;
  mdp.num_states = num_states;
  mdp.num_actions = 1;
  mdp.gamma = gamma;
  mdp.reward_kind = RewardKind::kDeterministic;
  mdp.transitions.assign(1, Matrix::Zero(num_states, num_states));
  for (int s = 0; s < num_states; ++s) mdp.transitions[0](s, (s + 1) % num_states) = 1.0;
  mdp.mean_rewards = Matrix::Zero(num_states, 1);
  mdp.mean_rewards(0, 0) = 1.0;
  mdp.validate();
  return mdp;
}

TabularMdp EnvSpec::build() const {
  switch (kind) {
    case EnvKind::kHardChain: {
      double r = big_reward > 0.0 ? big_reward : hard_chain_default_reward(chain_length);
      return hard_chain(chain_length, r, gamma);
    }
    case EnvKind::kRandomErgodic:
      return random_ergodic(num_states, num_actions, mixing, gamma, seed);
    case EnvKind::kTwoState:
      return two_state(gamma);
    case EnvKind::kCycle:
      return cycle_chain(cycle_length, gamma);
  }
  throw std::invalid_argument("EnvSpec: unknown kind");
}

std::string EnvSpec::describe() const {
  std::ostringstream os;
  switch (kind) {
    case EnvKind::kHardChain:
      os << "hard_chain(N=" << chain_length << ", R="
         << (big_reward > 0.0 ? big_reward : hard_chain_default_reward(chain_length))
         << ", gamma=" << gamma << ")";
      break;
    case EnvKind::kRandomErgodic:
      os << "random_ergodic(S=" << num_states << ", A=" << num_actions << ", eps=" << mixing
         << ", gamma=" << gamma << ", seed=" << seed << ")";
      break;
    case EnvKind::kTwoState:
      os << "two_state(gamma=" << gamma << ")";
      break;
    case EnvKind::kCycle:
      os << "cycle(N=" << cycle_length << ", gamma=" << gamma << ")";
      break;
  }
  return os.str();
}

}  // namespace mdplab
