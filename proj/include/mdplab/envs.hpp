#pragma once

#include <cmath>
#include <cstdint>
#include <string>

#include "mdplab/mdp.hpp"

namespace mdplab {

enum class EnvKind { kHardChain, kRandomErgodic, kTwoState, kCycle };

// Parameters for the built-in environments. Fields are read per kind.
struct EnvSpec {
  EnvKind kind = EnvKind::kRandomErgodic;
  double gamma = 0.9;
  // hard_chain
  int chain_length = 8;      // N
  double big_reward = 0.0;   // R; 0 selects the default min(2^N, 1e6)
  // random_ergodic
  int num_states = 4;
  int num_actions = 3;
  double mixing = 0.3;       // epsilon
  uint64_t seed = 1;
  // cycle
  int cycle_length = 2;

  TabularMdp build() const;
  std::string describe() const;
};

// Deterministic left/right chain over N states: three actions everywhere, two
// of which step left for a small reward and one steps right for nothing, with
// a single large payoff on the wrap-around from the last state. Rewards are
// scaled by 1/R so the table stays inside [0, 1]; the optimal policy and the
// induced walk are unchanged by the scaling.
TabularMdp hard_chain(int num_states, double big_reward, double gamma);

inline double hard_chain_default_reward(int num_states) {
  double r = std::pow(2.0, num_states);
  return r < 1e6 ? r : 1e6;
}

// Every transition row is (1 - epsilon) * (uniform simplex draw) + epsilon *
// uniform, so each entry is at least epsilon / S and every policy's kernel
// contracts with factor at most 1 - epsilon. Mean rewards are uniform draws.
TabularMdp random_ergodic(int num_states, int num_actions, double epsilon, double gamma,
                          uint64_t seed);

// Two states, two actions (stay / switch); reward 1 in state 0 and 0 in
// state 1 regardless of action. Small enough to solve by hand.
TabularMdp two_state(double gamma);

// Deterministic one-action ring with reward 1 only when leaving state 0.
TabularMdp cycle_chain(int num_states, double gamma);

// The adversarial two-action reward stream: action 0 pays 1 on the first
// phase_split residues mod period, action 1 pays on the rest.
struct StickyRewardStream {
  int period = 10;
  int phase_split = 5;

  double reward(int64_t t, int action) const {
    const int64_t residue = t % period;
    const bool first_phase = residue >= 1 && residue <= phase_split;
    return (action == 0) == first_phase ? 1.0 : 0.0;
  }
};

}  // namespace mdplab
