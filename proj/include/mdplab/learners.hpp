#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <vector>

#include "mdplab/types.hpp"

namespace mdplab {

// Common contract for bandit learners driven by the environment loop.
//
// Learners own no randomness: act(t) emits a distribution over actions and the
// caller samples from it, reports the draw through observe_action, and later
// resolves the step with feed. Behavior is a deterministic function of the
// feed history.
class Learner {
 public:
  virtual ~Learner() = default;

  virtual int num_actions() const = 0;

  // Distribution used at global step t; records a pending decision for t.
  virtual Vector act(int64_t t) = 0;

  // Reports which action the caller sampled for the pending step t.
  virtual void observe_action(int64_t t, int action) = 0;

  // Delivers the reward for the action taken at t_of_action. Accepts only
  // rewards in [0, 1/(1-gamma)].
  virtual void feed(int64_t t_of_action, double reward) = 0;

  // What act(t) would return, without recording anything.
  virtual Vector snapshot(int64_t t) const = 0;

  // Internal bookkeeping rows: 1 for plain learners, H+1 for delay wrappers.
  virtual int num_slots() const { return 1; }
  virtual Vector slot_snapshot(int slot, int64_t t) const {
    (void)slot;
    return snapshot(t);
  }
};

using LearnerFactory = std::function<std::unique_ptr<Learner>()>;

// Standard EXP3 tuning: min(1, sqrt(A ln A / ((e - 1) T))).
double exp3_default_eta(int num_actions, int64_t horizon);

// Exponential-weights learner for adversarial bandits.
//
//   p_t(a) = (1 - eta) w_t(a) / W_t + eta / A
//   y_hat(a) = y / p_t(a) for the chosen action, 0 otherwise
//   w_{t+1}(a) = w_t(a) exp((1 - gamma) eta y_hat(a) / A)
//
// Rewards are accepted in [0, 1/(1-gamma)]; the (1-gamma) factor inside the
// exponent keeps the argument at most 1 because p_t(a) >= eta / A.
class Exp3 : public Learner {
 public:
  Exp3(int num_actions, double eta, double gamma);

  int num_actions() const override { return num_actions_; }
  Vector act(int64_t t) override;
  void observe_action(int64_t t, int action) override;
  void feed(int64_t t_of_action, double reward) override;
  Vector snapshot(int64_t) const override { return distribution(); }

  // The mixture distribution implied by the current weights. Pure.
  Vector distribution() const;

  // One weight update with an explicit sampling probability for the chosen
  // action. Exposed for direct use and tests.
  void update(int action, double probability, double reward);

  double eta() const { return eta_; }
  double reward_range() const { return reward_range_; }
  const Vector& weights() const { return weights_; }

 private:
  struct Pending {
    Vector dist;
    int action = -1;
  };

  int num_actions_;
  double eta_;
  double gamma_;
  double reward_range_;
  Vector weights_;
  std::map<int64_t, Pending> pending_;
};

// Emits a fixed distribution and ignores feedback (after validating it).
class FixedLearner : public Learner {
 public:
  explicit FixedLearner(Vector dist, double gamma = 0.0);

  int num_actions() const override { return static_cast<int>(dist_.size()); }
  Vector act(int64_t) override { return dist_; }
  void observe_action(int64_t, int action) override;
  void feed(int64_t, double reward) override;
  Vector snapshot(int64_t) const override { return dist_; }

 private:
  Vector dist_;
  double reward_range_;
};

std::unique_ptr<Learner> make_uniform_learner(int num_actions, double gamma = 0.0);

// Round-robin reduction of a constantly delayed problem to delay+1 plain
// problems: step t is served by base (t mod (delay+1)), and feedback for t
// routes back to the same base, which is exactly the one that acted then.
class DelayWrapper : public Learner {
 public:
  DelayWrapper(const LearnerFactory& base_factory, int delay);

  int num_actions() const override { return bases_.front()->num_actions(); }
  Vector act(int64_t t) override;
  void observe_action(int64_t t, int action) override;
  void feed(int64_t t_of_action, double reward) override;
  Vector snapshot(int64_t t) const override { return bases_[base_index(t)]->snapshot(t); }

  int num_slots() const override { return static_cast<int>(bases_.size()); }
  Vector slot_snapshot(int slot, int64_t t) const override { return bases_[slot]->snapshot(t); }

  int base_index(int64_t t) const { return static_cast<int>(t % static_cast<int64_t>(bases_.size())); }
  const Learner& base(int h) const { return *bases_[h]; }

  // Feeds delivered to each base so far; used by routing audits.
  const std::vector<int64_t>& feed_counts() const { return feed_counts_; }
  const std::vector<int64_t>& act_counts() const { return act_counts_; }

 private:
  std::vector<std::unique_ptr<Learner>> bases_;
  std::vector<int64_t> feed_counts_;
  std::vector<int64_t> act_counts_;
};

std::unique_ptr<Learner> wrap_delay(const LearnerFactory& base_factory, int delay);

// ||pi_next - pi_prev||_{1,inf}: the per-step change of a policy sequence.
double change_rate(const Matrix& prev, const Matrix& next);

}  // namespace mdplab
