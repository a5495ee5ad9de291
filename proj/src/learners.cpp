#include "mdplab/learners.hpp"

#include <cmath>
#include <sstream>

namespace mdplab {

namespace {
constexpr double kRewardRangeSlack = 1e-9;
}

double exp3_default_eta(int num_actions, int64_t horizon) {
  if (horizon < 1) throw std::invalid_argument("exp3_default_eta: horizon must be >= 1");
  if (num_actions < 2) return 1.0;
  const double a = static_cast<double>(num_actions);
  const double value = std::sqrt(a * std::log(a) / ((std::exp(1.0) - 1.0) * static_cast<double>(horizon)));
  return value < 1.0 ? value : 1.0;
}

Exp3::Exp3(int num_actions, double eta, double gamma)
    : num_actions_(num_actions), eta_(eta), gamma_(gamma) {
  if (num_actions_ <= 0) throw std::invalid_argument("Exp3: need at least one action");
  if (!(eta_ > 0.0 && eta_ <= 1.0)) throw std::invalid_argument("Exp3: eta must lie in (0, 1]");
  if (gamma_ < 0.0 || gamma_ >= 1.0) throw std::invalid_argument("Exp3: gamma must lie in [0, 1)");
  reward_range_ = 1.0 / (1.0 - gamma_);
  weights_ = Vector::Ones(num_actions_);
}

Vector Exp3::distribution() const {
  const double total = weights_.sum();
  return (1.0 - eta_) * (weights_ / total) + Vector::Constant(num_actions_, eta_ / num_actions_);
}

Vector Exp3::act(int64_t t) {
  Vector p = distribution();
  auto [it, inserted] = pending_.try_emplace(t);
  if (!inserted) throw std::logic_error("Exp3: act called twice for the same step");
  it->second.dist = p;
  return p;
}

void Exp3::observe_action(int64_t t, int action) {
  auto it = pending_.find(t);
  if (it == pending_.end()) throw std::logic_error("Exp3: observe_action without act");
  if (action < 0 || action >= num_actions_)
    throw std::out_of_range("Exp3: action index out of range");
  it->second.action = action;
}

void Exp3::update(int action, double probability, double reward) {
  if (action < 0 || action >= num_actions_)
    throw std::out_of_range("Exp3: action index out of range");
  if (reward < -kRewardRangeSlack || reward > reward_range_ + kRewardRangeSlack) {
    std::ostringstream os;
    os << "Exp3: reward " << reward << " outside [0, " << reward_range_ << "]";
    throw std::out_of_range(os.str());
  }
  const double y_hat = reward / probability;
  weights_[action] *= std::exp((1.0 - gamma_) * eta_ * y_hat / num_actions_);
  // Rescaling all weights leaves the distribution unchanged.
  const double largest = weights_.maxCoeff();
  if (largest > 1e100) weights_ /= largest;
}

void Exp3::feed(int64_t t_of_action, double reward) {
  auto it = pending_.find(t_of_action);
  if (it == pending_.end() || it->second.action < 0)
    throw std::logic_error("Exp3: feedback for a step with no outstanding action");
  const int action = it->second.action;
  const double probability = it->second.dist[action];
  pending_.erase(it);
  update(action, probability, reward);
}

FixedLearner::FixedLearner(Vector dist, double gamma) : dist_(std::move(dist)) {
  if (gamma < 0.0 || gamma >= 1.0) throw std::invalid_argument("FixedLearner: gamma must lie in [0, 1)");
  reward_range_ = 1.0 / (1.0 - gamma);
  const double sum = dist_.sum();
  if (std::abs(sum - 1.0) > kConstructTol || (dist_.array() < 0.0).any())
    throw std::invalid_argument("FixedLearner: distribution must be a simplex vector");
}

void FixedLearner::observe_action(int64_t, int action) {
  if (action < 0 || action >= num_actions())
    throw std::out_of_range("FixedLearner: action index out of range");
}

void FixedLearner::feed(int64_t, double reward) {
  if (reward < -kRewardRangeSlack || reward > reward_range_ + kRewardRangeSlack)
    throw std::out_of_range("FixedLearner: reward outside declared range");
}

std::unique_ptr<Learner> make_uniform_learner(int num_actions, double gamma) {
  return std::make_unique<FixedLearner>(Vector::Constant(num_actions, 1.0 / num_actions), gamma);
}

DelayWrapper::DelayWrapper(const LearnerFactory& base_factory, int delay) {
  if (delay < 0) throw std::invalid_argument("DelayWrapper: delay must be >= 0");
  bases_.reserve(delay + 1);
  for (int h = 0; h <= delay; ++h) bases_.push_back(base_factory());
  feed_counts_.assign(delay + 1, 0);
  act_counts_.assign(delay + 1, 0);
}

Vector DelayWrapper::act(int64_t t) {
  const int h = base_index(t);
  ++act_counts_[h];
  return bases_[h]->act(t);
}

void DelayWrapper::observe_action(int64_t t, int action) {
  bases_[base_index(t)]->observe_action(t, action);
}

void DelayWrapper::feed(int64_t t_of_action, double reward) {
  const int h = base_index(t_of_action);
  ++feed_counts_[h];
  bases_[h]->feed(t_of_action, reward);
}

std::unique_ptr<Learner> wrap_delay(const LearnerFactory& base_factory, int delay) {
  return std::make_unique<DelayWrapper>(base_factory, delay);
}

double change_rate(const Matrix& prev, const Matrix& next) {
  if (prev.rows() != next.rows() || prev.cols() != next.cols())
    throw std::invalid_argument("change_rate: shape mismatch");
  return one_inf_norm(next - prev);
}

}  // namespace mdplab
