#include <cmath>

#include "doctest.h"
#include "mdplab/envs.hpp"
#include "mdplab/run.hpp"
#include "mdplab/text_io.hpp"

using namespace mdplab;

namespace {

LearnerFactory exp3_factory(int num_actions, double eta, double gamma) {
  return [=] { return std::make_unique<Exp3>(num_actions, eta, gamma); };
}

}  // namespace

TEST_CASE("horizon: formula evaluation") {
  CHECK(horizon_steps(0.5, 4) == 2);
  CHECK(horizon_steps(0.9, 10000) == 66);
  CHECK(horizon_steps(0.0, 1000) == 0);
  CHECK_THROWS_AS(horizon_steps(0.9, 0), std::invalid_argument);
}

TEST_CASE("horizon: tail bound holds across the grid") {
  for (double gamma : {0.3, 0.5, 0.9, 0.95, 0.99})
    for (int64_t t : {1LL, 10LL, 100LL, 1000LL, 10000LL, 100000LL}) {
      const int h = horizon_steps(gamma, t);
      CHECK(std::pow(gamma, h + 1) / (1.0 - gamma) <= 1.0 / std::sqrt(static_cast<double>(t)));
    }
}

TEST_CASE("mc return: hand sums") {
  std::vector<double> zeros(5, 0.0);
  CHECK(mc_return(zeros, 0.9) == 0.0);
  std::vector<double> ones{1.0, 1.0, 1.0};
  CHECK(mc_return(ones, 0.5) == doctest::Approx(1.75));
  std::vector<double> single{0.3};
  CHECK(mc_return(single, 0.7) == 0.3);
  CHECK_THROWS_AS(mc_return(std::span<const double>{}, 0.5), std::invalid_argument);
}

TEST_CASE("run main: no feedback when the run is shorter than the horizon") {
  TabularMdp mdp = random_ergodic(3, 2, 0.3, 0.9, 5);
  RunOptions options;
  options.horizon_override = 20;
  RunTrace trace = run_main(mdp, 10, exp3_factory(2, 0.1, 0.9), 1, options);
  CHECK(trace.feedback_log.empty());
  CHECK(trace.steps.size() == 10);
  // nothing was learned, so every snapshot equals the initial uniform policy
  for (const Matrix& snap : trace.policy_snapshots)
    CHECK(one_inf_norm(snap - Matrix::Constant(3, 2, 0.5)) == 0.0);
}

TEST_CASE("run main: feedback count is T - H and the log replays") {
  TabularMdp mdp = random_ergodic(3, 2, 0.3, 0.9, 5);
  RunTrace trace = run_main(mdp, 500, exp3_factory(2, 0.05, 0.9), 2);
  const int h = horizon_steps(0.9, 500);
  CHECK(trace.horizon == h);
  CHECK(static_cast<int64_t>(trace.feedback_log.size()) == 500 - h);
  audit_feedback(trace);
  // spot-check one event against a direct window sum
  const FeedbackEvent& ev = trace.feedback_log[17];
  std::vector<double> window;
  for (int64_t i = ev.t_of_action; i <= ev.t_delivered; ++i)
    window.push_back(trace.step(i).reward);
  CHECK(mc_return(window, 0.9) == ev.gain);
}

TEST_CASE("run main: single-state MDP degenerates to a delayed bandit") {
  TabularMdp mdp;
  mdp.num_states = 1;
  mdp.num_actions = 3;
  mdp.gamma = 0.5;
  mdp.transitions.assign(3, Matrix::Ones(1, 1));
  mdp.mean_rewards = Matrix(1, 3);
  mdp.mean_rewards << 0.9, 0.1, 0.4;
  mdp.validate();

  auto learner_record = std::make_shared<std::vector<Vector>>();
  LearnerFactory factory = [learner_record] {
    struct Recording : Exp3 {
      std::shared_ptr<std::vector<Vector>> record;
      Recording(std::shared_ptr<std::vector<Vector>> r) : Exp3(3, 0.1, 0.5), record(std::move(r)) {}
      Vector act(int64_t t) override {
        Vector p = Exp3::act(t);
        record->push_back(p);
        return p;
      }
    };
    return std::make_unique<Recording>(learner_record);
  };
  RunTrace trace = run_main(mdp, 300, factory, 3);
  REQUIRE(learner_record->size() == 300);
  for (int64_t t = 1; t <= 300; ++t) {
    const Matrix& snap = trace.snapshot(t);
    CHECK((snap.row(0).transpose().array() ==
           (*learner_record)[static_cast<size_t>(t - 1)].array())
              .all());
  }
}

TEST_CASE("run main: bit-reproducible for a fixed seed") {
  TabularMdp mdp = random_ergodic(4, 3, 0.3, 0.9, 5);
  RunTrace a = run_main(mdp, 400, exp3_factory(3, 0.08, 0.9), 99);
  RunTrace b = run_main(mdp, 400, exp3_factory(3, 0.08, 0.9), 99);
  CHECK(trace_to_text(a) == trace_to_text(b));
  RunTrace c = run_main(mdp, 400, exp3_factory(3, 0.08, 0.9), 100);
  CHECK(trace_to_text(a) != trace_to_text(c));
}

TEST_CASE("run main: at most one learner row changes per step (bare learners)") {
  TabularMdp mdp = random_ergodic(3, 2, 0.4, 0.9, 7);
  RunTrace trace = run_main(mdp, 400, exp3_factory(2, 0.1, 0.9), 4);
  ChangeRateReport change = measured_change_rate(trace);
  for (int rows : change.rows_changed) CHECK(rows <= 1);
  CHECK(change.c_hat <= 2.0 * 0.1 / 2 + 1e-12);
  // before the first delivery nothing changes
  for (int64_t t = 0; t + 1 < trace.horizon && t < static_cast<int64_t>(change.per_step.size()); ++t)
    CHECK(change.per_step[static_cast<size_t>(t)] == 0.0);
}

TEST_CASE("run main: uniform locals never change") {
  TabularMdp mdp = random_ergodic(3, 2, 0.4, 0.9, 7);
  LearnerFactory factory = [] { return make_uniform_learner(2, 0.9); };
  RunTrace trace = run_main(mdp, 300, factory, 4);
  CHECK(measured_change_rate(trace).c_hat == 0.0);
}

TEST_CASE("run main: wrapped locals mutate one base row per step") {
  TabularMdp mdp = random_ergodic(3, 2, 0.4, 0.9, 7);
  const int h = horizon_steps(0.9, 600);
  LearnerFactory base = exp3_factory(2, 0.1, 0.9);
  LearnerFactory local = [base, h] { return wrap_delay(base, h); };
  RunTrace trace = run_main(mdp, 600, local, 5);
  CHECK(trace.num_slots == h + 1);
  for (int rows : trace.slot_rows_changed) CHECK(rows <= 1);
  for (double c : trace.slot_change) CHECK(c <= 2.0 * 0.1 / 2 + 1e-12);
}

TEST_CASE("run main: raw gain exponent variant scales the window") {
  TabularMdp mdp = random_ergodic(2, 2, 0.4, 0.5, 9);
  RunOptions options;
  options.raw_gain_exponent = true;
  RunTrace raw = run_main(mdp, 50, exp3_factory(2, 0.1, 0.5), 6, options);
  RunTrace normalized = run_main(mdp, 50, exp3_factory(2, 0.1, 0.5), 6);
  for (size_t i = 0; i < raw.feedback_log.size(); ++i) {
    const auto& ev = raw.feedback_log[i];
    // identical trajectory prefix, so the windows agree up to the gamma^t factor
    if (raw.steps[i].state == normalized.steps[i].state)
      CHECK(ev.gain <= normalized.feedback_log[i].gain + 1e-12);
  }
}

TEST_CASE("doubling schedule: construction and sums") {
  auto epochs = doubling_schedule(7);
  REQUIRE(epochs.size() == 3);
  CHECK(epochs[0].length == 1);
  CHECK(epochs[1].length == 2);
  CHECK(epochs[2].length == 4);
  for (int64_t t_max : {1LL, 2LL, 7LL, 10LL, 1000LL, 12345LL}) {
    int64_t total = 0;
    for (const Epoch& e : doubling_schedule(t_max)) {
      total += e.length;
      CHECK(e.length <= e.nominal);
    }
    CHECK(total == t_max);
  }
  // epoch k is tuned for its nominal length 2^k
  auto eps = doubling_schedule(100);
  for (size_t k = 0; k < eps.size(); ++k)
    CHECK(eps[k].nominal == (1LL << k));
}

TEST_CASE("measured change rate requires every-step snapshots") {
  TabularMdp mdp = random_ergodic(2, 2, 0.5, 0.9, 10);
  RunOptions options;
  options.snapshot_cadence = 5;
  RunTrace trace = run_main(mdp, 60, exp3_factory(2, 0.1, 0.9), 7, options);
  CHECK(trace.policy_snapshots.size() == 12);
  CHECK_THROWS_AS(measured_change_rate(trace), std::logic_error);
}
