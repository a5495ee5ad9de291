#include <filesystem>

#include "doctest.h"
#include "mdplab/config.hpp"
#include "mdplab/driver.hpp"
#include "mdplab/envs.hpp"
#include "mdplab/rng.hpp"
#include "mdplab/sha1.hpp"
#include "mdplab/text_io.hpp"

using namespace mdplab;

TEST_CASE("format double: exact round trip") {
  for (double v : {0.1, 1.0 / 3.0, 2.0 / 3.0, 1e-17, 123456.789, 0.9999999999999999, 0.0}) {
    CHECK(parse_double(format_double(v)) == v);
    CHECK(parse_double(format_double(-v)) == -v);
  }
  CHECK_THROWS_AS(parse_double("12x"), std::invalid_argument);
}

TEST_CASE("sha1: known vectors") {
  CHECK(sha1_hex("") == "da39a3ee5e6b4b0d3255bfef95601890afd80709");
  CHECK(sha1_hex("abc") == "a9993e364706816aba3e25717850c26c9cd0d89d");
  CHECK(sha1_hex("abcdbcdecdefdefgefghfghighijhijkijkljklmklmnlmnomnopnopq") ==
        "84983e441c3bd26ebaae4aa1f95129e5e54670f1");
  // matches `echo hello | git hash-object --stdin`
  CHECK(git_blob_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
  // long input crosses the two-block padding path
  std::string long_input(1000, 'a');
  CHECK(sha1_hex(long_input) == "291e9a6c66994949b57ba5e650361e98fc36b1ba");
}

TEST_CASE("mdp text format: exact decimal round trip") {
  TabularMdp mdp = random_ergodic(4, 3, 0.3, 0.9, 77);
  std::string text = mdp_to_text(mdp);
  TabularMdp back = mdp_from_text(text);
  CHECK(back.num_states == 4);
  CHECK(back.gamma == mdp.gamma);
  for (int a = 0; a < 3; ++a)
    CHECK((back.transitions[a].array() == mdp.transitions[a].array()).all());
  CHECK((back.mean_rewards.array() == mdp.mean_rewards.array()).all());
  CHECK(mdp_to_text(back) == text);
  CHECK_THROWS_AS(mdp_from_text("not an mdp"), std::invalid_argument);
}

TEST_CASE("trace text format: byte-exact round trip") {
  TabularMdp mdp = random_ergodic(3, 2, 0.3, 0.9, 78);
  LearnerFactory factory = [] { return std::make_unique<Exp3>(2, 0.1, 0.9); };
  RunOptions options;
  options.learner_kind = "exp3";
  options.eta = 0.1;
  RunTrace trace = run_main(mdp, 120, factory, 5, options);
  std::string text = trace_to_text(trace);
  RunTrace back = trace_from_text(text);
  CHECK(back.num_steps == trace.num_steps);
  CHECK(back.horizon == trace.horizon);
  CHECK(back.feedback_log.size() == trace.feedback_log.size());
  CHECK(trace_to_text(back) == text);
}

TEST_CASE("trace text format: round trip across option variants") {
  TabularMdp mdp = random_ergodic(3, 2, 0.3, 0.9, 79);
  LearnerFactory factory = [] { return std::make_unique<Exp3>(2, 0.1, 0.9); };
  for (int variant = 0; variant < 4; ++variant) {
    RunOptions options;
    options.snapshot_cadence = variant % 2 ? 7 : 1;
    options.raw_gain_exponent = variant >= 2;
    options.record_slot_changes = variant != 1;
    RunTrace trace = run_main(mdp, 90, factory, 11 + variant, options);
    std::string text = trace_to_text(trace);
    CHECK(trace_to_text(trace_from_text(text)) == text);
  }
}

TEST_CASE("config parser rejects arbitrary garbage without crashing") {
  RngStream rng(31415, 1);
  int parsed = 0;
  for (int trial = 0; trial < 300; ++trial) {
    std::string text;
    const int len = static_cast<int>(rng.integer(60));
    for (int i = 0; i < len; ++i)
      text.push_back(static_cast<char>(32 + rng.integer(95)));
    text.push_back('\n');
    try {
      parse_config_text(text);
      ++parsed;
    } catch (const std::invalid_argument&) {
    }
  }
  CHECK(parsed >= 0);  // merely must not crash or loop
}

TEST_CASE("config: full file parses and echoes") {
  const std::string text =
      "# comment\n"
      "[env]\n"
      "kind = random_ergodic\n"
      "states = 4\n"
      "actions = 3\n"
      "mixing = 0.3\n"
      "gamma = 0.9\n"
      "seed = 7\n"
      "[run]\n"
      "steps = 2000\n"
      "seeds = 1..3\n"
      "[learner]\n"
      "kind = exp3\n"
      "eta = 0.05\n"
      "wrapper = on\n"
      "[output]\n"
      "dir = out_test\n"
      "plot = off\n";
  ExperimentConfig cfg = parse_config_text(text);
  CHECK(cfg.env.num_states == 4);
  CHECK(cfg.steps == 2000);
  CHECK(cfg.seeds == std::vector<uint64_t>{1, 2, 3});
  CHECK(cfg.eta_override == 0.05);
  CHECK(cfg.wrapper);
  CHECK(cfg.raw_text == text);
}

TEST_CASE("config: unknown keys are hard errors with line numbers") {
  try {
    parse_config_text("[env]\nkind = random_ergodic\nbogus = 1\n");
    FAIL("expected an exception");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    CHECK(std::string(e.what()).find("bogus") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config_text("[nope]\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text("steps = 5\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text("[run]\nsteps = abc\n"), std::invalid_argument);
  CHECK_THROWS_AS(parse_config_text("[run]\nsteps 5\n"), std::invalid_argument);
}

TEST_CASE("config: seed ranges") {
  CHECK(parse_seed_range("5") == std::vector<uint64_t>{5});
  CHECK(parse_seed_range("2..4") == std::vector<uint64_t>{2, 3, 4});
  CHECK_THROWS(parse_seed_range("4..2"));
}

TEST_CASE("config: empty text yields documented defaults") {
  ExperimentConfig cfg = parse_config_text("");
  CHECK(cfg.env.kind == EnvKind::kRandomErgodic);
  CHECK(cfg.env.num_states == 4);
  CHECK(cfg.env.gamma == 0.9);
  CHECK(cfg.steps == 10000);
  CHECK(cfg.seeds == std::vector<uint64_t>{1});
  CHECK(cfg.learner_kind == "exp3");
  CHECK(cfg.wrapper);
  CHECK(cfg.output_dir == "out");
}

TEST_CASE("driver: run artifacts are reproducible byte for byte") {
  namespace fs = std::filesystem;
  const std::string text =
      "[env]\nkind = random_ergodic\nstates = 3\nactions = 2\nmixing = 0.4\ngamma = 0.9\nseed = 11\n"
      "[run]\nsteps = 150\nseeds = 1..2\n"
      "[learner]\nkind = exp3\nwrapper = on\n"
      "[output]\ndir = DIR\njobs = 2\n";
  auto make_cfg = [&](const std::string& dir) {
    ExperimentConfig cfg = parse_config_text(text);
    cfg.output_dir = (fs::temp_directory_path() / dir).string();
    return cfg;
  };
  ExperimentConfig cfg_a = make_cfg("mdplab_io_a");
  ExperimentConfig cfg_b = make_cfg("mdplab_io_b");
  RunArtifacts a = cli_run(cfg_a);
  RunArtifacts b = cli_run(cfg_b);
  REQUIRE(a.trace_paths.size() == b.trace_paths.size());
  for (size_t i = 0; i < a.trace_paths.size(); ++i)
    CHECK(read_file(a.trace_paths[i]) == read_file(b.trace_paths[i]));
  CHECK(read_file(a.csv_path) == read_file(b.csv_path));
  CHECK(read_file(a.summary_path) == read_file(b.summary_path));
  // header row present after the embedded config
  std::string csv = read_file(a.csv_path);
  CHECK(csv.find("seed,epoch,t,cumulative_global_regret") != std::string::npos);
  CHECK(csv.find("# config_hash " + git_blob_hash(cfg_a.raw_text)) != std::string::npos);
  // the exported environment is readable mdp text
  TabularMdp env = mdp_from_text(read_file((fs::path(cfg_a.output_dir) / "env.txt").string()));
  CHECK(env.num_states == 3);
  fs::remove_all(cfg_a.output_dir);
  fs::remove_all(cfg_b.output_dir);
}

TEST_CASE("driver: doubling mode chains epochs") {
  namespace fs = std::filesystem;
  ExperimentConfig cfg = parse_config_text(
      "[env]\nkind = random_ergodic\nstates = 3\nactions = 2\nmixing = 0.4\ngamma = 0.5\nseed = 3\n"
      "[run]\nsteps = 70\ndoubling = on\nseeds = 1\n"
      "[learner]\nkind = exp3\nwrapper = off\n");
  cfg.output_dir = (fs::temp_directory_path() / "mdplab_io_doubling").string();
  RunArtifacts artifacts = cli_run(cfg);
  CHECK(artifacts.trace_paths.size() == 7);  // epochs 1,2,4,8,16,32,7
  std::string csv = read_file(artifacts.csv_path);
  CHECK(csv.find("\n1,6,") != std::string::npos);  // rows from the last epoch
  fs::remove_all(cfg.output_dir);
}

TEST_CASE("driver: coarse snapshot cadence skips the analysis with a note") {
  namespace fs = std::filesystem;
  ExperimentConfig cfg = parse_config_text(
      "[env]\nkind = random_ergodic\nstates = 3\nactions = 2\nmixing = 0.4\ngamma = 0.5\nseed = 3\n"
      "[run]\nsteps = 60\nseeds = 1\nsnapshot_cadence = 10\n"
      "[learner]\nkind = exp3\nwrapper = off\n");
  cfg.output_dir = (fs::temp_directory_path() / "mdplab_io_cadence").string();
  RunArtifacts artifacts = cli_run(cfg);
  CHECK(artifacts.trace_paths.size() == 1);
  CHECK(read_file(artifacts.summary_path).find("analysis skipped") != std::string::npos);
  fs::remove_all(cfg.output_dir);
}

TEST_CASE("driver: sweep writes ratio columns") {
  namespace fs = std::filesystem;
  ExperimentConfig cfg = parse_config_text(
      "[env]\nkind = random_ergodic\nstates = 3\nactions = 2\nmixing = 0.4\ngamma = 0.5\nseed = 5\n"
      "[run]\nsteps = 100\nseeds = 1..2\n"
      "[learner]\nkind = exp3\nwrapper = off\n"
      "[sweep]\nsteps_list = 50, 100\n");
  cfg.output_dir = (fs::temp_directory_path() / "mdplab_io_sweep").string();
  auto rows = cli_sweep(cfg);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].ratio_to_prev == 0.0);
  CHECK(rows[1].ratio_to_prev == doctest::Approx(rows[1].mean_regret / rows[0].mean_regret));
  CHECK(fs::exists(fs::path(cfg.output_dir) / "sweep_summary.csv"));
  fs::remove_all(cfg.output_dir);
}

TEST_CASE("driver: inspect env prints diagnostics") {
  EnvSpec spec;
  spec.kind = EnvKind::kRandomErgodic;
  spec.num_states = 3;
  spec.num_actions = 2;
  spec.mixing = 1.0;
  spec.gamma = 0.9;
  std::string report = inspect_env(spec);
  CHECK(report.find("beta_hat 0.333") != std::string::npos);
  CHECK(report.find("H=66") != std::string::npos);  // horizon(0.9, 10^4)

  EnvSpec chain;
  chain.kind = EnvKind::kHardChain;
  chain.chain_length = 6;
  chain.gamma = 0.9;
  std::string warn = inspect_env(chain);
  CHECK(warn.find("warning") != std::string::npos);
}
