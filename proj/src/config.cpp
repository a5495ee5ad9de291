#include "mdplab/config.hpp"

#include <algorithm>
#include <sstream>

#include "mdplab/text_io.hpp"

namespace mdplab {

namespace {

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail(int line_no, const std::string& what) {
  throw std::invalid_argument("config: line " + std::to_string(line_no) + ": " + what);
}

bool parse_bool(const std::string& value, int line_no) {
  if (value == "on" || value == "true" || value == "1") return true;
  if (value == "off" || value == "false" || value == "0") return false;
  fail(line_no, "expected on/off, got '" + value + "'");
}

int64_t parse_int(const std::string& value, int line_no) {
  try {
    size_t pos = 0;
    int64_t v = std::stoll(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("");
    return v;
  } catch (...) {
    fail(line_no, "expected an integer, got '" + value + "'");
  }
}

double parse_real(const std::string& value, int line_no) {
  try {
    return parse_double(value);
  } catch (...) {
    fail(line_no, "expected a number, got '" + value + "'");
  }
}

std::vector<int64_t> parse_int_list(const std::string& value, int line_no) {
  std::vector<int64_t> out;
  std::string item;
  std::istringstream in(value);
  while (std::getline(in, item, ',')) out.push_back(parse_int(trim(item), line_no));
  if (out.empty()) fail(line_no, "expected a comma-separated list");
  return out;
}

}  // namespace

std::vector<uint64_t> parse_seed_range(const std::string& token) {
  std::vector<uint64_t> out;
  size_t pos = token.find("..");
  if (pos == std::string::npos) {
    out.push_back(std::stoull(token));
    return out;
  }
  uint64_t lo = std::stoull(token.substr(0, pos));
  uint64_t hi = std::stoull(token.substr(pos + 2));
  if (hi < lo) throw std::invalid_argument("seed range '" + token + "' is decreasing");
  for (uint64_t s = lo; s <= hi; ++s) out.push_back(s);
  return out;
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  cfg.raw_text = text;

  std::istringstream in(text);
  std::string raw_line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw_line)) {
    ++line_no;
    std::string line = raw_line;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']') fail(line_no, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "env" && section != "run" && section != "learner" && section != "output" &&
          section != "sweep" && section != "verify")
        fail(line_no, "unknown section [" + section + "]");
      continue;
    }

    size_t eq = line.find('=');
    if (eq == std::string::npos) fail(line_no, "expected 'key = value'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) fail(line_no, "empty key or value");
    if (section.empty()) fail(line_no, "key '" + key + "' outside any section");

    if (section == "env") {
      if (key == "kind") {
        if (value == "hard_chain")
          cfg.env.kind = EnvKind::kHardChain;
        else if (value == "random_ergodic")
          cfg.env.kind = EnvKind::kRandomErgodic;
        else if (value == "two_state")
          cfg.env.kind = EnvKind::kTwoState;
        else if (value == "cycle")
          cfg.env.kind = EnvKind::kCycle;
        else
          fail(line_no, "unknown env kind '" + value + "'");
      } else if (key == "gamma")
        cfg.env.gamma = parse_real(value, line_no);
      else if (key == "states")
        cfg.env.num_states = static_cast<int>(parse_int(value, line_no));
      else if (key == "actions")
        cfg.env.num_actions = static_cast<int>(parse_int(value, line_no));
      else if (key == "mixing")
        cfg.env.mixing = parse_real(value, line_no);
      else if (key == "seed")
        cfg.env.seed = static_cast<uint64_t>(parse_int(value, line_no));
      else if (key == "chain_length")
        cfg.env.chain_length = static_cast<int>(parse_int(value, line_no));
      else if (key == "big_reward")
        cfg.env.big_reward = parse_real(value, line_no);
      else if (key == "cycle_length")
        cfg.env.cycle_length = static_cast<int>(parse_int(value, line_no));
      else
        fail(line_no, "unknown key '" + key + "' in [env]");
    } else if (section == "run") {
      if (key == "steps")
        cfg.steps = parse_int(value, line_no);
      else if (key == "doubling")
        cfg.doubling = parse_bool(value, line_no);
      else if (key == "seeds") {
        try {
          cfg.seeds = parse_seed_range(value);
        } catch (const std::exception& e) {
          fail(line_no, e.what());
        }
      } else if (key == "snapshot_cadence")
        cfg.snapshot_cadence = static_cast<int>(parse_int(value, line_no));
      else if (key == "initial_state")
        cfg.initial_state = static_cast<int>(parse_int(value, line_no));
      else if (key == "horizon_override")
        cfg.horizon_override = static_cast<int>(parse_int(value, line_no));
      else if (key == "eval_tol")
        cfg.eval_tol = parse_real(value, line_no);
      else
        fail(line_no, "unknown key '" + key + "' in [run]");
    } else if (section == "learner") {
      if (key == "kind") {
        if (value != "exp3" && value != "uniform") fail(line_no, "unknown learner '" + value + "'");
        cfg.learner_kind = value;
      } else if (key == "eta")
        cfg.eta_override = parse_real(value, line_no);
      else if (key == "wrapper")
        cfg.wrapper = parse_bool(value, line_no);
      else if (key == "raw_gain_exponent")
        cfg.raw_gain_exponent = parse_bool(value, line_no);
      else
        fail(line_no, "unknown key '" + key + "' in [learner]");
    } else if (section == "output") {
      if (key == "dir")
        cfg.output_dir = value;
      else if (key == "plot")
        cfg.plot = parse_bool(value, line_no);
      else if (key == "jobs")
        cfg.jobs = static_cast<int>(parse_int(value, line_no));
      else
        fail(line_no, "unknown key '" + key + "' in [output]");
    } else if (section == "sweep") {
      if (key == "steps_list")
        cfg.sweep_steps = parse_int_list(value, line_no);
      else
        fail(line_no, "unknown key '" + key + "' in [sweep]");
    } else if (section == "verify") {
      if (key == "only")
        cfg.verify_only = value;
      else if (key == "trials")
        cfg.verify_trials = static_cast<int>(parse_int(value, line_no));
      else if (key == "run_seeds")
        cfg.verify_run_seeds = static_cast<int>(parse_int(value, line_no));
      else if (key == "run_steps")
        cfg.verify_run_steps = parse_int(value, line_no);
      else
        fail(line_no, "unknown key '" + key + "' in [verify]");
    }
  }

  if (cfg.steps < 1) throw std::invalid_argument("config: steps must be positive");
  if (cfg.seeds.empty()) throw std::invalid_argument("config: need at least one seed");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  return parse_config_text(read_file(path));
}

}  // namespace mdplab
