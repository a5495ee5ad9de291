#include "mdplab/text_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace mdplab {

std::string format_double(double value) {
  char buf[40];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof(buf), "%.*g", precision, value);
    if (std::strtod(buf, nullptr) == value) return buf;
  }
  return buf;
}

double parse_double(const std::string& token) {
  char* end = nullptr;
  double value = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0')
    throw std::invalid_argument("parse_double: bad token '" + token + "'");
  return value;
}

namespace {

class LineReader {
 public:
  explicit LineReader(const std::string& text) : in_(text) {}

  std::string next() {
    std::string line;
    if (!std::getline(in_, line)) throw std::invalid_argument("text format: unexpected end of input");
    ++line_no_;
    return line;
  }

  int line_no() const { return line_no_; }

 private:
  std::istringstream in_;
  int line_no_ = 0;
};

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

void expect(bool ok, const LineReader& reader, const std::string& what) {
  if (!ok)
    throw std::invalid_argument("text format: line " + std::to_string(reader.line_no()) + ": " + what);
}

void append_matrix(std::ostringstream& os, const Matrix& m) {
  for (int i = 0; i < m.rows(); ++i) {
    for (int j = 0; j < m.cols(); ++j) {
      if (j) os << ' ';
      os << format_double(m(i, j));
    }
    os << '\n';
  }
}

Matrix read_matrix(LineReader& reader, int rows, int cols) {
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    auto toks = split(reader.next());
    expect(static_cast<int>(toks.size()) == cols, reader, "expected " + std::to_string(cols) + " values");
    for (int j = 0; j < cols; ++j) m(i, j) = parse_double(toks[j]);
  }
  return m;
}

}  // namespace

std::string mdp_to_text(const TabularMdp& mdp) {
  std::ostringstream os;
  os << "tabular-mdp v1\n";
  os << "states " << mdp.num_states << '\n';
  os << "actions " << mdp.num_actions << '\n';
  os << "gamma " << format_double(mdp.gamma) << '\n';
  os << "reward_kind " << (mdp.reward_kind == RewardKind::kDeterministic ? "deterministic" : "bernoulli")
     << '\n';
  for (int a = 0; a < mdp.num_actions; ++a) {
    os << "transitions action " << a << '\n';
    append_matrix(os, mdp.transitions[a]);
  }
  os << "rewards\n";
  append_matrix(os, mdp.mean_rewards);
  return os.str();
}

TabularMdp mdp_from_text(const std::string& text) {
  LineReader reader(text);
  std::string first = reader.next();
  while (!first.empty() && first.front() == '#') first = reader.next();  // leading comments
  expect(first == "tabular-mdp v1", reader, "bad magic line");

  TabularMdp mdp;
  auto toks = split(reader.next());
  expect(toks.size() == 2 && toks[0] == "states", reader, "expected 'states N'");
  mdp.num_states = std::stoi(toks[1]);
  toks = split(reader.next());
  expect(toks.size() == 2 && toks[0] == "actions", reader, "expected 'actions N'");
  mdp.num_actions = std::stoi(toks[1]);
  toks = split(reader.next());
  expect(toks.size() == 2 && toks[0] == "gamma", reader, "expected 'gamma x'");
  mdp.gamma = parse_double(toks[1]);
  toks = split(reader.next());
  expect(toks.size() == 2 && toks[0] == "reward_kind", reader, "expected 'reward_kind k'");
  if (toks[1] == "deterministic")
    mdp.reward_kind = RewardKind::kDeterministic;
  else if (toks[1] == "bernoulli")
    mdp.reward_kind = RewardKind::kBernoulli;
  else
    expect(false, reader, "unknown reward kind '" + toks[1] + "'");

  mdp.transitions.reserve(mdp.num_actions);
  for (int a = 0; a < mdp.num_actions; ++a) {
    toks = split(reader.next());
    expect(toks.size() == 3 && toks[0] == "transitions" && toks[1] == "action" &&
               std::stoi(toks[2]) == a,
           reader, "expected 'transitions action " + std::to_string(a) + "'");
    mdp.transitions.push_back(read_matrix(reader, mdp.num_states, mdp.num_states));
  }
  toks = split(reader.next());
  expect(toks.size() == 1 && toks[0] == "rewards", reader, "expected 'rewards'");
  mdp.mean_rewards = read_matrix(reader, mdp.num_states, mdp.num_actions);
  mdp.validate();
  return mdp;
}

std::string trace_to_text(const RunTrace& trace) {
  std::ostringstream os;
  os << "run-trace v1\n";
  os << "# seed " << trace.seed << '\n';
  os << "# steps " << trace.num_steps << '\n';
  os << "# horizon " << trace.horizon << '\n';
  os << "# gamma " << format_double(trace.gamma) << '\n';
  os << "# learner " << trace.options.learner_kind << '\n';
  os << "# eta " << format_double(trace.options.eta) << '\n';
  os << "# delay " << trace.options.delay << '\n';
  os << "# snapshot_cadence " << trace.options.snapshot_cadence << '\n';
  os << "# initial_state " << trace.options.initial_state << '\n';
  os << "# raw_gain_exponent " << (trace.options.raw_gain_exponent ? 1 : 0) << '\n';
  os << "# horizon_override " << trace.options.horizon_override << '\n';
  os << "# num_slots " << trace.num_slots << '\n';
  os << "# final_state " << trace.final_state << '\n';
  os << "# config_hash " << trace.options.config_hash << '\n';
  os << "columns t state action reward fed_state gain\n";

  std::vector<int> fed_state(trace.steps.size() + 1, -1);
  std::vector<double> fed_gain(trace.steps.size() + 1, 0.0);
  for (const FeedbackEvent& ev : trace.feedback_log) {
    fed_state[static_cast<size_t>(ev.t_delivered)] = ev.state;
    fed_gain[static_cast<size_t>(ev.t_delivered)] = ev.gain;
  }
  for (const Step& s : trace.steps) {
    os << s.t << ' ' << s.state << ' ' << s.action << ' ' << format_double(s.reward) << ' '
       << fed_state[static_cast<size_t>(s.t)] << ' '
       << format_double(fed_gain[static_cast<size_t>(s.t)]) << '\n';
  }

  const int snap_count = static_cast<int>(trace.policy_snapshots.size());
  if (snap_count > 0) {
    const auto& first = trace.policy_snapshots.front();
    os << "snapshots " << snap_count << ' ' << first.rows() << ' ' << first.cols() << '\n';
    for (const Matrix& m : trace.policy_snapshots) append_matrix(os, m);
  } else {
    os << "snapshots 0 0 0\n";
  }

  os << "slot_changes " << trace.slot_change.size() << '\n';
  for (size_t i = 0; i < trace.slot_change.size(); ++i)
    os << format_double(trace.slot_change[i]) << ' ' << trace.slot_rows_changed[i] << '\n';
  os << "end\n";
  return os.str();
}

RunTrace trace_from_text(const std::string& text) {
  LineReader reader(text);
  expect(reader.next() == "run-trace v1", reader, "bad magic line");

  RunTrace trace;
  auto meta = [&](const char* key) {
    auto toks = split(reader.next());
    expect(toks.size() == 3 && toks[0] == "#" && toks[1] == key, reader,
           std::string("expected '# ") + key + " value'");
    return toks[2];
  };
  trace.seed = std::stoull(meta("seed"));
  trace.num_steps = std::stoll(meta("steps"));
  trace.horizon = std::stoi(meta("horizon"));
  trace.gamma = parse_double(meta("gamma"));
  trace.options.learner_kind = meta("learner");
  trace.options.eta = parse_double(meta("eta"));
  trace.options.delay = std::stoi(meta("delay"));
  trace.options.snapshot_cadence = std::stoi(meta("snapshot_cadence"));
  trace.options.initial_state = std::stoi(meta("initial_state"));
  trace.options.raw_gain_exponent = meta("raw_gain_exponent") == "1";
  trace.options.horizon_override = std::stoi(meta("horizon_override"));
  trace.num_slots = std::stoi(meta("num_slots"));
  trace.final_state = std::stoi(meta("final_state"));
  trace.options.config_hash = meta("config_hash");

  expect(reader.next() == "columns t state action reward fed_state gain", reader,
         "bad column header");
  trace.steps.reserve(trace.num_steps);
  for (int64_t t = 1; t <= trace.num_steps; ++t) {
    auto toks = split(reader.next());
    expect(toks.size() == 6, reader, "expected 6 columns");
    Step s;
    s.t = std::stoll(toks[0]);
    s.state = std::stoi(toks[1]);
    s.action = std::stoi(toks[2]);
    s.reward = parse_double(toks[3]);
    expect(s.t == t, reader, "step index out of order");
    trace.steps.push_back(s);
    const int fed = std::stoi(toks[4]);
    if (fed >= 0)
      trace.feedback_log.push_back({t, t - trace.horizon, fed, parse_double(toks[5])});
  }

  auto toks = split(reader.next());
  expect(toks.size() == 4 && toks[0] == "snapshots", reader, "expected snapshots header");
  const int count = std::stoi(toks[1]);
  const int rows = std::stoi(toks[2]);
  const int cols = std::stoi(toks[3]);
  trace.policy_snapshots.reserve(count);
  for (int i = 0; i < count; ++i) trace.policy_snapshots.push_back(read_matrix(reader, rows, cols));

  toks = split(reader.next());
  expect(toks.size() == 2 && toks[0] == "slot_changes", reader, "expected slot_changes header");
  const int change_count = std::stoi(toks[1]);
  trace.options.record_slot_changes = change_count > 0;
  trace.slot_change.reserve(change_count);
  trace.slot_rows_changed.reserve(change_count);
  for (int i = 0; i < change_count; ++i) {
    auto pair = split(reader.next());
    expect(pair.size() == 2, reader, "expected 'change rows'");
    trace.slot_change.push_back(parse_double(pair[0]));
    trace.slot_rows_changed.push_back(std::stoi(pair[1]));
  }
  expect(reader.next() == "end", reader, "missing end marker");
  return trace;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << content;
  if (!out) throw std::runtime_error("write failed: " + path);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace mdplab
