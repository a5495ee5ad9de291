#pragma once

#include <iosfwd>
#include <string>

#include "mdplab/mdp.hpp"
#include "mdplab/run.hpp"

namespace mdplab {

// Shortest decimal representation that round-trips the exact double.
std::string format_double(double value);
double parse_double(const std::string& token);

// MDP text format: a header (states, actions, gamma, reward_kind) followed by
// the dense transition blocks (one per action) and the reward table.
std::string mdp_to_text(const TabularMdp& mdp);
TabularMdp mdp_from_text(const std::string& text);

// Trace format: "# key value" metadata lines, a column header
// (t state action reward fed_state gain), one row per step, and the policy
// snapshots. Byte-exact round trip.
std::string trace_to_text(const RunTrace& trace);
RunTrace trace_from_text(const std::string& text);

void write_file(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

}  // namespace mdplab
