#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "trapinv/logic.hpp"

namespace trapinv {

struct RunConfig {
  std::string input;
  // "deadlock", "all" (deadlock plus every declared property) or the name
  // of a declared property.
  std::string property = "deadlock";
  std::string property_file;
  bool use_flow = false;
  int min_universe = 2;
  std::vector<int> oracle_sizes;
  std::size_t max_states = 1000000;
  std::size_t max_markings = 1000000;
  // Decision formulas are written here in Mona syntax. With several
  // properties, ".<name>" is appended per property.
  std::string export_path;
  bool timings = false;
};

enum class Outcome { Verified, Unknown, Resource };
const char* to_string(Outcome o);

struct PropertyReport {
  std::string name;
  Outcome outcome = Outcome::Verified;
  std::size_t formula_size = 0;
  int automaton_states = 0;
  double seconds = 0;
  std::string message;  // Resource only
  // Unknown only.
  Structure witness;
  std::string witness_text;  // per-node component states
  bool witness_evaluated = false;
  std::string export_file;
  // Witness classification per oracle run at the witness size:
  // "REACHABLE", "SPURIOUS" or "unresolved (...)".
  std::string witness_oracle;
};

struct OracleReport {
  int n = 0;
  bool partial = false;
  std::string note;
  int places = 0;
  int transitions = 0;
  std::size_t reachable = 0;
  std::size_t deadlocks = 0;
  std::string first_deadlock;
  // check name -> "pass", "FAIL (...)" or "skipped (...)"; ordered by name.
  std::map<std::string, std::string> checks;
};

struct Report {
  std::string system;
  int components = 0;
  int clauses = 0;
  bool use_flow = false;
  bool normalization_changed = false;
  int min_universe = 2;
  std::vector<std::string> warnings;
  std::vector<PropertyReport> properties;
  std::vector<OracleReport> oracles;
  int exit_code = 0;
};

// Throws SyntaxError, ValidationError or std::runtime_error on bad input.
Report run(const RunConfig& config);

// key: value lines, one record per line, stable order.
std::string format_text(const Report& r, bool timings = false);
std::string format_json(const Report& r, bool timings = false);

}  // namespace trapinv
