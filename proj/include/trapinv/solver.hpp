#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "trapinv/logic.hpp"

namespace trapinv {

// Decision procedure for monadic second-order logic over finite words
// (string semantics: the universe is the set of word positions, n >= 1).
//
// A structure over free variables V is encoded as a word of length n over
// the alphabet {0,1}^V: bit v of letter u is set iff u belongs to the set
// assigned to v (a first-order variable is a singleton set). Transitions of
// each state are kept as a multi-terminal decision diagram over the track
// bits whose leaves are target states; tracks are ordered by name.

class ResourceLimit : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SolverOptions {
  std::size_t max_states = 1000000;
};

class TrackAutomaton {
 public:
  struct Track {
    std::string name;
    bool first_order = false;
  };
  // Decision node; leaves have var == kLeaf and lo == target state.
  struct Node {
    int var;
    int lo;
    int hi;
  };
  static constexpr int kLeaf = 1 << 30;

  // One cube: pattern over the tracks ('0', '1', '-') leading to `to`.
  struct Cube {
    int from;
    std::string pattern;
    int to;
  };

  TrackAutomaton() = default;

  const std::vector<Track>& tracks() const { return tracks_; }
  int track_index(const std::string& name) const;
  int num_states() const { return static_cast<int>(roots_.size()); }
  int initial() const { return 0; }
  bool accepting(int s) const { return accepting_[s] != 0; }
  std::size_t num_nodes() const { return nodes_.size(); }
  const std::vector<Node>& nodes() const { return nodes_; }
  int root(int s) const { return roots_[s]; }

  // letter: bit per track, in track order.
  int step(int s, const std::vector<bool>& letter) const;
  // Free variables of the structure must cover all tracks; extra entries
  // are ignored.
  bool accepts(const Structure& s) const;

  std::vector<Cube> cubes() const;
  std::string to_text() const;
  std::string to_dot() const;

 private:
  friend class AutomatonBuilder;
  std::vector<Track> tracks_;
  std::vector<Node> nodes_;
  std::vector<int> roots_;
  std::vector<char> accepting_;
};

// Every operation returns a minimized deterministic complete automaton
// whose initial state is not accepting (the empty word is never accepted).
TrackAutomaton compile(const FormulaRef& f, const SolverOptions& opts = {});
TrackAutomaton intersect(const TrackAutomaton& a, const TrackAutomaton& b,
                         const SolverOptions& opts = {});
TrackAutomaton unite(const TrackAutomaton& a, const TrackAutomaton& b,
                     const SolverOptions& opts = {});
// Relative to the well-formed encodings of a's first-order tracks.
TrackAutomaton complement(const TrackAutomaton& a, const SolverOptions& opts = {});
TrackAutomaton project(const TrackAutomaton& a, const std::vector<std::string>& vars,
                       const SolverOptions& opts = {});
TrackAutomaton minimize(const TrackAutomaton& a);

bool is_empty(const TrackAutomaton& a);
bool language_equal(const TrackAutomaton& a, const TrackAutomaton& b,
                    const SolverOptions& opts = {});

struct Verdict {
  enum class Kind { Unsat, Sat, Resource };
  Kind kind = Kind::Unsat;
  Structure witness;           // Sat only
  bool witness_evaluated = false;  // witness re-checked by brute-force evaluation
  std::string message;         // Resource only
  int automaton_states = 0;
};

const char* to_string(Verdict::Kind k);

// Shortest accepted word of length >= min_universe, decoded. Don't-care
// bits decode to 0.
Verdict decide(const TrackAutomaton& a, int min_universe);
// Compiles and decides. A SAT witness is always re-checked: by eval_ws1s
// when evaluation_cost() stays below `eval_budget`, otherwise by running
// the automaton; a failed check throws std::logic_error.
Verdict decide(const FormulaRef& f, int min_universe, const SolverOptions& opts = {},
               double eval_budget = 2e8);

// Language equality of the two formulas' automata. Throws ResourceLimit.
bool equivalent(const FormulaRef& f, const FormulaRef& g, const SolverOptions& opts = {});

}  // namespace trapinv
