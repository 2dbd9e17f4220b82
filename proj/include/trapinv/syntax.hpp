#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "trapinv/logic.hpp"

namespace trapinv {

struct TransitionDecl {
  std::string source;
  std::string port;
  std::string target;
  SourcePos pos;
};

struct ComponentTypeDecl {
  std::string name;
  std::vector<std::string> ports;  // in declaration order, one per transition
  std::vector<std::string> states;
  std::string initial;
  std::vector<TransitionDecl> transitions;
  SourcePos pos;
};

// p(t): port p of the component at position t.
struct RendezvousAtom {
  std::string port;
  TermRef term;
  SourcePos pos;
};

// forall var. guard -> port(var)
struct Broadcast {
  std::string var;
  FormulaRef guard;
  std::string port;
  SourcePos pos;
};

struct ClauseDecl {
  std::string name;
  std::vector<std::string> bound_vars;
  FormulaRef guard;  // true when absent
  std::vector<RendezvousAtom> rendezvous;
  std::vector<Broadcast> broadcasts;
  SourcePos pos;
};

// Closed formula over state predicates s(t), read as X_s(t).
struct PropertyDecl {
  std::string name;
  FormulaRef formula;
  SourcePos pos;
};

struct SystemSpec {
  std::vector<ComponentTypeDecl> components;
  std::vector<ClauseDecl> clauses;
  std::vector<PropertyDecl> properties;
};

// Throws SyntaxError with line/column on malformed input or duplicate
// identifiers within one scope.
SystemSpec parse_system(const std::string& text);
// Parses a file containing only property declarations.
std::vector<PropertyDecl> parse_properties(const std::string& text);

std::string print_system(const SystemSpec& spec);
// Structural equality ignoring source positions.
bool same_ast(const SystemSpec& a, const SystemSpec& b);

class ValidationError : public std::runtime_error {
 public:
  ValidationError(SourcePos pos, const std::string& msg)
      : std::runtime_error(std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " + msg),
        pos_(pos) {}
  SourcePos pos() const { return pos_; }

 private:
  SourcePos pos_;
};

struct PortInfo {
  int type = -1;  // index into components
  std::string pre;
  std::string post;
};

struct ValidatedSystem {
  SystemSpec spec;
  std::map<std::string, PortInfo> ports;
  std::map<std::string, int> state_type;
  std::vector<std::string> states;  // all states, declaration order

  const std::string& pre(const std::string& port) const { return ports.at(port).pre; }
  const std::string& post(const std::string& port) const { return ports.at(port).post; }
  int type_of_port(const std::string& port) const { return ports.at(port).type; }
  int num_types() const { return static_cast<int>(spec.components.size()); }
};

ValidatedSystem validate(SystemSpec spec);

// Name of the set variable standing for state s (primed copy: X_s').
inline std::string state_set_name(const std::string& s, bool primed = false) {
  return "X_" + s + (primed ? "'" : "");
}

// Checks that a property only mentions declared states and is closed.
void validate_property(const ValidatedSystem& sys, const PropertyDecl& prop);

ValidatedSystem load_system(const std::string& path);
std::string read_file(const std::string& path);

}  // namespace trapinv
