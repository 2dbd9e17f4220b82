#pragma once

#include <string>
#include <vector>

#include "trapinv/logic.hpp"
#include "trapinv/syntax.hpp"

namespace trapinv {

// State s is represented by the set variable X_s, its primed copy by X_s'.
struct StateVariableMap {
  std::vector<std::string> states;  // declaration order

  std::string var(const std::string& state, bool primed = false) const {
    return state_set_name(state, primed);
  }
  std::vector<std::string> vars(bool primed = false) const;
};

StateVariableMap make_state_map(const ValidatedSystem& sys);

// Clauses rewritten so that each port carries at most one broadcast and a
// broadcast never covers a node already taken by a rendezvous atom on the
// same port. Only normalize_clauses() creates these.
class NormalizedSystem {
 public:
  const ValidatedSystem& system() const { return sys_; }
  // Whether normalization rewrote any clause.
  bool changed() const { return changed_; }

 private:
  friend NormalizedSystem normalize_clauses(const ValidatedSystem& sys);
  ValidatedSystem sys_;
  bool changed_ = false;
};

NormalizedSystem normalize_clauses(const ValidatedSystem& sys);

// The clause guard strengthened with the requirement that two distinct
// ports of one component type never meet at the same node.
FormulaRef effective_guard(const ValidatedSystem& sys, const ClauseDecl& clause);

// All generators below return WS1S formulas (flattened and translated).
// `primed` selects X' instead of X.
FormulaRef gen_intersects_pre(const ValidatedSystem& sys, const ClauseDecl& clause,
                              const StateVariableMap& m, bool primed = false);
FormulaRef gen_intersects_post(const ValidatedSystem& sys, const ClauseDecl& clause,
                               const StateVariableMap& m, bool primed = false);
FormulaRef gen_trappred(const ValidatedSystem& sys, const StateVariableMap& m, bool primed = false);
FormulaRef gen_marking(const ValidatedSystem& sys, const StateVariableMap& m, bool primed = false);
FormulaRef gen_initially(const ValidatedSystem& sys, const StateVariableMap& m, bool primed = false);
// exists x. OR_s X_s(x) & X_s'(x)
FormulaRef gen_intersection(const StateVariableMap& m);
FormulaRef gen_trap_invariant(const ValidatedSystem& sys, const StateVariableMap& m);
FormulaRef gen_deadlock(const ValidatedSystem& sys, const StateVariableMap& m);
// The deadlock-freedom property: !deadlock(X).
FormulaRef gen_deadlock_property(const ValidatedSystem& sys, const StateVariableMap& m);

FormulaRef gen_unique_initially(const ValidatedSystem& sys, const StateVariableMap& m,
                                bool primed = false);
// Exactly one common place of X and X'.
FormulaRef gen_unique_intersection(const StateVariableMap& m);
FormulaRef gen_unique_pre(const NormalizedSystem& ns, const ClauseDecl& clause,
                          const StateVariableMap& m, bool primed = false);
FormulaRef gen_unique_post(const NormalizedSystem& ns, const ClauseDecl& clause,
                           const StateVariableMap& m, bool primed = false);
FormulaRef gen_flowpred(const NormalizedSystem& ns, const StateVariableMap& m, bool primed = false);
FormulaRef gen_flow_invariant(const NormalizedSystem& ns, const StateVariableMap& m);

// A user property with state predicates s(t) read as X_s(t).
FormulaRef property_formula(const ValidatedSystem& sys, const PropertyDecl& prop,
                            const StateVariableMap& m);

// marking & trap invariant [& flow invariant] & !property, X left free.
// Throws std::invalid_argument when the property has free variables
// outside X.
FormulaRef gen_decision_formula(const ValidatedSystem& sys, const FormulaRef& property, bool use_flow,
                                const StateVariableMap& m);

}  // namespace trapinv
