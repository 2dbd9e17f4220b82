#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "trapinv/syntax.hpp"

namespace trapinv {

// One instantiation of a clause over the universe {0..n-1}.
struct ClauseModel {
  std::vector<int> assignment;                   // values of the clause's bound variables
  std::map<std::string, std::uint64_t> ports;    // port -> node set (bit u = node u)
};

// The clause as an interaction-logic formula with the bound variables free:
// guard & p_1(t_1) & ... & (forall k. psi_j -> q_j(k)) & ...
FormulaRef clause_formula(const ClauseDecl& clause);

// Enumerates the minimal models of a clause, one per satisfying tuple of
// the bound variables. With `axiom_filter`, models in which two distinct
// ports of the same component type share a node are dropped.
std::vector<ClauseModel> minimal_models(const ValidatedSystem& sys, const ClauseDecl& clause, int n,
                                        bool axiom_filter = true);

}  // namespace trapinv
