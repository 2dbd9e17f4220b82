#include "trapinv/models.hpp"

#include <stdexcept>

namespace trapinv {

FormulaRef clause_formula(const ClauseDecl& clause) {
  std::vector<FormulaRef> parts{clause.guard};
  for (const auto& a : clause.rendezvous) parts.push_back(fm::member(a.port, a.term));
  for (const auto& b : clause.broadcasts)
    parts.push_back(fm::forall1(b.var, fm::implies(b.guard, fm::member(b.port, fm::var(b.var)))));
  return fm::conj(parts);
}

namespace {

// Maps the evaluator's free-variable order onto the clause's bound variables.
std::vector<int> slot_map(const std::vector<std::string>& free, const std::vector<std::string>& vars) {
  std::vector<int> out;
  for (const auto& v : free) {
    int idx = -1;
    for (std::size_t i = 0; i < vars.size(); ++i)
      if (vars[i] == v) idx = static_cast<int>(i);
    out.push_back(idx);
  }
  return out;
}

}  // namespace

std::vector<ClauseModel> minimal_models(const ValidatedSystem& sys, const ClauseDecl& clause, int n,
                                        bool axiom_filter) {
  if (n < 1 || n > 63) throw std::invalid_argument("universe size must be in [1, 63]");
  const int l = static_cast<int>(clause.bound_vars.size());

  Evaluator guard(clause.guard, Semantics::Ring);
  auto guard_slots = slot_map(guard.free_positions(), clause.bound_vars);

  std::vector<Evaluator> terms;
  std::vector<std::vector<int>> term_slots;
  for (const auto& a : clause.rendezvous) {
    // Value of a term t is the unique y with y = t.
    terms.emplace_back(fm::eq(fm::var("%y"), a.term), Semantics::Ring);
    term_slots.push_back(slot_map(terms.back().free_positions(), clause.bound_vars));
  }

  std::vector<Evaluator> bguards;
  std::vector<std::vector<int>> bslots;
  for (const auto& b : clause.broadcasts) {
    bguards.emplace_back(b.guard, Semantics::Ring);
    auto vars = clause.bound_vars;
    vars.push_back(b.var);
    bslots.push_back(slot_map(bguards.back().free_positions(), vars));
  }

  std::vector<ClauseModel> out;
  std::vector<int> tuple(l, 0);
  std::vector<int> buf;
  auto fill = [&](const std::vector<int>& slots, int extra) {
    buf.assign(slots.size(), 0);
    for (std::size_t i = 0; i < slots.size(); ++i)
      buf[i] = slots[i] < l ? (slots[i] < 0 ? extra : tuple[slots[i]]) : extra;
    return buf.data();
  };
  while (true) {
    if (guard.eval(n, fill(guard_slots, 0), nullptr)) {
      ClauseModel m;
      m.assignment = tuple;
      for (std::size_t j = 0; j < clause.rendezvous.size(); ++j) {
        int value = -1;
        for (int y = 0; y < n && value < 0; ++y)
          if (terms[j].eval(n, fill(term_slots[j], y), nullptr)) value = y;
        m.ports[clause.rendezvous[j].port] |= std::uint64_t{1} << value;
      }
      for (std::size_t j = 0; j < clause.broadcasts.size(); ++j) {
        std::uint64_t set = 0;
        for (int k = 0; k < n; ++k)
          if (bguards[j].eval(n, fill(bslots[j], k), nullptr)) set |= std::uint64_t{1} << k;
        m.ports[clause.broadcasts[j].port] |= set;
      }
      bool keep = true;
      if (axiom_filter) {
        for (auto p = m.ports.begin(); p != m.ports.end() && keep; ++p)
          for (auto q = std::next(p); q != m.ports.end() && keep; ++q)
            if (sys.type_of_port(p->first) == sys.type_of_port(q->first) && (p->second & q->second))
              keep = false;
      }
      if (keep) out.push_back(std::move(m));
    }
    int i = l - 1;
    while (i >= 0 && ++tuple[i] == n) tuple[i--] = 0;
    if (i < 0) break;
  }
  return out;
}

}  // namespace trapinv
