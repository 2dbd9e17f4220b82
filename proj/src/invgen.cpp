#include "trapinv/invgen.hpp"

#include <set>
#include <stdexcept>

namespace trapinv {

std::vector<std::string> StateVariableMap::vars(bool primed) const {
  std::vector<std::string> out;
  for (const auto& s : states) out.push_back(var(s, primed));
  return out;
}

StateVariableMap make_state_map(const ValidatedSystem& sys) { return StateVariableMap{sys.states}; }

namespace {

using namespace fm;

// Reserved name for auxiliary positions; cannot clash with user variables.
const std::string kAux = std::string(1, kFreshPrefix) + "y";

FormulaRef ws1s(const FormulaRef& f) { return translate(flatten(f)); }

FormulaRef psi_at(const Broadcast& b, const TermRef& at) { return substitute(b.guard, b.var, at); }

std::string pre_var(const ValidatedSystem& sys, const StateVariableMap& m, const std::string& port,
                    bool primed) {
  return m.var(sys.pre(port), primed);
}

std::string post_var(const ValidatedSystem& sys, const StateVariableMap& m, const std::string& port,
                     bool primed) {
  return m.var(sys.post(port), primed);
}

using PortVar = std::string (*)(const ValidatedSystem&, const StateVariableMap&, const std::string&, bool);

// Interaction-logic forms (succ terms unflattened).

FormulaRef il_intersects(const ValidatedSystem& sys, const ClauseDecl& c, const StateVariableMap& m,
                         bool primed, PortVar side) {
  std::vector<FormulaRef> parts;
  for (const auto& a : c.rendezvous) parts.push_back(member(side(sys, m, a.port, primed), a.term));
  for (const auto& b : c.broadcasts)
    parts.push_back(exists1(b.var, conj(b.guard, member(side(sys, m, b.port, primed), var(b.var)))));
  return disj(parts);
}

FormulaRef il_trappred(const ValidatedSystem& sys, const StateVariableMap& m, bool primed) {
  std::vector<FormulaRef> parts;
  for (const auto& c : sys.spec.clauses) {
    auto body = implies(conj(effective_guard(sys, c), il_intersects(sys, c, m, primed, pre_var)),
                        il_intersects(sys, c, m, primed, post_var));
    parts.push_back(forall1(c.bound_vars, body));
  }
  return conj(parts);
}

FormulaRef il_marking(const ValidatedSystem& sys, const StateVariableMap& m, bool primed) {
  std::vector<FormulaRef> per_type;
  for (const auto& comp : sys.spec.components) {
    std::vector<FormulaRef> options;
    for (const auto& s : comp.states) {
      std::vector<FormulaRef> lits{member(m.var(s, primed), var("x"))};
      for (const auto& o : comp.states)
        if (o != s) lits.push_back(neg(member(m.var(o, primed), var("x"))));
      options.push_back(conj(lits));
    }
    per_type.push_back(disj(options));
  }
  return forall1("x", conj(per_type));
}

FormulaRef il_initially(const ValidatedSystem& sys, const StateVariableMap& m, bool primed) {
  std::vector<FormulaRef> parts;
  for (const auto& comp : sys.spec.components) parts.push_back(member(m.var(comp.initial, primed), var("x")));
  return exists1("x", disj(parts));
}

FormulaRef il_intersection(const StateVariableMap& m) {
  std::vector<FormulaRef> parts;
  for (const auto& s : m.states)
    parts.push_back(conj(member(m.var(s), var("x")), member(m.var(s, true), var("x"))));
  return exists1("x", disj(parts));
}

FormulaRef il_deadlock(const ValidatedSystem& sys, const StateVariableMap& m) {
  std::vector<FormulaRef> parts;
  for (const auto& c : sys.spec.clauses) {
    std::vector<FormulaRef> blocked;
    for (const auto& a : c.rendezvous) blocked.push_back(neg(member(pre_var(sys, m, a.port, false), a.term)));
    for (const auto& b : c.broadcasts)
      blocked.push_back(exists1(b.var, conj(b.guard, neg(member(pre_var(sys, m, b.port, false), var(b.var))))));
    parts.push_back(forall1(c.bound_vars, implies(effective_guard(sys, c), disj(blocked))));
  }
  return conj(parts);
}

// Exactly one of the rendezvous places lies in V.
FormulaRef il_unique_ex(const ValidatedSystem& sys, const ClauseDecl& c, const StateVariableMap& m,
                        bool primed, PortVar side) {
  std::vector<FormulaRef> options;
  const auto& rv = c.rendezvous;
  for (std::size_t i = 0; i < rv.size(); ++i) {
    std::vector<FormulaRef> lits{member(side(sys, m, rv[i].port, primed), rv[i].term)};
    for (std::size_t o = 0; o < rv.size(); ++o) {
      if (o == i) continue;
      auto in_v = member(side(sys, m, rv[o].port, primed), rv[o].term);
      if (rv[o].port != rv[i].port)
        lits.push_back(neg(in_v));
      else
        lits.push_back(implies(in_v, eq(rv[i].term, rv[o].term)));
    }
    options.push_back(conj(lits));
  }
  return disj(options);
}

// None of the rendezvous places lies in V.
FormulaRef il_disjoint_ex(const ValidatedSystem& sys, const ClauseDecl& c, const StateVariableMap& m,
                          bool primed, PortVar side) {
  std::vector<FormulaRef> lits;
  for (const auto& a : c.rendezvous) lits.push_back(neg(member(side(sys, m, a.port, primed), a.term)));
  return conj(lits);
}

// None of the broadcast places lies in V.
FormulaRef il_disjoint_broadcast(const ValidatedSystem& sys, const ClauseDecl& c,
                                 const StateVariableMap& m, bool primed, PortVar side) {
  if (c.broadcasts.empty()) return truth();
  std::vector<FormulaRef> lits;
  for (const auto& b : c.broadcasts)
    lits.push_back(implies(psi_at(b, var(kAux)), neg(member(side(sys, m, b.port, primed), var(kAux)))));
  return forall1(kAux, conj(lits));
}

// Exactly one of the broadcast places lies in V.
FormulaRef il_unique_broadcast(const ValidatedSystem& sys, const ClauseDecl& c,
                               const StateVariableMap& m, bool primed, PortVar side) {
  std::vector<FormulaRef> options;
  const auto& bs = c.broadcasts;
  for (std::size_t b = 0; b < bs.size(); ++b) {
    const auto& k = bs[b].var;
    const std::string vb = side(sys, m, bs[b].port, primed);
    std::vector<FormulaRef> lits{bs[b].guard, member(vb, var(k))};
    lits.push_back(forall1(kAux, implies(conj(psi_at(bs[b], var(kAux)), member(vb, var(kAux))),
                                         eq(var(kAux), var(k)))));
    for (std::size_t o = 0; o < bs.size(); ++o) {
      if (o == b) continue;
      lits.push_back(forall1(kAux, implies(psi_at(bs[o], var(kAux)),
                                           neg(member(side(sys, m, bs[o].port, primed), var(kAux))))));
    }
    options.push_back(exists1(k, conj(lits)));
  }
  return disj(options);
}

FormulaRef il_unique(const ValidatedSystem& sys, const ClauseDecl& c, const StateVariableMap& m,
                     bool primed, PortVar side) {
  return disj(conj(il_unique_ex(sys, c, m, primed, side), il_disjoint_broadcast(sys, c, m, primed, side)),
              conj(il_unique_broadcast(sys, c, m, primed, side), il_disjoint_ex(sys, c, m, primed, side)));
}

FormulaRef il_unique_initially(const ValidatedSystem& sys, const StateVariableMap& m, bool primed) {
  const auto& comps = sys.spec.components;
  std::vector<FormulaRef> options;
  for (std::size_t t = 0; t < comps.size(); ++t) {
    const std::string v = m.var(comps[t].initial, primed);
    std::vector<FormulaRef> lits{member(v, var("x")),
                                 forall1(kAux, implies(member(v, var(kAux)), eq(var(kAux), var("x"))))};
    for (std::size_t o = 0; o < comps.size(); ++o)
      if (o != t) lits.push_back(forall1(kAux, neg(member(m.var(comps[o].initial, primed), var(kAux)))));
    options.push_back(conj(lits));
  }
  return exists1("x", disj(options));
}

FormulaRef il_unique_intersection(const StateVariableMap& m) {
  auto both = [&](const std::string& s, const TermRef& t) {
    return conj(member(m.var(s), t), member(m.var(s, true), t));
  };
  std::vector<FormulaRef> options;
  for (const auto& s : m.states) {
    std::vector<FormulaRef> lits{both(s, var("x")),
                                 forall1(kAux, implies(both(s, var(kAux)), eq(var(kAux), var("x"))))};
    for (const auto& o : m.states)
      if (o != s) lits.push_back(forall1(kAux, neg(both(o, var(kAux)))));
    options.push_back(conj(lits));
  }
  return exists1("x", disj(options));
}

FormulaRef il_flowpred(const NormalizedSystem& ns, const StateVariableMap& m, bool primed) {
  const auto& sys = ns.system();
  std::vector<FormulaRef> parts{il_unique_initially(sys, m, primed)};
  for (const auto& c : sys.spec.clauses) {
    auto pre = il_intersects(sys, c, m, primed, pre_var);
    auto post = il_intersects(sys, c, m, primed, post_var);
    auto upre = il_unique(sys, c, m, primed, pre_var);
    auto upost = il_unique(sys, c, m, primed, post_var);
    auto body = disj({conj(neg(pre), neg(post)), conj(upre, upost), conj(pre, neg(upre))});
    parts.push_back(forall1(c.bound_vars, implies(effective_guard(sys, c), body)));
  }
  return conj(parts);
}

FormulaRef with_state_sets(const FormulaRef& f, const StateVariableMap& m) {
  FormulaRef g = f;
  for (const auto& s : free_variables(f).sets) {
    bool known = false;
    for (const auto& st : m.states) known = known || st == s;
    if (known) g = rename_set(g, s, m.var(s));
  }
  return g;
}

}  // namespace

NormalizedSystem normalize_clauses(const ValidatedSystem& sys) {
  NormalizedSystem ns;
  ns.sys_ = sys;
  for (auto& c : ns.sys_.spec.clauses) {
    std::vector<Broadcast> merged;
    for (const auto& b : c.broadcasts) {
      Broadcast* into = nullptr;
      for (auto& x : merged)
        if (x.port == b.port) into = &x;
      if (!into) {
        merged.push_back(b);
        continue;
      }
      into->guard = disj(into->guard, substitute(b.guard, b.var, var(into->var)));
      ns.changed_ = true;
    }
    for (auto& b : merged) {
      std::vector<FormulaRef> excl;
      for (const auto& a : c.rendezvous)
        if (a.port == b.port) excl.push_back(neq(var(b.var), a.term));
      if (!excl.empty()) {
        excl.insert(excl.begin(), b.guard);
        b.guard = conj(excl);
        ns.changed_ = true;
      }
    }
    c.broadcasts = std::move(merged);
  }
  return ns;
}

FormulaRef effective_guard(const ValidatedSystem& sys, const ClauseDecl& c) {
  std::vector<FormulaRef> parts{c.guard};
  auto same_type = [&](const std::string& p, const std::string& q) {
    return p != q && sys.type_of_port(p) == sys.type_of_port(q);
  };
  const auto& rv = c.rendezvous;
  const auto& bs = c.broadcasts;
  for (std::size_t i = 0; i < rv.size(); ++i)
    for (std::size_t j = i + 1; j < rv.size(); ++j)
      if (same_type(rv[i].port, rv[j].port)) parts.push_back(neq(rv[i].term, rv[j].term));
  for (const auto& a : rv)
    for (const auto& b : bs)
      if (same_type(a.port, b.port))
        parts.push_back(forall1(kAux, implies(psi_at(b, var(kAux)), neq(var(kAux), a.term))));
  for (std::size_t i = 0; i < bs.size(); ++i)
    for (std::size_t j = i + 1; j < bs.size(); ++j)
      if (same_type(bs[i].port, bs[j].port))
        parts.push_back(forall1(kAux, neg(conj(psi_at(bs[i], var(kAux)), psi_at(bs[j], var(kAux))))));
  return parts.size() == 1 ? c.guard : conj(parts);
}

FormulaRef gen_intersects_pre(const ValidatedSystem& sys, const ClauseDecl& clause,
                              const StateVariableMap& m, bool primed) {
  return ws1s(il_intersects(sys, clause, m, primed, pre_var));
}

FormulaRef gen_intersects_post(const ValidatedSystem& sys, const ClauseDecl& clause,
                               const StateVariableMap& m, bool primed) {
  return ws1s(il_intersects(sys, clause, m, primed, post_var));
}

FormulaRef gen_trappred(const ValidatedSystem& sys, const StateVariableMap& m, bool primed) {
  return ws1s(il_trappred(sys, m, primed));
}

FormulaRef gen_marking(const ValidatedSystem& sys, const StateVariableMap& m, bool primed) {
  return ws1s(il_marking(sys, m, primed));
}

FormulaRef gen_initially(const ValidatedSystem& sys, const StateVariableMap& m, bool primed) {
  return ws1s(il_initially(sys, m, primed));
}

FormulaRef gen_intersection(const StateVariableMap& m) { return ws1s(il_intersection(m)); }

FormulaRef gen_trap_invariant(const ValidatedSystem& sys, const StateVariableMap& m) {
  auto body = implies(conj(il_trappred(sys, m, true), il_initially(sys, m, true)), il_intersection(m));
  return ws1s(forall2(m.vars(true), body));
}

FormulaRef gen_deadlock(const ValidatedSystem& sys, const StateVariableMap& m) {
  return ws1s(il_deadlock(sys, m));
}

FormulaRef gen_deadlock_property(const ValidatedSystem& sys, const StateVariableMap& m) {
  return ws1s(neg(il_deadlock(sys, m)));
}

FormulaRef gen_unique_initially(const ValidatedSystem& sys, const StateVariableMap& m, bool primed) {
  return ws1s(il_unique_initially(sys, m, primed));
}

FormulaRef gen_unique_intersection(const StateVariableMap& m) { return ws1s(il_unique_intersection(m)); }

FormulaRef gen_unique_pre(const NormalizedSystem& ns, const ClauseDecl& clause, const StateVariableMap& m,
                          bool primed) {
  return ws1s(il_unique(ns.system(), clause, m, primed, pre_var));
}

FormulaRef gen_unique_post(const NormalizedSystem& ns, const ClauseDecl& clause,
                           const StateVariableMap& m, bool primed) {
  return ws1s(il_unique(ns.system(), clause, m, primed, post_var));
}

FormulaRef gen_flowpred(const NormalizedSystem& ns, const StateVariableMap& m, bool primed) {
  return ws1s(il_flowpred(ns, m, primed));
}

FormulaRef gen_flow_invariant(const NormalizedSystem& ns, const StateVariableMap& m) {
  return ws1s(forall2(m.vars(true), implies(il_flowpred(ns, m, true), il_unique_intersection(m))));
}

FormulaRef property_formula(const ValidatedSystem& sys, const PropertyDecl& prop, const StateVariableMap& m) {
  validate_property(sys, prop);
  return ws1s(with_state_sets(prop.formula, m));
}

FormulaRef gen_decision_formula(const ValidatedSystem& sys, const FormulaRef& property, bool use_flow,
                                const StateVariableMap& m) {
  FreeVariables fv = free_variables(property);
  std::set<std::string> allowed;
  for (const auto& v : m.vars()) allowed.insert(v);
  if (!fv.positions.empty())
    throw std::invalid_argument("property has free position variable '" + *fv.positions.begin() + "'");
  for (const auto& s : fv.sets)
    if (!allowed.count(s)) throw std::invalid_argument("property mentions unknown state variable '" + s + "'");
  std::vector<FormulaRef> parts{gen_marking(sys, m), gen_trap_invariant(sys, m)};
  if (use_flow) parts.push_back(gen_flow_invariant(normalize_clauses(sys), m));
  parts.push_back(neg(property));
  return conj(parts);
}

}  // namespace trapinv
