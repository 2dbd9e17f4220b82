#include "trapinv/syntax.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "lexer.hpp"

namespace trapinv {

using detail::Tok;
using detail::TokenStream;

namespace {

void check_fresh(std::set<std::string>& seen, const std::string& name, SourcePos pos,
                 const char* what) {
  if (!seen.insert(name).second)
    throw SyntaxError(pos, std::string("duplicate ") + what + " '" + name + "'");
}

ComponentTypeDecl parse_component(TokenStream& ts) {
  ComponentTypeDecl c;
  c.pos = ts.peek().pos;
  ts.expect_keyword("component");
  c.name = ts.expect_ident("component name");
  ts.expect(Tok::LBrace, "'{'");
  std::set<std::string> states;
  bool have_init = false;
  while (!ts.accept(Tok::RBrace)) {
    if (ts.at_keyword("states")) {
      ts.next();
      do {
        SourcePos pos = ts.peek().pos;
        std::string s = ts.expect_ident("state name");
        check_fresh(states, s, pos, "state");
        c.states.push_back(s);
      } while (ts.accept(Tok::Comma));
      ts.expect(Tok::Semi, "';'");
    } else if (ts.at_keyword("init")) {
      SourcePos pos = ts.peek().pos;
      ts.next();
      if (have_init) throw SyntaxError(pos, "duplicate init declaration in " + c.name);
      have_init = true;
      c.initial = ts.expect_ident("initial state");
      ts.expect(Tok::Semi, "';'");
    } else if (ts.at_keyword("port")) {
      TransitionDecl t;
      t.pos = ts.peek().pos;
      ts.next();
      t.port = ts.expect_ident("port name");
      ts.expect(Tok::Colon, "':'");
      t.source = ts.expect_ident("source state");
      ts.expect(Tok::Arrow, "'->'");
      t.target = ts.expect_ident("target state");
      ts.expect(Tok::Semi, "';'");
      c.ports.push_back(t.port);
      c.transitions.push_back(t);
    } else {
      ts.fail("expected 'states', 'init', 'port' or '}'");
    }
  }
  if (!have_init) throw SyntaxError(c.pos, "component " + c.name + " has no init declaration");
  return c;
}

RendezvousAtom parse_port_atom(TokenStream& ts) {
  RendezvousAtom a;
  a.pos = ts.peek().pos;
  a.port = ts.expect_ident("port name");
  ts.expect(Tok::LParen, "'('");
  a.term = detail::parse_term(ts);
  ts.expect(Tok::RParen, "')'");
  return a;
}

ClauseDecl parse_clause(TokenStream& ts) {
  ClauseDecl c;
  c.pos = ts.peek().pos;
  ts.expect_keyword("clause");
  c.name = ts.expect_ident("clause name");
  ts.expect(Tok::LBrace, "'{'");
  std::set<std::string> vars;
  bool have_exists = false, have_when = false, have_sync = false;
  while (!ts.accept(Tok::RBrace)) {
    SourcePos pos = ts.peek().pos;
    if (ts.at_keyword("exists")) {
      ts.next();
      if (have_exists) throw SyntaxError(pos, "duplicate exists declaration");
      have_exists = true;
      do {
        SourcePos vp = ts.peek().pos;
        std::string v = ts.expect_ident("variable name");
        check_fresh(vars, v, vp, "variable");
        c.bound_vars.push_back(v);
      } while (ts.accept(Tok::Comma));
      ts.expect(Tok::Semi, "';'");
    } else if (ts.at_keyword("when")) {
      ts.next();
      if (have_when) throw SyntaxError(pos, "duplicate when declaration");
      have_when = true;
      c.guard = detail::parse_formula(ts);
      ts.expect(Tok::Semi, "';'");
    } else if (ts.at_keyword("sync")) {
      ts.next();
      if (have_sync) throw SyntaxError(pos, "duplicate sync declaration");
      have_sync = true;
      do {
        c.rendezvous.push_back(parse_port_atom(ts));
      } while (ts.accept(Tok::Comma));
      ts.expect(Tok::Semi, "';'");
    } else if (ts.at_keyword("broadcast")) {
      ts.next();
      Broadcast b;
      b.pos = pos;
      b.port = ts.expect_ident("port name");
      ts.expect(Tok::LParen, "'('");
      b.var = ts.expect_ident("broadcast variable");
      ts.expect(Tok::RParen, "')'");
      if (ts.at_keyword("when")) {
        ts.next();
        b.guard = detail::parse_formula(ts);
      } else {
        b.guard = fm::truth();
      }
      ts.expect(Tok::Semi, "';'");
      c.broadcasts.push_back(b);
    } else {
      ts.fail("expected 'exists', 'when', 'sync', 'broadcast' or '}'");
    }
  }
  if (!have_exists) throw SyntaxError(c.pos, "clause " + c.name + " has no exists declaration");
  if (!c.guard) c.guard = fm::truth();
  return c;
}

PropertyDecl parse_property(TokenStream& ts) {
  PropertyDecl p;
  p.pos = ts.peek().pos;
  ts.expect_keyword("property");
  p.name = ts.expect_ident("property name");
  ts.expect(Tok::Colon, "':'");
  p.formula = detail::parse_formula(ts);
  ts.expect(Tok::Semi, "';'");
  return p;
}

}  // namespace

SystemSpec parse_system(const std::string& text) {
  TokenStream ts(detail::tokenize(text));
  SystemSpec spec;
  std::set<std::string> components, clauses, properties;
  while (!ts.at(Tok::End)) {
    SourcePos pos = ts.peek().pos;
    if (ts.at_keyword("component")) {
      spec.components.push_back(parse_component(ts));
      check_fresh(components, spec.components.back().name, pos, "component");
    } else if (ts.at_keyword("clause")) {
      spec.clauses.push_back(parse_clause(ts));
      check_fresh(clauses, spec.clauses.back().name, pos, "clause");
    } else if (ts.at_keyword("property")) {
      spec.properties.push_back(parse_property(ts));
      check_fresh(properties, spec.properties.back().name, pos, "property");
    } else {
      ts.fail("expected 'component', 'clause' or 'property'");
    }
  }
  if (spec.components.empty()) ts.fail("expected at least one component declaration");
  return spec;
}

std::vector<PropertyDecl> parse_properties(const std::string& text) {
  TokenStream ts(detail::tokenize(text));
  std::vector<PropertyDecl> out;
  std::set<std::string> names;
  while (!ts.at(Tok::End)) {
    SourcePos pos = ts.peek().pos;
    out.push_back(parse_property(ts));
    check_fresh(names, out.back().name, pos, "property");
  }
  if (out.empty()) ts.fail("expected a property declaration");
  return out;
}

namespace {

std::string join(const std::vector<std::string>& xs, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += sep;
    out += xs[i];
  }
  return out;
}

}  // namespace

std::string print_system(const SystemSpec& spec) {
  std::ostringstream os;
  for (const auto& c : spec.components) {
    os << "component " << c.name << " {\n";
    os << "  states " << join(c.states, ", ") << ";\n";
    os << "  init " << c.initial << ";\n";
    for (const auto& t : c.transitions)
      os << "  port " << t.port << ": " << t.source << " -> " << t.target << ";\n";
    os << "}\n\n";
  }
  for (const auto& c : spec.clauses) {
    os << "clause " << c.name << " {\n";
    os << "  exists " << join(c.bound_vars, ", ") << ";\n";
    if (c.guard->op != Op::True) os << "  when " << to_string(c.guard) << ";\n";
    if (!c.rendezvous.empty()) {
      os << "  sync ";
      for (std::size_t i = 0; i < c.rendezvous.size(); ++i) {
        if (i) os << ", ";
        os << c.rendezvous[i].port << "(" << to_string(c.rendezvous[i].term) << ")";
      }
      os << ";\n";
    }
    for (const auto& b : c.broadcasts) {
      os << "  broadcast " << b.port << "(" << b.var << ")";
      if (b.guard->op != Op::True) os << " when " << to_string(b.guard);
      os << ";\n";
    }
    os << "}\n\n";
  }
  for (const auto& p : spec.properties)
    os << "property " << p.name << ": " << to_string(p.formula) << ";\n";
  return os.str();
}

bool same_ast(const SystemSpec& a, const SystemSpec& b) {
  if (a.components.size() != b.components.size() || a.clauses.size() != b.clauses.size() ||
      a.properties.size() != b.properties.size())
    return false;
  for (std::size_t i = 0; i < a.components.size(); ++i) {
    const auto &x = a.components[i], &y = b.components[i];
    if (x.name != y.name || x.ports != y.ports || x.states != y.states || x.initial != y.initial ||
        x.transitions.size() != y.transitions.size())
      return false;
    for (std::size_t k = 0; k < x.transitions.size(); ++k) {
      const auto &s = x.transitions[k], &t = y.transitions[k];
      if (s.source != t.source || s.port != t.port || s.target != t.target) return false;
    }
  }
  for (std::size_t i = 0; i < a.clauses.size(); ++i) {
    const auto &x = a.clauses[i], &y = b.clauses[i];
    if (x.name != y.name || x.bound_vars != y.bound_vars || !equal(x.guard, y.guard) ||
        x.rendezvous.size() != y.rendezvous.size() || x.broadcasts.size() != y.broadcasts.size())
      return false;
    for (std::size_t k = 0; k < x.rendezvous.size(); ++k)
      if (x.rendezvous[k].port != y.rendezvous[k].port ||
          !equal(x.rendezvous[k].term, y.rendezvous[k].term))
        return false;
    for (std::size_t k = 0; k < x.broadcasts.size(); ++k)
      if (x.broadcasts[k].port != y.broadcasts[k].port ||
          x.broadcasts[k].var != y.broadcasts[k].var ||
          !equal(x.broadcasts[k].guard, y.broadcasts[k].guard))
        return false;
  }
  for (std::size_t i = 0; i < a.properties.size(); ++i)
    if (a.properties[i].name != b.properties[i].name ||
        !equal(a.properties[i].formula, b.properties[i].formula))
      return false;
  return true;
}

namespace {

void term_vars(const TermRef& t, std::set<std::string>& out) {
  for (TermRef u = t; u; u = u->arg)
    if (u->kind == Term::Kind::Var) out.insert(u->name);
}

bool has_second_order(const FormulaRef& f) {
  if (!f) return false;
  if (f->op == Op::Exists2 || f->op == Op::Forall2) return true;
  return has_second_order(f->left) || has_second_order(f->right);
}

// Guards are interaction-logic formulas without predicates.
void check_guard(const FormulaRef& g, const std::set<std::string>& allowed, SourcePos pos,
                 const std::string& where) {
  FreeVariables fv = free_variables(g);
  if (!fv.sets.empty())
    throw ValidationError(pos, where + ": guard may not mention predicate '" + *fv.sets.begin() +
                                   "'");
  if (has_second_order(g))
    throw ValidationError(pos, where + ": guard may not use second-order quantifiers");
  for (const auto& v : fv.positions)
    if (!allowed.count(v))
      throw ValidationError(pos, where + ": unbound variable '" + v + "'");
}

}  // namespace

ValidatedSystem validate(SystemSpec spec) {
  ValidatedSystem sys;
  std::map<std::string, std::string> kind_of;  // name -> "state"/"port"
  for (int ti = 0; ti < static_cast<int>(spec.components.size()); ++ti) {
    const auto& c = spec.components[ti];
    if (c.states.empty()) throw ValidationError(c.pos, "component " + c.name + " has no states");
    for (const auto& s : c.states) {
      if (kind_of.count(s))
        throw ValidationError(c.pos, "overlapping state/port namespaces: '" + s + "' in " + c.name);
      kind_of[s] = "state";
      sys.state_type[s] = ti;
      sys.states.push_back(s);
    }
    if (std::find(c.states.begin(), c.states.end(), c.initial) == c.states.end())
      throw ValidationError(c.pos, "undeclared initial state '" + c.initial + "' in " + c.name);
  }
  for (int ti = 0; ti < static_cast<int>(spec.components.size()); ++ti) {
    const auto& c = spec.components[ti];
    for (const auto& t : c.transitions) {
      for (const auto* s : {&t.source, &t.target})
        if (!sys.state_type.count(*s) || sys.state_type[*s] != ti)
          throw ValidationError(t.pos, "undeclared state '" + *s + "' in " + c.name);
      if (sys.ports.count(t.port)) throw ValidationError(t.pos, "port used twice: '" + t.port + "'");
      if (kind_of.count(t.port))
        throw ValidationError(t.pos, "overlapping state/port namespaces: '" + t.port + "'");
      kind_of[t.port] = "port";
      sys.ports[t.port] = PortInfo{ti, t.source, t.target};
    }
  }
  for (const auto& c : spec.clauses) {
    const std::string where = "clause " + c.name;
    if (c.bound_vars.empty()) throw ValidationError(c.pos, where + ": no bound variables");
    std::set<std::string> bound(c.bound_vars.begin(), c.bound_vars.end());
    check_guard(c.guard, bound, c.pos, where);
    std::set<std::string> used = free_variables(c.guard).positions;
    for (const auto& a : c.rendezvous) {
      if (!sys.ports.count(a.port))
        throw ValidationError(a.pos, where + ": undeclared port '" + a.port + "'");
      std::set<std::string> vs;
      term_vars(a.term, vs);
      for (const auto& v : vs) {
        if (!bound.count(v)) throw ValidationError(a.pos, where + ": unbound variable '" + v + "'");
        used.insert(v);
      }
    }
    for (const auto& b : c.broadcasts) {
      if (!sys.ports.count(b.port))
        throw ValidationError(b.pos, where + ": undeclared port '" + b.port + "'");
      if (bound.count(b.var))
        throw ValidationError(b.pos, where + ": broadcast variable '" + b.var +
                                         "' clashes with a bound variable");
      auto allowed = bound;
      allowed.insert(b.var);
      check_guard(b.guard, allowed, b.pos, where);
    }
    for (const auto& v : c.bound_vars)
      if (!used.count(v))
        throw ValidationError(c.pos, where + ": variable '" + v +
                                         "' occurs neither in the guard nor in a port atom");
  }
  sys.spec = std::move(spec);
  for (const auto& p : sys.spec.properties) validate_property(sys, p);
  return sys;
}

void validate_property(const ValidatedSystem& sys, const PropertyDecl& prop) {
  FreeVariables fv = free_variables(prop.formula);
  if (!fv.positions.empty())
    throw ValidationError(prop.pos, "property " + prop.name + ": free variable '" +
                                        *fv.positions.begin() + "'");
  for (const auto& s : fv.sets)
    if (!sys.state_type.count(s))
      throw ValidationError(prop.pos, "property " + prop.name + ": unknown state '" + s + "'");
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ValidatedSystem load_system(const std::string& path) { return validate(parse_system(read_file(path))); }

}  // namespace trapinv
