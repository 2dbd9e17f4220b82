#include "trapinv/logic.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

namespace trapinv {

namespace fm {

TermRef var(std::string name) {
  return std::make_shared<const Term>(Term{Term::Kind::Var, std::move(name), nullptr});
}

TermRef root() {
  static const TermRef r = std::make_shared<const Term>(Term{Term::Kind::Root, {}, nullptr});
  return r;
}

TermRef succ(TermRef t) {
  return std::make_shared<const Term>(Term{Term::Kind::Succ, {}, std::move(t)});
}

namespace {
FormulaRef make(Op op, TermRef l = nullptr, TermRef r = nullptr, std::string name = {},
                FormulaRef left = nullptr, FormulaRef right = nullptr) {
  return std::make_shared<const Formula>(
      Formula{op, std::move(l), std::move(r), std::move(name), std::move(left), std::move(right)});
}
}  // namespace

FormulaRef truth() {
  static const FormulaRef t = make(Op::True);
  return t;
}
FormulaRef falsity() {
  static const FormulaRef f = make(Op::False);
  return f;
}
FormulaRef leq(TermRef a, TermRef b) { return make(Op::Leq, std::move(a), std::move(b)); }
FormulaRef lt(TermRef a, TermRef b) { return conj(leq(a, b), neg(eq(a, b))); }
FormulaRef eq(TermRef a, TermRef b) { return make(Op::Eq, std::move(a), std::move(b)); }
FormulaRef neq(TermRef a, TermRef b) { return neg(eq(std::move(a), std::move(b))); }
FormulaRef max(TermRef a) { return make(Op::Max, std::move(a)); }
FormulaRef member(std::string pred, TermRef t) {
  return make(Op::Member, std::move(t), nullptr, std::move(pred));
}
FormulaRef neg(FormulaRef f) { return make(Op::Not, nullptr, nullptr, {}, std::move(f)); }
FormulaRef conj(FormulaRef a, FormulaRef b) {
  return make(Op::And, nullptr, nullptr, {}, std::move(a), std::move(b));
}
FormulaRef disj(FormulaRef a, FormulaRef b) {
  return make(Op::Or, nullptr, nullptr, {}, std::move(a), std::move(b));
}
FormulaRef conj(const std::vector<FormulaRef>& fs) {
  if (fs.empty()) return truth();
  FormulaRef acc = fs.back();
  for (auto it = fs.rbegin() + 1; it != fs.rend(); ++it) acc = conj(*it, acc);
  return acc;
}
FormulaRef disj(const std::vector<FormulaRef>& fs) {
  if (fs.empty()) return falsity();
  FormulaRef acc = fs.back();
  for (auto it = fs.rbegin() + 1; it != fs.rend(); ++it) acc = disj(*it, acc);
  return acc;
}
FormulaRef implies(FormulaRef a, FormulaRef b) {
  return make(Op::Implies, nullptr, nullptr, {}, std::move(a), std::move(b));
}
FormulaRef iff(FormulaRef a, FormulaRef b) {
  return make(Op::Iff, nullptr, nullptr, {}, std::move(a), std::move(b));
}
FormulaRef exists1(std::string v, FormulaRef body) {
  return make(Op::Exists1, nullptr, nullptr, std::move(v), std::move(body));
}
FormulaRef forall1(std::string v, FormulaRef body) {
  return make(Op::Forall1, nullptr, nullptr, std::move(v), std::move(body));
}
FormulaRef exists2(std::string v, FormulaRef body) {
  return make(Op::Exists2, nullptr, nullptr, std::move(v), std::move(body));
}
FormulaRef forall2(std::string v, FormulaRef body) {
  return make(Op::Forall2, nullptr, nullptr, std::move(v), std::move(body));
}

namespace {
FormulaRef quantify(Op op, const std::vector<std::string>& vs, FormulaRef body) {
  for (auto it = vs.rbegin(); it != vs.rend(); ++it) body = make(op, nullptr, nullptr, *it, body);
  return body;
}
}  // namespace

FormulaRef exists1(const std::vector<std::string>& vs, FormulaRef body) {
  return quantify(Op::Exists1, vs, std::move(body));
}
FormulaRef forall1(const std::vector<std::string>& vs, FormulaRef body) {
  return quantify(Op::Forall1, vs, std::move(body));
}
FormulaRef exists2(const std::vector<std::string>& vs, FormulaRef body) {
  return quantify(Op::Exists2, vs, std::move(body));
}
FormulaRef forall2(const std::vector<std::string>& vs, FormulaRef body) {
  return quantify(Op::Forall2, vs, std::move(body));
}

}  // namespace fm

namespace {

bool is_atom(Op op) {
  return op == Op::True || op == Op::False || op == Op::Leq || op == Op::Eq || op == Op::Max ||
         op == Op::Member;
}
bool is_first_order_quantifier(Op op) { return op == Op::Exists1 || op == Op::Forall1; }
bool is_second_order_quantifier(Op op) { return op == Op::Exists2 || op == Op::Forall2; }

FormulaRef rebuild(const FormulaRef& f, FormulaRef left, FormulaRef right) {
  if (left == f->left && right == f->right) return f;
  return std::make_shared<const Formula>(Formula{f->op, f->lhs, f->rhs, f->name, left, right});
}

FormulaRef with_terms(const FormulaRef& f, TermRef lhs, TermRef rhs) {
  return std::make_shared<const Formula>(Formula{f->op, lhs, rhs, f->name, nullptr, nullptr});
}

}  // namespace

bool equal(const TermRef& a, const TermRef& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Term::Kind::Var: return a->name == b->name;
    case Term::Kind::Root: return true;
    case Term::Kind::Succ: return equal(a->arg, b->arg);
  }
  return false;
}

bool equal(const FormulaRef& a, const FormulaRef& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  if (a->op != b->op || a->name != b->name) return false;
  return equal(a->lhs, b->lhs) && equal(a->rhs, b->rhs) && equal(a->left, b->left) &&
         equal(a->right, b->right);
}

namespace {

void collect_term(const TermRef& t, const std::set<std::string>& bound,
                  std::set<std::string>& out) {
  if (!t) return;
  if (t->kind == Term::Kind::Var) {
    if (!bound.count(t->name)) out.insert(t->name);
  } else if (t->kind == Term::Kind::Succ) {
    collect_term(t->arg, bound, out);
  }
}

void collect(const FormulaRef& f, std::set<std::string>& bound1, std::set<std::string>& bound2,
             FreeVariables& out) {
  if (is_atom(f->op)) {
    collect_term(f->lhs, bound1, out.positions);
    collect_term(f->rhs, bound1, out.positions);
    if (f->op == Op::Member && !bound2.count(f->name)) out.sets.insert(f->name);
    return;
  }
  if (is_first_order_quantifier(f->op)) {
    bool fresh = bound1.insert(f->name).second;
    collect(f->left, bound1, bound2, out);
    if (fresh) bound1.erase(f->name);
    return;
  }
  if (is_second_order_quantifier(f->op)) {
    bool fresh = bound2.insert(f->name).second;
    collect(f->left, bound1, bound2, out);
    if (fresh) bound2.erase(f->name);
    return;
  }
  collect(f->left, bound1, bound2, out);
  if (f->right) collect(f->right, bound1, bound2, out);
}

}  // namespace

FreeVariables free_variables(const FormulaRef& f) {
  FreeVariables out;
  std::set<std::string> b1, b2;
  collect(f, b1, b2, out);
  return out;
}

std::size_t formula_size(const FormulaRef& f) {
  if (!f) return 0;
  return 1 + formula_size(f->left) + formula_size(f->right);
}

namespace {

TermRef substitute_term(const TermRef& t, const std::string& v, const TermRef& by) {
  if (!t) return t;
  switch (t->kind) {
    case Term::Kind::Var: return t->name == v ? by : t;
    case Term::Kind::Root: return t;
    case Term::Kind::Succ: {
      auto a = substitute_term(t->arg, v, by);
      return a == t->arg ? t : fm::succ(a);
    }
  }
  return t;
}

}  // namespace

FormulaRef substitute(const FormulaRef& f, const std::string& v, const TermRef& by) {
  if (is_atom(f->op)) {
    auto l = substitute_term(f->lhs, v, by);
    auto r = substitute_term(f->rhs, v, by);
    if (l == f->lhs && r == f->rhs) return f;
    return with_terms(f, l, r);
  }
  if (is_first_order_quantifier(f->op) && f->name == v) return f;
  auto left = substitute(f->left, v, by);
  auto right = f->right ? substitute(f->right, v, by) : nullptr;
  return rebuild(f, left, right);
}

FormulaRef rename_set(const FormulaRef& f, const std::string& from, const std::string& to) {
  if (f->op == Op::Member) {
    if (f->name != from) return f;
    return fm::member(to, f->lhs);
  }
  if (is_atom(f->op)) return f;
  if (is_second_order_quantifier(f->op) && f->name == from) return f;
  auto left = rename_set(f->left, from, to);
  auto right = f->right ? rename_set(f->right, from, to) : nullptr;
  return rebuild(f, left, right);
}

std::string to_string(const TermRef& t) {
  switch (t->kind) {
    case Term::Kind::Var: return t->name;
    case Term::Kind::Root: return "eps";
    case Term::Kind::Succ: return "succ(" + to_string(t->arg) + ")";
  }
  return {};
}

namespace {

void print(const FormulaRef& f, std::ostringstream& os) {
  switch (f->op) {
    case Op::True: os << "true"; return;
    case Op::False: os << "false"; return;
    case Op::Leq: os << to_string(f->lhs) << " <= " << to_string(f->rhs); return;
    case Op::Eq: os << to_string(f->lhs) << " = " << to_string(f->rhs); return;
    case Op::Max: os << "last(" << to_string(f->lhs) << ")"; return;
    case Op::Member: os << f->name << "(" << to_string(f->lhs) << ")"; return;
    case Op::Not:
      os << "!";
      if (is_atom(f->left->op) && f->left->op != Op::Leq && f->left->op != Op::Eq) {
        print(f->left, os);
      } else {
        os << "(";
        print(f->left, os);
        os << ")";
      }
      return;
    case Op::And:
    case Op::Or:
    case Op::Implies:
    case Op::Iff: {
      const char* sym = f->op == Op::And ? " & " : f->op == Op::Or ? " | " : f->op == Op::Implies ? " -> " : " <-> ";
      os << "(";
      print(f->left, os);
      os << sym;
      print(f->right, os);
      os << ")";
      return;
    }
    case Op::Exists1:
    case Op::Forall1:
    case Op::Exists2:
    case Op::Forall2: {
      const char* kw = f->op == Op::Exists1   ? "exists"
                       : f->op == Op::Forall1 ? "forall"
                       : f->op == Op::Exists2 ? "exists2"
                                              : "forall2";
      os << "(" << kw << " " << f->name << ". ";
      print(f->left, os);
      os << ")";
      return;
    }
  }
}

}  // namespace

std::string to_string(const FormulaRef& f) {
  std::ostringstream os;
  print(f, os);
  return os.str();
}

// ---------------------------------------------------------------------------
// flatten / translate

namespace {

bool flat_arg(const TermRef& t) { return t->kind != Term::Kind::Succ; }

bool is_succ_definition(const FormulaRef& f) {
  return f->op == Op::Eq && f->lhs->kind == Term::Kind::Succ && flat_arg(f->lhs->arg) &&
         flat_arg(f->rhs);
}

class Flattener {
 public:
  FormulaRef run(const FormulaRef& f) {
    if (is_atom(f->op)) return atom(f);
    auto left = run(f->left);
    auto right = f->right ? run(f->right) : nullptr;
    return rebuild(f, left, right);
  }

 private:
  std::string fresh() { return std::string(1, kFreshPrefix) + std::to_string(++counter_); }

  // Returns a flat term naming the value of t; definitions are appended.
  TermRef name_of(const TermRef& t, std::vector<std::string>& vars,
                  std::vector<FormulaRef>& defs) {
    if (flat_arg(t)) return t;
    TermRef inner = name_of(t->arg, vars, defs);
    std::string z = fresh();
    vars.push_back(z);
    defs.push_back(fm::eq(fm::succ(inner), fm::var(z)));
    return fm::var(z);
  }

  FormulaRef atom(const FormulaRef& f) {
    if (f->op == Op::True || f->op == Op::False) return f;
    TermRef l = f->lhs, r = f->rhs;
    // Canonical orientation: succ-terms on the left of an equation.
    if (f->op == Op::Eq && flat_arg(l) && !flat_arg(r)) std::swap(l, r);
    std::vector<std::string> vars;
    std::vector<FormulaRef> defs;
    FormulaRef core;
    if (f->op == Op::Eq && !flat_arg(l) && flat_arg(r)) {
      // succ(t) = y: keep the outermost succ inside the atom.
      TermRef inner = name_of(l->arg, vars, defs);
      core = fm::eq(fm::succ(inner), r);
    } else {
      TermRef nl = l ? name_of(l, vars, defs) : nullptr;
      TermRef nr = r ? name_of(r, vars, defs) : nullptr;
      if (vars.empty() && l == f->lhs && r == f->rhs) return f;
      core = with_terms(f, nl, nr);
    }
    if (vars.empty()) return core;
    defs.push_back(core);
    return fm::exists1(vars, fm::conj(defs));
  }

  int counter_ = 0;
};

}  // namespace

FormulaRef flatten(const FormulaRef& f) { return Flattener{}.run(f); }

bool is_flat(const FormulaRef& f) {
  if (is_atom(f->op)) {
    if (is_succ_definition(f)) return true;
    return (!f->lhs || flat_arg(f->lhs)) && (!f->rhs || flat_arg(f->rhs));
  }
  return is_flat(f->left) && (!f->right || is_flat(f->right));
}

FormulaRef translate(const FormulaRef& f) {
  if (is_atom(f->op)) {
    if (is_succ_definition(f)) {
      const TermRef& x = f->lhs->arg;
      const TermRef& y = f->rhs;
      return fm::disj(fm::conj(fm::neg(fm::max(x)), f),
                      fm::conj(fm::max(x), fm::eq(y, fm::root())));
    }
    if ((f->lhs && !flat_arg(f->lhs)) || (f->rhs && !flat_arg(f->rhs)))
      throw std::invalid_argument("translate: formula is not flat: " + to_string(f));
    return f;
  }
  auto left = translate(f->left);
  auto right = f->right ? translate(f->right) : nullptr;
  return rebuild(f, left, right);
}

// ---------------------------------------------------------------------------
// Evaluation

Evaluator::Evaluator(const FormulaRef& f, Semantics sem) : sem_(sem) {
  FreeVariables fv = free_variables(f);
  std::vector<std::pair<std::string, int>> pos_scope, set_scope;
  for (const auto& v : fv.positions) {
    pos_scope.emplace_back(v, pos_slots_++);
    free_pos_.push_back(v);
  }
  for (const auto& v : fv.sets) {
    set_scope.emplace_back(v, set_slots_++);
    free_sets_.push_back(v);
  }
  root_ = compile(f, pos_scope, set_scope);
  pos_.assign(pos_slots_, 0);
  set_.assign(set_slots_, 0);
}

int Evaluator::compile_term(const TermRef& t, std::vector<std::pair<std::string, int>>& pos_scope) {
  TermNode n{t->kind};
  if (t->kind == Term::Kind::Var) {
    auto it = std::find_if(pos_scope.rbegin(), pos_scope.rend(),
                           [&](const auto& p) { return p.first == t->name; });
    n.slot = it->second;
  } else if (t->kind == Term::Kind::Succ) {
    n.arg = compile_term(t->arg, pos_scope);
  }
  terms_.push_back(n);
  return static_cast<int>(terms_.size()) - 1;
}

int Evaluator::compile(const FormulaRef& f, std::vector<std::pair<std::string, int>>& pos_scope,
                       std::vector<std::pair<std::string, int>>& set_scope) {
  Node n{f->op};
  if (is_atom(f->op)) {
    if (f->lhs) n.a = compile_term(f->lhs, pos_scope);
    if (f->rhs) n.b = compile_term(f->rhs, pos_scope);
    if (f->op == Op::Member) {
      auto it = std::find_if(set_scope.rbegin(), set_scope.rend(),
                             [&](const auto& p) { return p.first == f->name; });
      n.slot = it->second;
    }
  } else if (is_first_order_quantifier(f->op)) {
    n.slot = pos_slots_++;
    pos_scope.emplace_back(f->name, n.slot);
    n.a = compile(f->left, pos_scope, set_scope);
    pos_scope.pop_back();
  } else if (is_second_order_quantifier(f->op)) {
    n.slot = set_slots_++;
    set_scope.emplace_back(f->name, n.slot);
    n.a = compile(f->left, pos_scope, set_scope);
    set_scope.pop_back();
  } else {
    n.a = compile(f->left, pos_scope, set_scope);
    if (f->right) n.b = compile(f->right, pos_scope, set_scope);
  }
  nodes_.push_back(n);
  return static_cast<int>(nodes_.size()) - 1;
}

int Evaluator::term_value(int t) const {
  const TermNode& n = terms_[t];
  switch (n.kind) {
    case Term::Kind::Var: return pos_[n.slot];
    case Term::Kind::Root: return 0;
    case Term::Kind::Succ: {
      int v = term_value(n.arg) + 1;
      if (v < size_) return v;
      return sem_ == Semantics::Ring ? 0 : size_ - 1;
    }
  }
  return 0;
}

bool Evaluator::run(int idx) {
  const Node& n = nodes_[idx];
  switch (n.op) {
    case Op::True: return true;
    case Op::False: return false;
    case Op::Leq: return term_value(n.a) <= term_value(n.b);
    case Op::Eq: return term_value(n.a) == term_value(n.b);
    case Op::Max: return term_value(n.a) == size_ - 1;
    case Op::Member: return (set_[n.slot] >> term_value(n.a)) & 1u;
    case Op::Not: return !run(n.a);
    case Op::And: return run(n.a) && run(n.b);
    case Op::Or: return run(n.a) || run(n.b);
    case Op::Implies: return !run(n.a) || run(n.b);
    case Op::Iff: return run(n.a) == run(n.b);
    case Op::Exists1:
      for (int v = 0; v < size_; ++v) {
        pos_[n.slot] = v;
        if (run(n.a)) return true;
      }
      return false;
    case Op::Forall1:
      for (int v = 0; v < size_; ++v) {
        pos_[n.slot] = v;
        if (!run(n.a)) return false;
      }
      return true;
    case Op::Exists2:
    case Op::Forall2: {
      const bool want = n.op == Op::Exists2;
      const std::uint64_t count = std::uint64_t{1} << size_;
      for (std::uint64_t s = 0; s < count; ++s) {
        set_[n.slot] = s;
        if (run(n.a) == want) return want;
      }
      return !want;
    }
  }
  return false;
}

bool Evaluator::eval(int size, const int* positions, const std::uint64_t* sets) {
  if (size < 1 || size > 63) throw EvalError("universe size must be in [1, 63]");
  size_ = size;
  for (std::size_t i = 0; i < free_pos_.size(); ++i) pos_[i] = positions[i];
  for (std::size_t i = 0; i < free_sets_.size(); ++i) set_[i] = sets[i];
  return run(root_);
}

bool Evaluator::eval(const Structure& s) {
  std::vector<int> pos(free_pos_.size());
  std::vector<std::uint64_t> sets(free_sets_.size());
  for (std::size_t i = 0; i < free_pos_.size(); ++i) {
    auto it = s.positions.find(free_pos_[i]);
    if (it == s.positions.end()) throw EvalError("unassigned position variable " + free_pos_[i]);
    if (it->second < 0 || it->second >= s.size)
      throw EvalError("position of " + free_pos_[i] + " outside the universe");
    pos[i] = it->second;
  }
  const std::uint64_t universe = s.size >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << s.size) - 1;
  for (std::size_t i = 0; i < free_sets_.size(); ++i) {
    auto it = s.sets.find(free_sets_[i]);
    if (it == s.sets.end()) throw EvalError("unassigned set variable " + free_sets_[i]);
    if (it->second & ~universe) throw EvalError("set " + free_sets_[i] + " outside the universe");
    sets[i] = it->second;
  }
  return eval(s.size, pos.data(), sets.data());
}

bool eval_il(const FormulaRef& f, const Structure& s) { return Evaluator(f, Semantics::Ring).eval(s); }

bool eval_ws1s(const FormulaRef& f, const Structure& s) {
  return Evaluator(f, Semantics::Word).eval(s);
}

}  // namespace trapinv

namespace trapinv {

double evaluation_cost(const FormulaRef& f, int size) {
  switch (f->op) {
    case Op::Exists1:
    case Op::Forall1: return 1 + size * evaluation_cost(f->left, size);
    case Op::Exists2:
    case Op::Forall2: return 1 + std::ldexp(1.0, size) * evaluation_cost(f->left, size);
    default: break;
  }
  double c = 1;
  if (f->left) c += evaluation_cost(f->left, size);
  if (f->right) c += evaluation_cost(f->right, size);
  return c;
}

}  // namespace trapinv
