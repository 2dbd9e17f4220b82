#include "trapinv/mona.hpp"

#include <cctype>
#include <set>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace trapinv {

namespace {

const std::set<std::string>& mona_keywords() {
  static const std::set<std::string> kw = {
      "all0",   "all1",  "all2",    "allpos", "assert",   "const",  "defaultwhere1",
      "defaultwhere2", "empty", "ex0", "ex1", "ex2", "execute", "export", "false", "guide",
      "import", "in",    "include", "inter",  "let0",     "let1",   "let2",
      "lastpos", "m2l-str", "m2l-tree", "macro", "max", "min", "notin", "pred", "prefix",
      "restrict", "root", "sub", "true", "tree", "union", "universe", "var0", "var1", "var2",
      "where", "ws1s", "ws2s", "variant", "succ", "tree_root", "const_tree", "type", "sometype"};
  return kw;
}

struct Namer {
  std::map<std::string, std::string> ids;
  std::set<std::string> taken;

  const std::string& get(const std::string& name) {
    auto it = ids.find(name);
    if (it != ids.end()) return it->second;
    std::string base = mona_identifier(name), id = base;
    for (int k = 2; taken.count(id); ++k) id = base + "_" + std::to_string(k);
    taken.insert(id);
    return ids[name] = id;
  }
};

void collect_names(const FormulaRef& f, std::set<std::string>& out) {
  auto term = [&](const TermRef& t) {
    for (TermRef u = t; u; u = u->arg)
      if (u->kind == Term::Kind::Var) out.insert(u->name);
  };
  term(f->lhs);
  term(f->rhs);
  if (!f->name.empty()) out.insert(f->name);
  if (f->left) collect_names(f->left, out);
  if (f->right) collect_names(f->right, out);
}

class Printer {
 public:
  Printer(Namer& names, std::string aux) : names_(names), aux_(std::move(aux)) {}

  std::string term(const TermRef& t) {
    switch (t->kind) {
      case Term::Kind::Var: return names_.get(t->name);
      case Term::Kind::Root: return "0";
      case Term::Kind::Succ: break;
    }
    throw std::invalid_argument("Mona export expects flattened formulas");
  }

  std::string formula(const FormulaRef& f) {
    switch (f->op) {
      case Op::True: return "true";
      case Op::False: return "false";
      case Op::Leq: return "(" + term(f->lhs) + " <= " + term(f->rhs) + ")";
      case Op::Eq:
        if (f->lhs->kind == Term::Kind::Succ) {
          const std::string x = term(f->lhs->arg), y = term(f->rhs);
          const std::string& z = aux_;
          return "((" + x + " < " + y + " & ~(ex1 " + z + ": (" + x + " < " + z + " & " + z + " < " + y +
                 "))) | (" + x + " = " + y + " & ~(ex1 " + z + ": " + x + " < " + z + ")))";
        }
        return "(" + term(f->lhs) + " = " + term(f->rhs) + ")";
      case Op::Max: return "~(ex1 " + aux_ + ": " + term(f->lhs) + " < " + aux_ + ")";
      case Op::Member: return "(" + term(f->lhs) + " in " + names_.get(f->name) + ")";
      case Op::Not: return "~" + formula(f->left);
      case Op::And: return "(" + formula(f->left) + " & " + formula(f->right) + ")";
      case Op::Or: return "(" + formula(f->left) + " | " + formula(f->right) + ")";
      case Op::Implies: return "(" + formula(f->left) + " => " + formula(f->right) + ")";
      case Op::Iff: return "(" + formula(f->left) + " <=> " + formula(f->right) + ")";
      case Op::Exists1: return "(ex1 " + names_.get(f->name) + ": " + formula(f->left) + ")";
      case Op::Forall1: return "(all1 " + names_.get(f->name) + ": " + formula(f->left) + ")";
      case Op::Exists2: return "(ex2 " + names_.get(f->name) + ": " + formula(f->left) + ")";
      case Op::Forall2: return "(all2 " + names_.get(f->name) + ": " + formula(f->left) + ")";
    }
    return {};
  }

 private:
  Namer& names_;
  std::string aux_;
};

}  // namespace

std::string mona_identifier(const std::string& name) {
  std::string out;
  for (char c : name) {
    if (c == '\'')
      out += "_p";
    else if (c == kFreshPrefix)
      out += "v_";
    else
      out += c;
  }
  if (out.empty() || !std::isalpha(static_cast<unsigned char>(out[0]))) out = "v" + out;
  if (mona_keywords().count(out)) out += "_";
  return out;
}

std::string to_mona(const FormulaRef& f, int min_universe) {
  FormulaRef g = is_flat(f) ? f : flatten(f);
  Namer names;
  std::set<std::string> all;
  collect_names(g, all);
  for (const auto& n : all) names.get(n);
  std::string aux = "aux";
  for (int k = 1; names.taken.count(aux); ++k) aux = "aux" + std::to_string(k);
  names.taken.insert(aux);

  FreeVariables fv = free_variables(g);
  std::ostringstream os;
  os << "m2l-str;\n";
  if (!fv.positions.empty()) {
    os << "var1 ";
    bool first = true;
    for (const auto& v : fv.positions) {
      os << (first ? "" : ", ") << names.get(v);
      first = false;
    }
    os << ";\n";
  }
  if (!fv.sets.empty()) {
    os << "var2 ";
    bool first = true;
    for (const auto& v : fv.sets) {
      os << (first ? "" : ", ") << names.get(v);
      first = false;
    }
    os << ";\n";
  }
  if (min_universe >= 1) {
    // At least min_universe positions.
    std::vector<std::string> ps;
    for (int i = 0; i < min_universe; ++i) {
      std::string p = "len" + std::to_string(i);
      for (int k = 1; names.taken.count(p); ++k) p = "len" + std::to_string(i) + "_" + std::to_string(k);
      names.taken.insert(p);
      ps.push_back(p);
    }
    os << "ex1 ";
    for (std::size_t i = 0; i < ps.size(); ++i) os << (i ? ", " : "") << ps[i];
    os << ": ";
    if (ps.size() == 1) {
      os << "true";
    } else {
      for (std::size_t i = 0; i + 1 < ps.size(); ++i) os << (i ? " & " : "") << ps[i] << " < " << ps[i + 1];
    }
    os << ";\n";
  }
  Printer pr(names, aux);
  os << pr.formula(g) << ";\n";
  return os.str();
}

}  // namespace trapinv
