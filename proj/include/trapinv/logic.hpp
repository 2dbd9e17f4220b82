#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace trapinv {

// Terms and formulas are immutable trees shared through shared_ptr.
// A single AST covers both the interaction logic and WS1S; the two
// logics differ only in how the successor of the last position is read
// (see Semantics).

struct Term;
using TermRef = std::shared_ptr<const Term>;

struct Term {
  enum class Kind { Var, Root, Succ };
  Kind kind;
  std::string name;  // Var only
  TermRef arg;       // Succ only
};

enum class Op {
  True,
  False,
  Leq,     // lhs <= rhs
  Eq,      // lhs = rhs
  Max,     // max(lhs)
  Member,  // name(lhs): port predicate or set variable
  Not,
  And,
  Or,
  Implies,
  Iff,
  Exists1,
  Forall1,
  Exists2,
  Forall2,
};

struct Formula;
using FormulaRef = std::shared_ptr<const Formula>;

struct Formula {
  Op op;
  TermRef lhs;
  TermRef rhs;
  std::string name;  // Member: predicate; quantifiers: bound variable
  FormulaRef left;   // Not, quantifier body, binary left
  FormulaRef right;  // binary right
};

// Builders. conj/disj of an empty list yield true/false.
namespace fm {
TermRef var(std::string name);
TermRef root();
TermRef succ(TermRef t);

FormulaRef truth();
FormulaRef falsity();
FormulaRef leq(TermRef a, TermRef b);
FormulaRef lt(TermRef a, TermRef b);
FormulaRef eq(TermRef a, TermRef b);
FormulaRef neq(TermRef a, TermRef b);
FormulaRef max(TermRef a);
FormulaRef member(std::string pred, TermRef t);
FormulaRef neg(FormulaRef f);
FormulaRef conj(FormulaRef a, FormulaRef b);
FormulaRef disj(FormulaRef a, FormulaRef b);
FormulaRef conj(const std::vector<FormulaRef>& fs);
FormulaRef disj(const std::vector<FormulaRef>& fs);
FormulaRef implies(FormulaRef a, FormulaRef b);
FormulaRef iff(FormulaRef a, FormulaRef b);
FormulaRef exists1(std::string v, FormulaRef body);
FormulaRef forall1(std::string v, FormulaRef body);
FormulaRef exists1(const std::vector<std::string>& vs, FormulaRef body);
FormulaRef forall1(const std::vector<std::string>& vs, FormulaRef body);
FormulaRef exists2(std::string v, FormulaRef body);
FormulaRef forall2(std::string v, FormulaRef body);
FormulaRef exists2(const std::vector<std::string>& vs, FormulaRef body);
FormulaRef forall2(const std::vector<std::string>& vs, FormulaRef body);
}  // namespace fm

bool equal(const TermRef& a, const TermRef& b);
bool equal(const FormulaRef& a, const FormulaRef& b);

struct FreeVariables {
  std::set<std::string> positions;  // first-order
  std::set<std::string> sets;       // predicates and set variables
};
FreeVariables free_variables(const FormulaRef& f);

std::size_t formula_size(const FormulaRef& f);

// Substitutes term `by` for free occurrences of position variable `v`.
// The caller guarantees `by` does not get captured.
FormulaRef substitute(const FormulaRef& f, const std::string& v,
                      const TermRef& by);
// Renames free occurrences of set variable / predicate `from`.
FormulaRef rename_set(const FormulaRef& f, const std::string& from,
                      const std::string& to);

// Deterministic, fully parenthesized printing; the output is accepted by
// parse_formula() as long as no reserved (%-prefixed) names occur.
std::string to_string(const TermRef& t);
std::string to_string(const FormulaRef& f);

// Prefix of variables introduced by flatten(); not a legal DSL identifier.
inline constexpr char kFreshPrefix = '%';

// Rewrites every atom so that succ only occurs as succ(x) = y with x, y
// variables (or the root constant). Equivalent under both semantics.
FormulaRef flatten(const FormulaRef& f);
bool is_flat(const FormulaRef& f);

// Tr: succ(x) = y  ~>  (!max(x) & succ(x) = y) | (max(x) & y = eps).
// Throws std::invalid_argument on unflattened input.
FormulaRef translate(const FormulaRef& f);

// Finite structure over the universe {0, ..., size-1}.
struct Structure {
  int size = 1;
  std::map<std::string, int> positions;
  std::map<std::string, std::uint64_t> sets;  // bit u set iff u in the set
};

class EvalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Semantics {
  Ring,  // interaction logic: succ(n-1) = 0
  Word,  // WS1S over finite words: succ(n-1) = n-1
};

// Variable names are resolved to slots once; eval() then runs over arrays.
// Not thread-safe (scratch buffers are reused); copy one per thread.
class Evaluator {
 public:
  Evaluator(const FormulaRef& f, Semantics sem);

  bool eval(const Structure& s);
  // Free variables in the order of free_positions()/free_sets().
  bool eval(int size, const int* positions, const std::uint64_t* sets);

  const std::vector<std::string>& free_positions() const { return free_pos_; }
  const std::vector<std::string>& free_sets() const { return free_sets_; }

 private:
  struct Node {
    Op op;
    int a = -1;  // term index / child
    int b = -1;
    int slot = -1;
  };
  struct TermNode {
    Term::Kind kind;
    int slot = -1;
    int arg = -1;
  };

  int compile(const FormulaRef& f, std::vector<std::pair<std::string, int>>& pos_scope,
              std::vector<std::pair<std::string, int>>& set_scope);
  int compile_term(const TermRef& t, std::vector<std::pair<std::string, int>>& pos_scope);
  int term_value(int t) const;
  bool run(int node);

  Semantics sem_;
  std::vector<Node> nodes_;
  std::vector<TermNode> terms_;
  int root_ = -1;
  std::vector<std::string> free_pos_;
  std::vector<std::string> free_sets_;
  int pos_slots_ = 0;
  int set_slots_ = 0;
  int size_ = 1;
  std::vector<int> pos_;
  std::vector<std::uint64_t> set_;
};

bool eval_il(const FormulaRef& f, const Structure& s);
bool eval_ws1s(const FormulaRef& f, const Structure& s);

// Upper bound on the number of node visits of a brute-force evaluation over
// a universe of the given size (quantifier ranges multiplied out).
double evaluation_cost(const FormulaRef& f, int size);

// Formula text syntax (shared by guards, properties and tests):
//   f ::= f '<->' f | f '->' f | f '|' f | f '&' f | '!' f
//       | ('exists'|'forall') x, y, ... '.' f
//       | ('exists2'|'forall2') X, Y, ... '.' f
//       | 'true' | 'false' | t ('<='|'<'|'='|'!='|'>='|'>') t
//       | ('max'|'zero'|'last') '(' t ')' | NAME '(' t ')' | '(' f ')'
//   t ::= NAME | 'eps' | 'succ' '(' t ')'
// zero(t) and max(t) are read as 'forall y. t <= y' / 'forall y. y <= t';
// the primitive max atom is written 'last(t)'.
FormulaRef parse_formula(const std::string& text);

struct SourcePos {
  int line = 0;
  int column = 0;
};

class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(SourcePos pos, const std::string& msg)
      : std::runtime_error(std::to_string(pos.line) + ":" + std::to_string(pos.column) + ": " + msg),
        pos_(pos) {}
  SourcePos pos() const { return pos_; }

 private:
  SourcePos pos_;
};

}  // namespace trapinv
