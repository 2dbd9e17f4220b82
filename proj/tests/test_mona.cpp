#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>

#include "support.hpp"
#include "trapinv/invgen.hpp"
#include "trapinv/mona.hpp"

using namespace trapinv;

namespace {

bool balanced(const std::string& s) {
  int depth = 0;
  for (char c : s) {
    depth += c == '(';
    depth -= c == ')';
    if (depth < 0) return false;
  }
  return depth == 0;
}

}  // namespace

TEST_CASE("identifiers") {
  CHECK(mona_identifier("X_w") == "X_w");
  CHECK(mona_identifier("X_w'") == "X_w_p");
  CHECK(mona_identifier("%1") == "v_1");
  CHECK(mona_identifier("in") == "in_");
  CHECK(mona_identifier("ex1") == "ex1_");
}

TEST_CASE("trivial formulas") {
  CHECK(to_mona(fm::truth()) == "m2l-str;\nex1 len0: true;\ntrue;\n");
  CHECK(to_mona(fm::falsity(), 0) == "m2l-str;\nfalse;\n");
  CHECK(to_mona(parse_formula("exists x. x = eps"), 3) ==
        "m2l-str;\nex1 len0, len1, len2: len0 < len1 & len1 < len2;\n(ex1 x: (x = 0));\n");
}

TEST_CASE("atoms") {
  std::string s = to_mona(parse_formula("succ(x) = y"), 1);
  CHECK(s.find("var1 x, y;") != std::string::npos);
  CHECK(s.find("((x < y & ~(ex1 aux: (x < aux & aux < y))) | (x = y & ~(ex1 aux: x < aux)))") !=
        std::string::npos);
  CHECK(to_mona(parse_formula("last(x)"), 0) == "m2l-str;\nvar1 x;\n~(ex1 aux: x < aux);\n");
  CHECK(to_mona(parse_formula("X(x) <-> x <= y"), 0) ==
        "m2l-str;\nvar1 x, y;\nvar2 X;\n((x in X) <=> (x <= y));\n");
  // Nested successors are flattened before export.
  CHECK(to_mona(parse_formula("p(succ(x))"), 0).find("ex1 v_1:") != std::string::npos);
}

TEST_CASE("name clashes are resolved") {
  FormulaRef f = parse_formula("X_w_p(x) & aux(x) & len0(x)");
  f = fm::conj(f, fm::member("X_w'", fm::var("x")));
  std::string s = to_mona(f, 1);
  CHECK(s.find("var2 X_w_p, X_w_p_2, aux, len0;") != std::string::npos);
  CHECK(s.find("ex1 len0_1:") != std::string::npos);
}

TEST_CASE("generated decision formulas export") {
  for (const auto& name : testing::corpus_names()) {
    ValidatedSystem sys = testing::corpus(name);
    StateVariableMap m = make_state_map(sys);
    for (bool flow : {false, true}) {
      std::string s = to_mona(gen_decision_formula(sys, gen_deadlock_property(sys, m), flow, m), 2);
      CAPTURE(name);
      CHECK(s.rfind("m2l-str;\n", 0) == 0);
      CHECK(balanced(s));
      CHECK(s.find('%') == std::string::npos);
      CHECK(s.find('\'') == std::string::npos);
      CHECK(s.find("all2 X_") != std::string::npos);
      CHECK(std::count(s.begin(), s.end(), ';') >= 3);
    }
  }
}
