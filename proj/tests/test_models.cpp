#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "support.hpp"
#include "trapinv/models.hpp"

using namespace trapinv;

namespace {

std::vector<std::string> clause_ports(const ClauseDecl& c) {
  std::set<std::string> ps;
  for (const auto& a : c.rendezvous) ps.insert(a.port);
  for (const auto& b : c.broadcasts) ps.insert(b.port);
  return {ps.begin(), ps.end()};
}

// All inclusion-minimal port interpretations satisfying the clause for
// each tuple of bound-variable values, by enumeration of port sets.
std::set<std::pair<std::vector<int>, std::map<std::string, std::uint64_t>>> brute_minimal(
    const ClauseDecl& c, int n) {
  FormulaRef f = clause_formula(c);
  std::vector<std::string> ports = clause_ports(c);
  std::set<std::pair<std::vector<int>, std::map<std::string, std::uint64_t>>> out;
  std::vector<int> tuple(c.bound_vars.size(), 0);
  while (true) {
    Structure base;
    base.size = n;
    for (std::size_t i = 0; i < tuple.size(); ++i) base.positions[c.bound_vars[i]] = tuple[i];
    std::vector<std::map<std::string, std::uint64_t>> models;
    testing::for_each_structure(n, {}, ports, [&](const Structure& s) {
      Structure full = base;
      full.sets = s.sets;
      if (eval_il(f, full)) models.push_back(s.sets);
    });
    for (const auto& mdl : models) {
      bool minimal = true;
      for (const auto& other : models) {
        if (other == mdl) continue;
        bool below = true;
        for (const auto& [p, bits] : other)
          if ((bits & ~mdl.at(p)) != 0) below = false;
        if (below) minimal = false;
      }
      if (minimal) out.insert({tuple, mdl});
    }
    std::size_t i = 0;
    for (; i < tuple.size(); ++i) {
      if (++tuple[i] < n) break;
      tuple[i] = 0;
    }
    if (i == tuple.size()) break;
  }
  return out;
}

}  // namespace

TEST_CASE("philosophers take clause") {
  ValidatedSystem sys = testing::corpus("philosophers");
  auto ms = minimal_models(sys, sys.spec.clauses[0], 3);
  REQUIRE(ms.size() == 3);
  for (int k = 0; k < 3; ++k) {
    CHECK(ms[k].assignment == std::vector<int>{k});
    CHECK(ms[k].ports.at("g") == (1u << k));
    CHECK(ms[k].ports.at("t") == ((1u << k) | (1u << ((k + 1) % 3))));
  }
}

TEST_CASE("unsatisfiable guard") {
  ValidatedSystem sys = validate(parse_system(
      "component A { states s, u; init s; port p: s -> u; }\n"
      "clause c { exists i; when i < i; sync p(i); }"));
  for (int n = 1; n <= 4; ++n) CHECK(minimal_models(sys, sys.spec.clauses[0], n).empty());
}

TEST_CASE("root-guarded clause has one instantiation") {
  ValidatedSystem sys = testing::corpus("alternating");
  const ClauseDecl* root = nullptr;
  for (const auto& c : sys.spec.clauses)
    if (c.name == "root_get_right") root = &c;
  REQUIRE(root);
  // Oracle: evaluate zero(x) for every x.
  int expected = 0;
  for (int x = 0; x < 3; ++x) {
    Structure s;
    s.size = 3;
    s.positions["x"] = x;
    expected += eval_il(root->guard, s);
  }
  auto ms = minimal_models(sys, *root, 3);
  CHECK(static_cast<int>(ms.size()) == expected);
  REQUIRE(ms.size() == 1);
  CHECK(ms[0].assignment == std::vector<int>{0});
}

TEST_CASE("distinct same-type ports at one node are filtered") {
  ValidatedSystem sys = validate(parse_system(
      "component A { states s, u; init s; port p: s -> u; port q: u -> s; }\n"
      "clause c { exists i, j; sync p(i), q(j); }"));
  CHECK(minimal_models(sys, sys.spec.clauses[0], 2, false).size() == 4);
  auto ms = minimal_models(sys, sys.spec.clauses[0], 2);
  REQUIRE(ms.size() == 2);
  for (const auto& m : ms) CHECK(m.assignment[0] != m.assignment[1]);
}

TEST_CASE("enumeration matches brute-force minimal models") {
  for (const auto& name : testing::corpus_names()) {
    ValidatedSystem sys = testing::corpus(name);
    for (const auto& c : sys.spec.clauses) {
      if (clause_ports(c).size() > 3) continue;
      for (int n = 1; n <= 3; ++n) {
        CAPTURE(name);
        CAPTURE(c.name);
        CAPTURE(n);
        std::set<std::pair<std::vector<int>, std::map<std::string, std::uint64_t>>> got;
        for (const auto& m : minimal_models(sys, c, n, false)) {
          std::map<std::string, std::uint64_t> full;
          for (const auto& p : clause_ports(c)) full[p] = m.ports.count(p) ? m.ports.at(p) : 0;
          got.insert({m.assignment, full});
        }
        CHECK(got == brute_minimal(c, n));
      }
    }
  }
}

TEST_CASE("models are minimal") {
  for (const auto& name : testing::corpus_names()) {
    ValidatedSystem sys = testing::corpus(name);
    for (const auto& c : sys.spec.clauses) {
      FormulaRef f = clause_formula(c);
      for (int n = 1; n <= 4; ++n)
        for (const auto& m : minimal_models(sys, c, n)) {
          Structure s;
          s.size = n;
          for (std::size_t i = 0; i < c.bound_vars.size(); ++i) s.positions[c.bound_vars[i]] = m.assignment[i];
          for (const auto& p : clause_ports(c)) s.sets[p] = m.ports.count(p) ? m.ports.at(p) : 0;
          REQUIRE(eval_il(f, s));
          for (const auto& [p, bits] : m.ports)
            for (int u = 0; u < n; ++u)
              if ((bits >> u) & 1) {
                Structure t = s;
                t.sets[p] &= ~(std::uint64_t{1} << u);
                CHECK_FALSE(eval_il(f, t));
              }
        }
    }
  }
}
