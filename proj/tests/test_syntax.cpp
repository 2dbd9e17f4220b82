#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"
#include "trapinv/syntax.hpp"

using namespace trapinv;

namespace {

const char* kFork = R"(
component Fork {
  states f, b;
  init f;
  port t: f -> b;
  port l: b -> f;
}
)";

std::string error_of(const std::string& text) {
  try {
    validate(parse_system(text));
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("philosophers source") {
  SystemSpec spec = parse_system(read_file(testing::source_path("corpus/philosophers.cbs")));
  REQUIRE(spec.components.size() == 2);
  int ports = 0;
  for (const auto& c : spec.components) ports += static_cast<int>(c.ports.size());
  CHECK(ports == 4);
  REQUIRE(spec.clauses.size() == 2);
  const ClauseDecl& get = spec.clauses[0];
  CHECK(get.name == "get");
  CHECK(get.bound_vars == std::vector<std::string>{"i"});
  REQUIRE(get.rendezvous.size() == 3);
  CHECK(get.rendezvous[0].port == "g");
  CHECK(to_string(get.rendezvous[2].term) == "succ(i)");
  CHECK(spec.components[0].pos.line > 0);

  ValidatedSystem sys = validate(spec);
  CHECK(sys.pre("g") == "w");
  CHECK(sys.post("g") == "e");
  CHECK(sys.pre("t") == "f");
  CHECK(sys.post("t") == "b");
  CHECK(sys.type_of_port("t") == 0);
  CHECK(sys.states == std::vector<std::string>{"f", "b", "w", "e"});
}

TEST_CASE("alternating philosophers source") {
  ValidatedSystem sys = testing::corpus("alternating");
  CHECK(sys.num_types() == 3);
  CHECK(sys.spec.clauses.size() == 6);
  // zero(x) is sugar for a universally quantified order atom.
  CHECK(sys.spec.clauses[0].guard->op == Op::Not);
  CHECK(sys.spec.clauses[3].guard->op == Op::Forall1);
}

TEST_CASE("empty input is rejected") {
  CHECK_THROWS_AS(parse_system(""), SyntaxError);
  CHECK_THROWS_AS(parse_system("  # only a comment\n"), SyntaxError);
}

TEST_CASE("syntax errors carry positions") {
  try {
    parse_system("component A {\n  states s;\n  init s\n}");
    FAIL("expected a syntax error");
  } catch (const SyntaxError& e) {
    CHECK(e.pos().line == 4);
  }
  CHECK_THROWS_AS(parse_system("component A { states s; port p: s -> s; }"), SyntaxError);  // no init
  CHECK_THROWS_AS(parse_system("component A { states s, s; init s; }"), SyntaxError);
  CHECK_THROWS_AS(parse_system(std::string(kFork) + kFork), SyntaxError);
  CHECK_THROWS_AS(parse_system(std::string(kFork) + "clause c { sync t(i); }"), SyntaxError);
  CHECK_THROWS_AS(parse_system(std::string(kFork) + "clause c { exists i, i; sync t(i); }"), SyntaxError);
  CHECK_THROWS_AS(parse_system(std::string(kFork) + "clause c { exists i; sync t(succ_1(i)); }"), SyntaxError);
  CHECK_THROWS_AS(parse_system(std::string(kFork) + "clause c { exists exists; sync t(i); }"), SyntaxError);
}

TEST_CASE("validation errors") {
  CHECK(error_of("component A { states s, u; init s; port p: s -> u; port p: u -> s; }")
            .find("port used twice") != std::string::npos);
  CHECK(error_of(std::string(kFork) + "clause c { exists i; sync x(i); }").find("undeclared port") !=
        std::string::npos);
  CHECK(error_of("component A { states s; init u; }").find("u") != std::string::npos);
  CHECK(error_of("component A { states s; init s; port p: s -> v; }").find("undeclared state") !=
        std::string::npos);
  CHECK(error_of(std::string(kFork) + "component B { states f; init f; }").find("overlapping") !=
        std::string::npos);
  CHECK(error_of(std::string(kFork) + "component B { states t; init t; }").find("overlapping") !=
        std::string::npos);
  CHECK_FALSE(error_of(std::string(kFork) + "clause c { exists i, j; sync t(i); }").empty());
  CHECK_FALSE(error_of(std::string(kFork) + "clause c { exists i; when j <= i; sync t(i); }").empty());
  CHECK_FALSE(error_of(std::string(kFork) + "clause c { exists i; when t(i); sync t(i); }").empty());
  CHECK_FALSE(error_of(std::string(kFork) + "clause c { exists i; sync t(i); broadcast l(i) when true; }").empty());
  CHECK(error_of(std::string(kFork) + "clause c { exists i, j; when i < j; sync t(i); }").empty());
}

TEST_CASE("same-type ports at possibly equal indices are accepted") {
  CHECK(error_of(std::string(kFork) + "clause c { exists i, j; sync t(i), l(j); }").empty());
}

TEST_CASE("every corpus file validates and round-trips through the printer") {
  for (const auto& name : testing::corpus_names()) {
    CAPTURE(name);
    SystemSpec spec = parse_system(read_file(testing::source_path("corpus/" + name + ".cbs")));
    CHECK_NOTHROW(validate(spec));
    std::string printed = print_system(spec);
    SystemSpec again = parse_system(printed);
    CHECK(same_ast(spec, again));
    CHECK(print_system(again) == printed);
  }
}

TEST_CASE("broadcasts") {
  ValidatedSystem sys = testing::corpus("broadcast_mutex");
  bool found = false;
  for (const auto& c : sys.spec.clauses)
    for (const auto& b : c.broadcasts) {
      found = true;
      CHECK(b.var == "k");
      CHECK(free_variables(b.guard).positions.count("k") == 1);
    }
  CHECK(found);
}

TEST_CASE("properties") {
  ValidatedSystem sys = testing::corpus("philosophers");
  REQUIRE(sys.spec.properties.size() == 1);
  CHECK(sys.spec.properties[0].name == "exclusion");
  CHECK_NOTHROW(validate_property(sys, sys.spec.properties[0]));

  auto props = parse_properties("property a: forall i. w(i);\nproperty b: exists i. e(i) & b(succ(i));");
  REQUIRE(props.size() == 2);
  CHECK_NOTHROW(validate_property(sys, props[1]));
  auto bad = parse_properties("property c: exists i. z(i);\nproperty d: w(i);");
  CHECK_THROWS(validate_property(sys, bad[0]));
  CHECK_THROWS(validate_property(sys, bad[1]));
  CHECK_THROWS_AS(parse_properties("property a: true; property a: false;"), SyntaxError);
}
