// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
// criterion fails.

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"
#include "trapinv/driver.hpp"
#include "trapinv/invgen.hpp"
#include "trapinv/models.hpp"
#include "trapinv/petri.hpp"
#include "trapinv/solver.hpp"

using namespace trapinv;

namespace {

constexpr double kRunningExampleBudgetSeconds = 10.0;
// Per-structure budget for brute-force evaluation in the instance checks.
constexpr double kEvalBudget = 5e7;

struct Check {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail << "failed: ";
      else detail << "; ";
      detail << what;
      pass = false;
    }
  }
};

FormulaRef ring(const std::string& text) { return translate(flatten(parse_formula(text))); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Marking configuration(const InstanceNet& net, std::initializer_list<std::pair<const char*, int>> ps) {
  Marking w(net.num_places(), false);
  for (const auto& [s, u] : ps) w[net.place_index(s, u)] = true;
  return w;
}

// Set arrays for a place mask, in the evaluator's free-set order.
struct MaskDecoder {
  std::vector<std::vector<int>> place_of;  // [set][node] -> place or -1
  MaskDecoder(const InstanceNet& net, const std::vector<std::string>& sets) {
    for (const auto& name : sets) {
      std::vector<int> row(net.n, -1);
      for (int p = 0; p < net.num_places(); ++p)
        if (state_set_name(net.places[p].state) == name) row[net.places[p].node] = p;
      place_of.push_back(row);
    }
  }
  void decode(std::uint32_t mask, std::vector<std::uint64_t>& out) const {
    out.assign(place_of.size(), 0);
    for (std::size_t i = 0; i < place_of.size(); ++i)
      for (std::size_t u = 0; u < place_of[i].size(); ++u)
        if (place_of[i][u] >= 0 && ((mask >> place_of[i][u]) & 1)) out[i] |= std::uint64_t{1} << u;
  }
};

void criterion1(Check& o) {
  RunConfig c;
  c.input = testing::source_path("corpus/philosophers.cbs");
  auto t0 = std::chrono::steady_clock::now();
  Report r = run(c);
  double secs = seconds_since(t0);
  o.require(r.properties.size() == 1 && r.properties[0].outcome == trapinv::Outcome::Verified,
            "deadlock-freedom not verified");
  o.require(r.exit_code == 0, "exit code " + std::to_string(r.exit_code));
  o.require(secs < kRunningExampleBudgetSeconds, "took " + std::to_string(secs) + " s");
  o.detail << "philosophers deadlock-freedom VERIFIED, traps only, " << secs << " s (budget "
           << kRunningExampleBudgetSeconds << " s)";
}

void criterion2(Check& o) {
  ValidatedSystem sys = testing::corpus("philosophers");
  StateVariableMap m = make_state_map(sys);
  FormulaRef expected_trappred = ring("forall i. (X_w(i) | X_f(i) | X_f(succ(i))) <-> (X_e(i) | X_b(i) | X_b(succ(i)))");
  FormulaRef expected_deadlock = ring("forall i. (!X_w(i) | !X_f(i) | !X_f(succ(i))) & (!X_e(i) | !X_b(i) | !X_b(succ(i)))");
  o.require(equivalent(gen_trappred(sys, m), expected_trappred), "trap predicate differs from the hand-written one");
  o.require(equivalent(gen_deadlock(sys, m), expected_deadlock), "deadlock predicate differs from the hand-written one");
  o.require(equivalent(gen_deadlock_property(sys, m), fm::neg(expected_deadlock)), "deadlock-freedom property differs");
  o.detail << "trappred == hand-written trap constraint; deadlock == hand-written deadlock formula "
              "(and its negation == deadlock-freedom property); automaton language equality";
}

void criterion3(Check& o) {
  ValidatedSystem sys = testing::corpus("alternating");
  InstanceNet net = instantiate(sys, 3);
  InstanceNet active = active_subnet(net);
  PlaceSet q(active.num_places(), false);
  for (const auto& [s, u] : std::vector<std::pair<std::string, int>>{
           {"b", 0}, {"rh", 0}, {"b", 1}, {"w", 1}, {"f", 2}, {"e", 2}})
    q[active.place_index(s, u)] = true;
  std::size_t nonempty = 0, missing = 0;
  for (auto mask : enumerate_traps(active)) {
    if (!mask) continue;
    ++nonempty;
    if (!intersects(mask_to_set(active, mask), q)) ++missing;
  }
  o.require(missing == 0, std::to_string(missing) + " nonempty traps miss the six places");

  Marking prop = configuration(net, {{"b", 0}, {"rh", 0}, {"w", 0}, {"b", 1}, {"w", 1}, {"rw", 1}, {"f", 2},
                                     {"e", 2}, {"rw", 2}});
  ReachabilityGraph g = reachable(net);
  o.require(!contains(g, prop), "the six-place configuration is reachable");
  o.require(meets_all_marked_traps(net, prop), "the six-place configuration misses a marked trap");

  RunConfig c;
  c.input = testing::source_path("corpus/alternating.cbs");
  c.oracle_sizes = {3};
  Report r = run(c);
  const PropertyReport& p = r.properties.at(0);
  o.require(p.outcome == trapinv::Outcome::Unknown, "trap-only verification did not return UNKNOWN");
  o.require(p.witness.size != 3 || p.witness_oracle == "SPURIOUS", "witness not labelled SPURIOUS");
  bool matches_unreachable = p.witness.size == 3 && !contains(g, structure_to_marking(net, p.witness));
  o.require(matches_unreachable, "witness is not an unreachable 3-node configuration");
  o.detail << nonempty << " nonempty traps of the " << active.num_places()
           << "-place active net all meet the six places; trap-only verdict " << to_string(p.outcome)
           << ", witness " << p.witness_text << " labelled " << p.witness_oracle;
}

void criterion4(Check& o) {
  RunConfig c;
  c.input = testing::source_path("corpus/alternating.cbs");
  c.use_flow = true;
  c.oracle_sizes = {3, 4};
  Report r = run(c);
  o.require(r.properties.at(0).outcome == trapinv::Outcome::Verified, "not verified with 1-invariants");
  for (const auto& orc : r.oracles) {
    o.require(!orc.partial && orc.deadlocks == 0, "oracle at n=" + std::to_string(orc.n) + " found deadlocks");
    for (const auto& [k, v] : orc.checks) o.require(v.rfind("FAIL", 0) != 0, k + ": " + v);
  }

  ValidatedSystem sys = testing::corpus("alternating");
  StateVariableMap m = make_state_map(sys);
  NormalizedSystem ns = normalize_clauses(sys);
  InstanceNet net = instantiate(sys, 3);
  Marking prop = configuration(net, {{"b", 0}, {"rh", 0}, {"w", 0}, {"b", 1}, {"w", 1}, {"rw", 1}, {"f", 2},
                                     {"e", 2}, {"rw", 2}});
  Structure s = marking_to_structure(net, prop);

  // The flow invariant fails on this interpretation iff some X' satisfies
  // flowpred but shares not exactly one place with it. Search X' among the
  // structural 1-invariants and evaluate the quantifier body directly.
  FormulaRef flowpred = gen_flowpred(ns, m, true);
  FormulaRef unique = gen_unique_intersection(m);
  std::string refuting;
  for (auto mask : enumerate_structural_one_invariants(net)) {
    Structure t = s;
    for (const auto& [k, v] : marking_to_structure(net, mask_to_set(net, mask), true).sets) t.sets[k] = v;
    if (eval_ws1s(flowpred, t) && !eval_ws1s(unique, t)) {
      PlaceSet w = mask_to_set(net, mask);
      for (int p = 0; p < net.num_places(); ++p)
        if (w[p]) refuting += (refuting.empty() ? "" : " ") + net.place_name(p);
      break;
    }
  }
  o.require(!refuting.empty(), "no flow predicate model refutes the configuration");
  o.require(eval_ws1s(gen_marking(sys, m), s), "configuration is not a legal marking");
  FormulaRef all = fm::conj({gen_marking(sys, m), gen_trap_invariant(sys, m), gen_flow_invariant(ns, m)});
  o.require(!compile(all).accepts(s), "marking & trap invariant & flow invariant accepts the configuration");
  o.require(compile(gen_trap_invariant(sys, m)).accepts(s), "trap invariant rejects the configuration");
  o.detail << "VERIFIED with 1-invariants (oracles n=3,4 clean); configuration refuted by the 1-invariant "
           << refuting << " (direct evaluation of flowpred and uniqueness)";
}

void criterion5(Check& o) {
  std::size_t formulas = 0, structures = 0, mismatches = 0;
  for (const auto& f : testing::il_pool()) {
    ++formulas;
    FormulaRef g = translate(flatten(f));
    for (int n = 1; n <= 4; ++n)
      testing::for_each_structure(f, n, [&](const Structure& s) {
        ++structures;
        if (eval_il(f, s) != eval_ws1s(g, s)) ++mismatches;
      });
  }
  o.require(mismatches == 0, std::to_string(mismatches) + " counterexamples");
  o.detail << formulas << " formulas, " << structures << " structures (n = 1..4), " << mismatches
           << " counterexamples";
}

void criterion6(Check& o) {
  std::size_t subsets = 0, mismatches = 0;
  for (const auto& name : {"philosophers", "alternating"}) {
    ValidatedSystem sys = testing::corpus(name);
    StateVariableMap m = make_state_map(sys);
    FormulaRef tp = gen_trappred(sys, m);
    for (int n = 2; n <= 3; ++n) {
      InstanceNet net = instantiate(sys, n);
      const int np = net.num_places();
      std::vector<bool> is_trap_mask(std::size_t{1} << np, false);
      for (auto mask : enumerate_traps(net)) is_trap_mask[mask] = true;
      Evaluator ev(tp, Semantics::Word);
      if (!ev.free_positions().empty()) {
        o.require(false, "trap predicate has free positions");
        return;
      }
      MaskDecoder dec(net, ev.free_sets());
      std::vector<std::uint64_t> sets;
      for (std::uint32_t mask = 0; mask < (1u << np); ++mask) {
        dec.decode(mask, sets);
        ++subsets;
        if (ev.eval(n, nullptr, sets.data()) != is_trap_mask[mask]) ++mismatches;
      }
      // Spot-check the trap enumeration against the definition.
      for (std::uint32_t mask = 0; mask < (1u << np); mask += 4099)
        o.require(is_trap(net, mask_to_set(net, mask)) == is_trap_mask[mask], "trap enumeration inconsistent");
    }
  }
  o.require(mismatches == 0, std::to_string(mismatches) + " counterexamples");
  o.detail << subsets << " place subsets (philosophers, alternating; n = 2, 3), " << mismatches
           << " counterexamples";
}

void criterion7(Check& o) {
  std::size_t structural = 0, flow_models = 0, violations = 0;
  for (const auto& name : testing::corpus_names()) {
    ValidatedSystem sys = testing::corpus(name);
    StateVariableMap m = make_state_map(sys);
    FormulaRef fp = gen_flowpred(normalize_clauses(sys), m);
    TrackAutomaton a = compile(fp);
    for (int n = 2; n <= 3; ++n) {
      InstanceNet net = instantiate(sys, n);
      ReachabilityGraph g = reachable(net);
      auto check = [&](const PlaceSet& w) {
        for (const auto& mk : g.markings)
          if (count_common(mk, w) != 1) {
            ++violations;
            return;
          }
      };
      if (net.num_places() <= 24)
        for (auto mask : enumerate_structural_one_invariants(net)) {
          ++structural;
          check(mask_to_set(net, mask));
        }
      testing::for_each_accepted(a, n, [&](const Structure& s) {
        ++flow_models;
        o.require(eval_ws1s(fp, s), "automaton model rejected by evaluation");
        check(structure_to_marking(net, s));
      });
      if (net.num_places() <= 16) {
        // The automaton enumeration is complete: compare with brute force.
        std::size_t brute = 0;
        Evaluator ev(fp, Semantics::Word);
        MaskDecoder dec(net, ev.free_sets());
        std::vector<std::uint64_t> sets;
        for (std::uint32_t mask = 0; mask < (1u << net.num_places()); ++mask) {
          dec.decode(mask, sets);
          brute += ev.eval(n, nullptr, sets.data());
        }
        std::size_t enumerated = 0;
        testing::for_each_accepted(a, n, [&](const Structure&) { ++enumerated; });
        o.require(brute == enumerated, std::string(name) + ": flow predicate enumeration incomplete");
      }
    }
  }
  o.require(violations == 0, std::to_string(violations) + " sets without token-sum 1");
  o.detail << structural << " structural 1-invariants and " << flow_models
           << " flow predicate models (all corpus systems, n = 2, 3), " << violations << " violations";
}

void criterion8(Check& o) {
  std::size_t markings = 0, evaluated = 0, by_automaton = 0, failures = 0;
  std::vector<std::string> capped;
  for (const auto& name : testing::corpus_names()) {
    ValidatedSystem sys = testing::corpus(name);
    StateVariableMap m = make_state_map(sys);
    for (bool flow : {false, true}) {
      std::vector<FormulaRef> parts{gen_marking(sys, m), gen_trap_invariant(sys, m)};
      if (flow) parts.push_back(gen_flow_invariant(normalize_clauses(sys), m));
      FormulaRef inv = fm::conj(parts);
      TrackAutomaton a = compile(inv);
      for (int n = 2; n <= 4; ++n) {
        InstanceNet net = instantiate(sys, n);
        ReachabilityGraph g;
        try {
          g = reachable(net);
        } catch (const ResourceLimit&) {
          capped.push_back(std::string(name) + "@" + std::to_string(n));
          continue;
        }
        const bool eval_ok = evaluation_cost(inv, n) <= kEvalBudget;
        for (const auto& mk : g.markings) {
          ++markings;
          Structure s = marking_to_structure(net, mk);
          bool ok = a.accepts(s) && meets_all_marked_traps(net, mk);
          if (eval_ok) {
            ++evaluated;
            ok = ok && eval_ws1s(inv, s);
          } else {
            ++by_automaton;
          }
          if (!ok) ++failures;
        }
      }
    }
  }
  o.require(failures == 0, std::to_string(failures) + " reachable markings violate the invariants");
  o.detail << markings << " reachable markings (8 systems, n = 2..4, flow off/on): " << evaluated
           << " by eval_ws1s, " << by_automaton << " by compiled automaton (evaluation cost above "
           << kEvalBudget << "), all also meet every marked trap; " << failures << " failures";
  if (!capped.empty()) o.detail << "; reachability cap hit for " << capped.size() << " instances";
}

void criterion9(Check& o) {
  std::size_t formulas = 0, sat = 0, unsat = 0, disagreements = 0, bad_witness = 0;
  for (std::uint32_t seed = 20000; seed < 20400; ++seed) {
    testing::FormulaGen gen(seed, true);
    FormulaRef f = flatten(gen.formula(1 + seed % 3));
    ++formulas;
    Verdict v = decide(f, 1);
    int smallest = 0;
    for (int n = 1; n <= 4 && !smallest; ++n) {
      bool found = false;
      testing::for_each_structure(f, n, [&](const Structure& s) { found = found || eval_ws1s(f, s); });
      if (found) smallest = n;
    }
    if (v.kind == Verdict::Kind::Sat) {
      ++sat;
      if (!eval_ws1s(f, v.witness)) ++bad_witness;
      if (smallest ? v.witness.size != smallest : v.witness.size <= 4) ++disagreements;
    } else {
      ++unsat;
      if (v.kind != Verdict::Kind::Unsat || smallest) ++disagreements;
    }
  }
  // Witnesses of the corpus decision formulas.
  std::size_t corpus_witnesses = 0;
  for (const auto& name : testing::corpus_names()) {
    ValidatedSystem sys = testing::corpus(name);
    StateVariableMap m = make_state_map(sys);
    std::vector<FormulaRef> props{gen_deadlock_property(sys, m)};
    for (const auto& p : sys.spec.properties) props.push_back(property_formula(sys, p, m));
    for (bool flow : {false, true})
      for (const auto& p : props) {
        FormulaRef df = gen_decision_formula(sys, p, flow, m);
        Verdict v = decide(df, 2);
        if (v.kind != Verdict::Kind::Sat) continue;
        ++corpus_witnesses;
        bool ok = compile(df).accepts(v.witness);
        if (evaluation_cost(df, v.witness.size) <= kEvalBudget) ok = ok && eval_ws1s(df, v.witness);
        if (!ok) ++bad_witness;
      }
  }
  o.require(disagreements == 0, std::to_string(disagreements) + " disagreements with enumeration");
  o.require(bad_witness == 0, std::to_string(bad_witness) + " witnesses fail");
  o.detail << formulas << " random formulas (" << sat << " SAT, " << unsat << " UNSAT) agree with enumeration up to n = 4; "
           << corpus_witnesses << " corpus witnesses re-checked; " << bad_witness << " bad witnesses";
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria = {
      {"running example verified", criterion1},
      {"generated formulas match the hand-written ones", criterion2},
      {"spurious configuration of the alternating philosophers", criterion3},
      {"1-invariant strengthening", criterion4},
      {"ring/word translation agreement", criterion5},
      {"trap predicate characterizes traps", criterion6},
      {"1-invariant soundness", criterion7},
      {"instance soundness of the invariants", criterion8},
      {"solver self-consistency", criterion9},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check o;
    auto t0 = std::chrono::steady_clock::now();
    try {
      criteria[i].second(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    failed += !o.pass;
    std::cout << "criterion " << i + 1 << ": " << (o.pass ? "PASS" : "FAIL") << " - " << criteria[i].first
              << " - " << o.detail.str() << " [" << seconds_since(t0) << " s]" << std::endl;
  }
  std::cout << "criterion 10: not run - excluded (wall-clock and automaton-size table columns)" << std::endl;
  return failed ? 1 : 0;
}
