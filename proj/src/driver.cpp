#include "trapinv/driver.hpp"

#include <chrono>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "trapinv/invgen.hpp"
#include "trapinv/mona.hpp"
#include "trapinv/petri.hpp"
#include "trapinv/solver.hpp"
#include "trapinv/syntax.hpp"

namespace trapinv {

const char* to_string(Outcome o) {
  switch (o) {
    case Outcome::Verified: return "VERIFIED";
    case Outcome::Unknown: return "UNKNOWN";
    case Outcome::Resource: return "RESOURCE";
  }
  return "?";
}

namespace {

constexpr int kTrapCheckMaxPlaces = 16;

struct Selected {
  std::string name;
  FormulaRef property;  // WS1S over X
};

std::string describe_structure(const ValidatedSystem& sys, const Structure& s) {
  std::ostringstream os;
  for (int u = 0; u < s.size; ++u) {
    if (u) os << ' ';
    os << u << ':';
    bool first = true;
    for (const auto& st : sys.states) {
      auto it = s.sets.find(state_set_name(st));
      if (it != s.sets.end() && ((it->second >> u) & 1)) {
        os << (first ? "" : ",") << st;
        first = false;
      }
    }
    if (first) os << '-';
  }
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<Selected> select_properties(const RunConfig& cfg, const ValidatedSystem& sys,
                                        const StateVariableMap& m) {
  std::vector<PropertyDecl> declared = sys.spec.properties;
  std::vector<PropertyDecl> from_file;
  if (!cfg.property_file.empty()) {
    from_file = parse_properties(read_file(cfg.property_file));
    for (const auto& p : from_file) declared.push_back(p);
  }
  std::map<std::string, const PropertyDecl*> by_name;
  for (const auto& p : declared) {
    if (p.name == "deadlock") throw std::runtime_error("property name 'deadlock' is reserved");
    if (!by_name.emplace(p.name, &p).second)
      throw std::runtime_error("property '" + p.name + "' declared twice");
  }

  std::vector<std::string> wanted;
  if (cfg.property.empty()) {
    if (from_file.empty()) throw std::runtime_error("no property selected");
    for (const auto& p : from_file) wanted.push_back(p.name);
  } else if (cfg.property == "all") {
    wanted.push_back("deadlock");
    for (const auto& p : declared) wanted.push_back(p.name);
  } else {
    std::stringstream ss(cfg.property);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!item.empty()) wanted.push_back(item);
  }

  std::vector<Selected> out;
  std::set<std::string> seen;
  for (const auto& w : wanted) {
    if (!seen.insert(w).second) continue;
    if (w == "deadlock") {
      out.push_back({w, gen_deadlock_property(sys, m)});
      continue;
    }
    auto it = by_name.find(w);
    if (it == by_name.end()) throw std::runtime_error("unknown property '" + w + "'");
    out.push_back({w, property_formula(sys, *it->second, m)});
  }
  return out;
}

// Compiles lazily; remembers a resource failure.
class LazyAutomaton {
 public:
  LazyAutomaton(FormulaRef f, SolverOptions opts) : f_(std::move(f)), opts_(opts) {}
  const TrackAutomaton* get() {
    if (!tried_) {
      tried_ = true;
      try {
        a_ = compile(f_, opts_);
      } catch (const ResourceLimit& e) {
        error_ = e.what();
      }
    }
    return a_ ? &*a_ : nullptr;
  }
  const std::string& error() const { return error_; }

 private:
  FormulaRef f_;
  SolverOptions opts_;
  bool tried_ = false;
  std::optional<TrackAutomaton> a_;
  std::string error_;
};

std::string count_fail(std::size_t bad, const std::string& what) {
  return "FAIL (" + std::to_string(bad) + " " + what + ")";
}

}  // namespace

Report run(const RunConfig& cfg) {
  if (cfg.min_universe < 1) throw std::runtime_error("min-universe must be at least 1");
  for (int n : cfg.oracle_sizes)
    if (n < 1 || n > 63) throw std::runtime_error("oracle sizes must lie in 1..63");

  ValidatedSystem sys = load_system(cfg.input);
  StateVariableMap m = make_state_map(sys);
  SolverOptions opts;
  opts.max_states = cfg.max_states;

  Report r;
  r.system = cfg.input;
  r.components = sys.num_types();
  r.clauses = static_cast<int>(sys.spec.clauses.size());
  r.use_flow = cfg.use_flow;
  r.min_universe = cfg.min_universe;
  if (cfg.min_universe == 1)
    r.warnings.push_back("min-universe 1 includes the single-node ring, where succ(x) = x");
  if (cfg.use_flow) r.normalization_changed = normalize_clauses(sys).changed();

  std::vector<Selected> props = select_properties(cfg, sys, m);

  for (const auto& sel : props) {
    PropertyReport pr;
    pr.name = sel.name;
    auto t0 = std::chrono::steady_clock::now();
    FormulaRef df = gen_decision_formula(sys, sel.property, cfg.use_flow, m);
    pr.formula_size = formula_size(df);
    if (!cfg.export_path.empty()) {
      pr.export_file = props.size() == 1 ? cfg.export_path : cfg.export_path + "." + sel.name;
      std::ofstream out(pr.export_file);
      if (!out) throw std::runtime_error("cannot write '" + pr.export_file + "'");
      out << to_mona(df, cfg.min_universe);
    }
    Verdict v = decide(df, cfg.min_universe, opts);
    pr.seconds = seconds_since(t0);
    pr.automaton_states = v.automaton_states;
    switch (v.kind) {
      case Verdict::Kind::Unsat: pr.outcome = Outcome::Verified; break;
      case Verdict::Kind::Sat:
        pr.outcome = Outcome::Unknown;
        pr.witness = v.witness;
        pr.witness_text = describe_structure(sys, v.witness);
        pr.witness_evaluated = v.witness_evaluated;
        break;
      case Verdict::Kind::Resource:
        pr.outcome = Outcome::Resource;
        pr.message = v.message;
        break;
    }
    r.properties.push_back(std::move(pr));
  }

  if (!cfg.oracle_sizes.empty()) {
    std::vector<FormulaRef> inv_parts{gen_marking(sys, m), gen_trap_invariant(sys, m)};
    if (cfg.use_flow) inv_parts.push_back(gen_flow_invariant(normalize_clauses(sys), m));
    LazyAutomaton invariant(fm::conj(inv_parts), opts);
    LazyAutomaton deadlock(gen_deadlock(sys, m), opts);
    LazyAutomaton trappred(gen_trappred(sys, m), opts);

    for (int n : cfg.oracle_sizes) {
      OracleReport o;
      o.n = n;
      InstanceNet net = instantiate(sys, n);
      o.places = net.num_places();
      o.transitions = static_cast<int>(net.transitions.size());

      if (o.places <= kTrapCheckMaxPlaces) {
        if (const TrackAutomaton* a = trappred.get()) {
          std::size_t bad = 0;
          for (std::uint32_t mask = 0; mask < (1u << o.places); ++mask) {
            PlaceSet w = mask_to_set(net, mask);
            if (a->accepts(marking_to_structure(net, w)) != is_trap(net, w)) ++bad;
          }
          o.checks["trappred_matches_traps"] = bad ? count_fail(bad, "subsets disagree") : "pass";
        } else {
          o.checks["trappred_matches_traps"] = "skipped (" + trappred.error() + ")";
        }
      } else {
        o.checks["trappred_matches_traps"] =
            "skipped (more than " + std::to_string(kTrapCheckMaxPlaces) + " places)";
      }

      ReachabilityGraph g;
      try {
        g = reachable(net, cfg.max_markings);
      } catch (const ResourceLimit& e) {
        o.partial = true;
        o.note = e.what();
      }
      if (!o.partial) {
        o.reachable = g.markings.size();
        std::vector<Marking> dl = deadlocks(net, g);
        o.deadlocks = dl.size();
        if (!dl.empty()) o.first_deadlock = describe_marking(net, dl.front());

        std::size_t bad = 0;
        for (const auto& mk : g.markings)
          for (int u = 0; u < n; ++u)
            for (const auto& comp : sys.spec.components) {
              int marked = 0;
              for (const auto& st : comp.states) marked += mk[net.place_index(st, u)];
              if (marked != 1) ++bad;
            }
        o.checks["one_state_per_instance"] = bad ? count_fail(bad, "instance states") : "pass";

        bad = 0;
        for (const auto& mk : g.markings)
          if (!meets_all_marked_traps(net, mk)) ++bad;
        o.checks["reachable_meet_marked_traps"] = bad ? count_fail(bad, "markings") : "pass";

        if (const TrackAutomaton* a = invariant.get()) {
          bad = 0;
          for (const auto& mk : g.markings)
            if (!a->accepts(marking_to_structure(net, mk))) ++bad;
          o.checks["reachable_satisfy_invariants"] = bad ? count_fail(bad, "markings") : "pass";
        } else {
          o.checks["reachable_satisfy_invariants"] = "skipped (" + invariant.error() + ")";
        }

        if (const TrackAutomaton* a = deadlock.get()) {
          bad = 0;
          for (const auto& mk : g.markings) {
            bool dead = true;
            for (int t = 0; t < static_cast<int>(net.transitions.size()) && dead; ++t)
              if (enabled(net, mk, t)) dead = false;
            if (a->accepts(marking_to_structure(net, mk)) != dead) ++bad;
          }
          o.checks["deadlock_formula_matches_net"] = bad ? count_fail(bad, "markings") : "pass";
        } else {
          o.checks["deadlock_formula_matches_net"] = "skipped (" + deadlock.error() + ")";
        }

        for (std::size_t i = 0; i < props.size(); ++i) {
          PropertyReport& pr = r.properties[i];
          std::size_t violations = 0;
          Evaluator ev(props[i].property, Semantics::Word);
          for (const auto& mk : g.markings)
            if (!ev.eval(marking_to_structure(net, mk))) ++violations;
          o.checks["property." + pr.name + ".violations"] = std::to_string(violations);
          if (pr.outcome == Outcome::Verified)
            o.checks["property." + pr.name + ".sound"] =
                violations ? count_fail(violations, "reachable markings violate a verified property") : "pass";
          if (pr.outcome == Outcome::Unknown && pr.witness.size == n) {
            Marking wm = structure_to_marking(net, pr.witness);
            pr.witness_oracle = contains(g, wm) ? "REACHABLE" : "SPURIOUS";
          }
        }
      }
      for (auto& pr : r.properties)
        if (pr.outcome == Outcome::Unknown && pr.witness.size == n && pr.witness_oracle.empty())
          pr.witness_oracle = "unresolved (reachability cap exceeded)";
      r.oracles.push_back(std::move(o));
    }
  }

  bool failed = false;
  for (const auto& o : r.oracles)
    for (const auto& [k, v] : o.checks)
      if (v.rfind("FAIL", 0) == 0) failed = true;
  bool unknown = false, resource = false;
  for (const auto& pr : r.properties) {
    unknown |= pr.outcome == Outcome::Unknown;
    resource |= pr.outcome == Outcome::Resource;
  }
  r.exit_code = (failed || resource) ? 2 : unknown ? 1 : 0;
  return r;
}

std::string format_text(const Report& r, bool timings) {
  std::ostringstream os;
  os << "system: " << r.system << "\n";
  os << "components: " << r.components << "\n";
  os << "clauses: " << r.clauses << "\n";
  os << "min_universe: " << r.min_universe << "\n";
  os << "flow: " << (r.use_flow ? "on" : "off") << "\n";
  if (r.use_flow) os << "flow.normalized: " << (r.normalization_changed ? "changed" : "unchanged") << "\n";
  for (const auto& w : r.warnings) os << "warning: " << w << "\n";
  for (const auto& p : r.properties) {
    const std::string k = "property." + p.name;
    os << k << ".verdict: " << to_string(p.outcome) << "\n";
    os << k << ".formula_size: " << p.formula_size << "\n";
    if (p.outcome != Outcome::Resource) os << k << ".automaton_states: " << p.automaton_states << "\n";
    if (timings) os << k << ".seconds: " << p.seconds << "\n";
    if (!p.export_file.empty()) os << k << ".export: " << p.export_file << "\n";
    if (p.outcome == Outcome::Resource) os << k << ".message: " << p.message << "\n";
    if (p.outcome == Outcome::Unknown) {
      os << k << ".witness.size: " << p.witness.size << "\n";
      os << k << ".witness.states: " << p.witness_text << "\n";
      os << k << ".witness.checked_by: " << (p.witness_evaluated ? "evaluation" : "automaton") << "\n";
      os << k << ".note: the invariants admit this configuration; it may be unreachable\n";
      if (!p.witness_oracle.empty()) os << k << ".witness.oracle: " << p.witness_oracle << "\n";
    }
  }
  for (const auto& o : r.oracles) {
    const std::string k = "oracle." + std::to_string(o.n);
    os << k << ".places: " << o.places << "\n";
    os << k << ".transitions: " << o.transitions << "\n";
    if (o.partial) {
      os << k << ".partial: " << o.note << "\n";
    } else {
      os << k << ".reachable: " << o.reachable << "\n";
      os << k << ".deadlocks: " << o.deadlocks << "\n";
      if (!o.first_deadlock.empty()) os << k << ".deadlock.example: " << o.first_deadlock << "\n";
    }
    for (const auto& [name, v] : o.checks) os << k << "." << name << ": " << v << "\n";
  }
  os << "exit_code: " << r.exit_code << "\n";
  return os.str();
}

std::string format_json(const Report& r, bool timings) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["system"] = r.system;
  j["components"] = r.components;
  j["clauses"] = r.clauses;
  j["min_universe"] = r.min_universe;
  j["flow"] = r.use_flow;
  if (r.use_flow) j["flow_normalization_changed"] = r.normalization_changed;
  j["warnings"] = r.warnings;
  j["properties"] = ordered_json::array();
  for (const auto& p : r.properties) {
    ordered_json e;
    e["name"] = p.name;
    e["verdict"] = to_string(p.outcome);
    e["formula_size"] = p.formula_size;
    e["automaton_states"] = p.automaton_states;
    if (timings) e["seconds"] = p.seconds;
    if (!p.export_file.empty()) e["export"] = p.export_file;
    if (p.outcome == Outcome::Resource) e["message"] = p.message;
    if (p.outcome == Outcome::Unknown) {
      ordered_json w;
      w["size"] = p.witness.size;
      w["states"] = p.witness_text;
      ordered_json sets = ordered_json::object();
      for (const auto& [name, bits] : p.witness.sets) {
        std::vector<int> nodes;
        for (int u = 0; u < p.witness.size; ++u)
          if ((bits >> u) & 1) nodes.push_back(u);
        sets[name] = nodes;
      }
      w["sets"] = sets;
      w["checked_by"] = p.witness_evaluated ? "evaluation" : "automaton";
      if (!p.witness_oracle.empty()) w["oracle"] = p.witness_oracle;
      e["witness"] = w;
    }
    j["properties"].push_back(e);
  }
  j["oracles"] = ordered_json::array();
  for (const auto& o : r.oracles) {
    ordered_json e;
    e["n"] = o.n;
    e["places"] = o.places;
    e["transitions"] = o.transitions;
    e["partial"] = o.partial;
    if (o.partial) {
      e["note"] = o.note;
    } else {
      e["reachable"] = o.reachable;
      e["deadlocks"] = o.deadlocks;
      if (!o.first_deadlock.empty()) e["deadlock_example"] = o.first_deadlock;
    }
    e["checks"] = o.checks;
    j["oracles"].push_back(e);
  }
  j["exit_code"] = r.exit_code;
  return j.dump(2) + "\n";
}

}  // namespace trapinv
