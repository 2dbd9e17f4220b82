#include "trapinv/solver.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

namespace trapinv {

namespace {

constexpr int kLeaf = TrackAutomaton::kLeaf;
constexpr std::size_t kMaxNodes = 20000000;

struct NodeKey {
  int var, lo, hi;
  bool operator==(const NodeKey& o) const { return var == o.var && lo == o.lo && hi == o.hi; }
};

struct NodeKeyHash {
  std::size_t operator()(const NodeKey& k) const {
    std::uint64_t h = static_cast<std::uint32_t>(k.var);
    h = h * 0x9E3779B97F4A7C15ull ^ static_cast<std::uint32_t>(k.lo);
    h = h * 0x9E3779B97F4A7C15ull ^ static_cast<std::uint32_t>(k.hi);
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

struct VecHash {
  std::size_t operator()(const std::vector<int>& v) const {
    std::uint64_t h = 1469598103934665603ull;
    for (int x : v) h = (h ^ static_cast<std::uint32_t>(x)) * 1099511628211ull;
    return static_cast<std::size_t>(h);
  }
};

inline std::uint64_t pair_key(int a, int b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

}  // namespace

// Hash-consed construction of a single automaton.
class AutomatonBuilder {
 public:
  using Track = TrackAutomaton::Track;
  using Node = TrackAutomaton::Node;

  explicit AutomatonBuilder(std::vector<Track> tracks, std::size_t max_states = SIZE_MAX)
      : max_states_(max_states) {
    a_.tracks_ = std::move(tracks);
  }

  int leaf(int state) { return intern(kLeaf, state, -1); }
  int mk(int var, int lo, int hi) {
    if (lo == hi) return lo;
    return intern(var, lo, hi);
  }
  int add_state(bool accepting) {
    if (a_.roots_.size() >= max_states_)
      throw ResourceLimit("automaton state limit of " + std::to_string(max_states_) + " exceeded");
    a_.roots_.push_back(-1);
    a_.accepting_.push_back(accepting ? 1 : 0);
    return static_cast<int>(a_.roots_.size()) - 1;
  }
  void set_root(int state, int node) { a_.roots_[state] = node; }
  int num_states() const { return static_cast<int>(a_.roots_.size()); }
  const Node& node(int id) const { return a_.nodes_[id]; }
  TrackAutomaton finish() { return std::move(a_); }

 private:
  int intern(int var, int lo, int hi) {
    NodeKey k{var, lo, hi};
    auto it = table_.find(k);
    if (it != table_.end()) return it->second;
    if (a_.nodes_.size() >= kMaxNodes) throw ResourceLimit("decision diagram node limit exceeded");
    int id = static_cast<int>(a_.nodes_.size());
    a_.nodes_.push_back(Node{var, lo, hi});
    table_.emplace(k, id);
    return id;
  }

  TrackAutomaton a_;
  std::unordered_map<NodeKey, int, NodeKeyHash> table_;
  std::size_t max_states_;
};

int TrackAutomaton::track_index(const std::string& name) const {
  for (std::size_t i = 0; i < tracks_.size(); ++i)
    if (tracks_[i].name == name) return static_cast<int>(i);
  return -1;
}

int TrackAutomaton::step(int s, const std::vector<bool>& letter) const {
  int n = roots_[s];
  while (nodes_[n].var != kLeaf) n = letter[nodes_[n].var] ? nodes_[n].hi : nodes_[n].lo;
  return nodes_[n].lo;
}

bool TrackAutomaton::accepts(const Structure& s) const {
  if (s.size < 1) return false;
  std::vector<std::vector<bool>> word(s.size, std::vector<bool>(tracks_.size(), false));
  for (std::size_t t = 0; t < tracks_.size(); ++t) {
    const auto& tr = tracks_[t];
    if (tr.first_order) {
      auto it = s.positions.find(tr.name);
      if (it == s.positions.end()) throw EvalError("unassigned position variable " + tr.name);
      if (it->second < 0 || it->second >= s.size) throw EvalError("position outside universe");
      word[it->second][t] = true;
    } else {
      auto it = s.sets.find(tr.name);
      if (it == s.sets.end()) throw EvalError("unassigned set variable " + tr.name);
      for (int u = 0; u < s.size; ++u) word[u][t] = (it->second >> u) & 1u;
    }
  }
  int q = initial();
  for (const auto& letter : word) q = step(q, letter);
  return accepting(q);
}

std::vector<TrackAutomaton::Cube> TrackAutomaton::cubes() const {
  std::vector<Cube> out;
  std::string pattern(tracks_.size(), '-');
  std::function<void(int, int)> walk = [&](int from, int n) {
    const Node& nd = nodes_[n];
    if (nd.var == kLeaf) {
      out.push_back(Cube{from, pattern, nd.lo});
      return;
    }
    pattern[nd.var] = '0';
    walk(from, nd.lo);
    pattern[nd.var] = '1';
    walk(from, nd.hi);
    pattern[nd.var] = '-';
  };
  for (int s = 0; s < num_states(); ++s) walk(s, roots_[s]);
  return out;
}

std::string TrackAutomaton::to_text() const {
  std::ostringstream os;
  os << "tracks:";
  for (const auto& t : tracks_) os << ' ' << t.name << (t.first_order ? "/1" : "/2");
  os << "\nstates: " << num_states() << "\ninitial: " << initial() << "\naccepting:";
  for (int s = 0; s < num_states(); ++s)
    if (accepting(s)) os << ' ' << s;
  os << '\n';
  for (const auto& c : cubes()) os << c.from << ' ' << (c.pattern.empty() ? "." : c.pattern) << ' ' << c.to << '\n';
  return os.str();
}

std::string TrackAutomaton::to_dot() const {
  std::ostringstream os;
  os << "digraph automaton {\n  rankdir=LR;\n  start [shape=point];\n";
  for (int s = 0; s < num_states(); ++s)
    os << "  q" << s << " [shape=" << (accepting(s) ? "doublecircle" : "circle") << "];\n";
  os << "  start -> q0;\n";
  std::map<std::pair<int, int>, std::vector<std::string>> edges;
  for (const auto& c : cubes()) edges[{c.from, c.to}].push_back(c.pattern.empty() ? "." : c.pattern);
  std::string header;
  for (const auto& t : tracks_) header += (header.empty() ? "" : ",") + t.name;
  for (const auto& [k, labels] : edges) {
    os << "  q" << k.first << " -> q" << k.second << " [label=\"";
    for (std::size_t i = 0; i < labels.size(); ++i) os << (i ? "\\n" : "") << labels[i];
    os << "\"];\n";
  }
  os << "  label=\"tracks: " << header << "\";\n}\n";
  return os.str();
}

namespace {

using Track = TrackAutomaton::Track;
using Node = TrackAutomaton::Node;

std::vector<Track> merge_tracks(const std::vector<Track>& a, const std::vector<Track>& b,
                                std::vector<int>& map_a, std::vector<int>& map_b) {
  std::vector<Track> out;
  map_a.assign(a.size(), -1);
  map_b.assign(b.size(), -1);
  std::size_t i = 0, j = 0;
  while (i < a.size() || j < b.size()) {
    if (j == b.size() || (i < a.size() && a[i].name < b[j].name)) {
      map_a[i++] = static_cast<int>(out.size());
      out.push_back(a[i - 1]);
    } else if (i == a.size() || b[j].name < a[i].name) {
      map_b[j++] = static_cast<int>(out.size());
      out.push_back(b[j - 1]);
    } else {
      if (a[i].first_order != b[j].first_order)
        throw std::invalid_argument("variable '" + a[i].name +
                                    "' used both as a position and as a set");
      map_a[i++] = static_cast<int>(out.size());
      map_b[j++] = static_cast<int>(out.size());
      out.push_back(a[i - 1]);
    }
  }
  return out;
}

// Synchronous product with a fresh, non-accepting start state.
TrackAutomaton product(const TrackAutomaton& a, const TrackAutomaton& b,
                       const std::function<bool(bool, bool)>& acc, const SolverOptions& opts) {
  std::vector<int> map_a, map_b;
  AutomatonBuilder r(merge_tracks(a.tracks(), b.tracks(), map_a, map_b), opts.max_states);
  std::unordered_map<std::uint64_t, int> pair_id;
  std::vector<std::pair<int, int>> pairs;
  r.add_state(false);
  auto get_pair = [&](int sa, int sb) {
    auto [it, fresh] = pair_id.emplace(pair_key(sa, sb), 0);
    if (fresh) {
      it->second = r.add_state(acc(a.accepting(sa), b.accepting(sb)));
      pairs.emplace_back(sa, sb);
    }
    return it->second;
  };
  const auto& na = a.nodes();
  const auto& nb = b.nodes();
  std::unordered_map<std::uint64_t, int> memo;
  std::function<int(int, int)> apply = [&](int x, int y) -> int {
    auto key = pair_key(x, y);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    const Node& p = na[x];
    const Node& q = nb[y];
    int res;
    if (p.var == kLeaf && q.var == kLeaf) {
      res = r.leaf(get_pair(p.lo, q.lo));
    } else {
      int va = p.var == kLeaf ? kLeaf : map_a[p.var];
      int vb = q.var == kLeaf ? kLeaf : map_b[q.var];
      int v = std::min(va, vb);
      int lo = apply(va == v ? p.lo : x, vb == v ? q.lo : y);
      int hi = apply(va == v ? p.hi : x, vb == v ? q.hi : y);
      res = r.mk(v, lo, hi);
    }
    memo.emplace(key, res);
    return res;
  };
  r.set_root(0, apply(a.root(a.initial()), b.root(b.initial())));
  for (std::size_t i = 0; i < pairs.size(); ++i)
    r.set_root(static_cast<int>(i) + 1, apply(a.root(pairs[i].first), b.root(pairs[i].second)));
  return minimize(r.finish());
}

// Well-formedness of the given first-order tracks: exactly one 1 each.
TrackAutomaton well_formed(const std::vector<Track>& fo) {
  const int m = static_cast<int>(fo.size());
  const int full = (1 << m) - 1;
  AutomatonBuilder r(fo);
  for (int mask = 0; mask <= full; ++mask) r.add_state(mask == full);
  const int dead = r.add_state(false);
  for (int mask = 0; mask <= full; ++mask) {
    std::function<int(int, int)> rec = [&](int j, int acc) -> int {
      if (j == m) return r.leaf(acc);
      int lo = rec(j + 1, acc);
      int hi = (mask >> j) & 1 ? r.leaf(dead) : rec(j + 1, acc | (1 << j));
      return r.mk(j, lo, hi);
    };
    r.set_root(mask, rec(0, mask));
  }
  r.set_root(dead, r.leaf(dead));
  return minimize(r.finish());
}

std::vector<Track> first_order_tracks(const TrackAutomaton& a) {
  std::vector<Track> fo;
  for (const auto& t : a.tracks())
    if (t.first_order) fo.push_back(t);
  return fo;
}

TrackAutomaton impose_well_formedness(const TrackAutomaton& a, const SolverOptions& opts) {
  auto fo = first_order_tracks(a);
  if (fo.empty()) return a;
  return product(a, well_formed(fo), [](bool x, bool y) { return x && y; }, opts);
}

std::vector<std::string> fo_names(const TrackAutomaton& a) {
  std::vector<std::string> out;
  for (const auto& t : a.tracks())
    if (t.first_order) out.push_back(t.name);
  return out;
}

// Builds an automaton from an explicit transition function over letters.
// `names` gives the logical bit order of `delta`'s letter argument.
TrackAutomaton explicit_automaton(const std::vector<Track>& logical, int states,
                                  const std::vector<int>& accepting,
                                  const std::function<int(int, unsigned)>& delta) {
  std::vector<int> order(logical.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(),
            [&](int x, int y) { return logical[x].name < logical[y].name; });
  std::vector<Track> sorted;
  for (int i : order) sorted.push_back(logical[i]);
  AutomatonBuilder r(sorted);
  for (int s = 0; s < states; ++s)
    r.add_state(std::find(accepting.begin(), accepting.end(), s) != accepting.end());
  const int k = static_cast<int>(order.size());
  for (int s = 0; s < states; ++s) {
    std::function<int(int, unsigned)> rec = [&](int j, unsigned letter) -> int {
      if (j == k) return r.leaf(delta(s, letter));
      int lo = rec(j + 1, letter);
      int hi = rec(j + 1, letter | (1u << order[j]));
      return r.mk(j, lo, hi);
    };
    r.set_root(s, rec(0, 0));
  }
  return minimize(r.finish());
}

Track fo(const std::string& n) { return Track{n, true}; }
Track so(const std::string& n) { return Track{n, false}; }

TrackAutomaton constant(bool value) {
  // 0 = start, 1 = after one or more letters.
  return explicit_automaton({}, 2, value ? std::vector<int>{1} : std::vector<int>{},
                            [](int, unsigned) { return 1; });
}

TrackAutomaton atom_wf(const std::string& x) {
  return explicit_automaton({fo(x)}, 3, {1}, [](int s, unsigned l) {
    if (s == 2) return 2;
    if (l & 1) return s == 0 ? 1 : 2;
    return s;
  });
}

TrackAutomaton atom_member(const std::string& set, const std::string& x) {
  return explicit_automaton({so(set), fo(x)}, 3, {1}, [](int s, unsigned l) {
    bool in = l & 1, here = l & 2;
    if (s == 2 || !here) return s;
    return (s == 0 && in) ? 1 : 2;
  });
}

TrackAutomaton atom_eq(const std::string& x, const std::string& y) {
  return explicit_automaton({fo(x), fo(y)}, 3, {1}, [](int s, unsigned l) {
    if (s == 2) return 2;
    if (l == 0) return s;
    return (s == 0 && l == 3) ? 1 : 2;
  });
}

TrackAutomaton atom_leq(const std::string& x, const std::string& y) {
  // 0: none seen, 1: x seen, 2: both seen, 3: dead
  return explicit_automaton({fo(x), fo(y)}, 4, {2}, [](int s, unsigned l) {
    if (s == 3) return 3;
    if (l == 0) return s;
    if (s == 0) return l == 3 ? 2 : l == 1 ? 1 : 3;
    if (s == 1) return l == 2 ? 2 : 3;
    return 3;
  });
}

TrackAutomaton atom_succ(const std::string& x, const std::string& y) {
  // succ(x) = y with succ(last) = last.
  // 0: none, 1: x just seen, 2: y right after x, 3: x = y here (must be last), 4: dead
  return explicit_automaton({fo(x), fo(y)}, 5, {2, 3}, [](int s, unsigned l) {
    switch (s) {
      case 0: return l == 0 ? 0 : l == 1 ? 1 : l == 3 ? 3 : 4;
      case 1: return l == 2 ? 2 : 4;
      case 2: return l == 0 ? 2 : 4;
      default: return 4;
    }
  });
}

TrackAutomaton atom_max(const std::string& x) {
  return explicit_automaton({fo(x)}, 3, {1}, [](int s, unsigned l) {
    if (s == 0) return l ? 1 : 0;
    return 2;
  });
}

TrackAutomaton atom_root(const std::string& x) {
  return explicit_automaton({fo(x)}, 3, {1}, [](int s, unsigned l) {
    if (s == 0) return l ? 1 : 2;
    if (s == 1) return l ? 2 : 1;
    return 2;
  });
}

class Compiler {
 public:
  explicit Compiler(const SolverOptions& opts) : opts_(opts) {}

  TrackAutomaton run(const FormulaRef& f) {
    switch (f->op) {
      case Op::True: return constant(true);
      case Op::False: return constant(false);
      case Op::Leq:
      case Op::Eq:
      case Op::Max:
      case Op::Member: return atom(f);
      case Op::Not: return complement(run(f->left), opts_);
      case Op::And: return intersect(run(f->left), run(f->right), opts_);
      case Op::Or: return unite(run(f->left), run(f->right), opts_);
      case Op::Implies:
        return impose_well_formedness(
            product(run(f->left), run(f->right), [](bool x, bool y) { return !x || y; }, opts_),
            opts_);
      case Op::Iff:
        return impose_well_formedness(
            product(run(f->left), run(f->right), [](bool x, bool y) { return x == y; }, opts_),
            opts_);
      case Op::Exists1:
      case Op::Exists2: {
        std::vector<std::string> vars;
        FormulaRef g = f;
        while (g->op == Op::Exists1 || g->op == Op::Exists2) {
          vars.push_back(g->name);
          g = g->left;
        }
        return project(run(g), vars, opts_);
      }
      case Op::Forall1:
      case Op::Forall2: {
        std::vector<std::string> vars;
        FormulaRef g = f;
        while (g->op == Op::Forall1 || g->op == Op::Forall2) {
          vars.push_back(g->name);
          g = g->left;
        }
        return complement(project(complement(run(g), opts_), vars, opts_), opts_);
      }
    }
    throw std::logic_error("unknown operator");
  }

 private:
  static bool is_root(const TermRef& t) { return t && t->kind == Term::Kind::Root; }
  static bool has_root(const TermRef& t) {
    for (TermRef u = t; u; u = u->arg)
      if (u->kind == Term::Kind::Root) return true;
    return false;
  }
  static TermRef replace_root(const TermRef& t, const TermRef& by) {
    if (t->kind == Term::Kind::Root) return by;
    if (t->kind == Term::Kind::Succ) return fm::succ(replace_root(t->arg, by));
    return t;
  }

  TrackAutomaton atom(const FormulaRef& f) {
    const TermRef& l = f->lhs;
    const TermRef& r = f->rhs;
    if (f->op == Op::Eq && ((is_root(r) && l->kind == Term::Kind::Var) ||
                            (is_root(l) && r && r->kind == Term::Kind::Var)))
      return atom_root(is_root(r) ? l->name : r->name);
    if (has_root(l) || has_root(r)) {
      // atom[eps]  ~>  exists e. e = eps & atom[e]
      auto e = fm::var(std::string(1, kFreshPrefix) + "e" + std::to_string(++fresh_));
      FormulaRef body;
      if (has_root(l))
        body = std::make_shared<const Formula>(Formula{f->op, replace_root(l, e), r, f->name, nullptr, nullptr});
      else
        body = std::make_shared<const Formula>(Formula{f->op, l, replace_root(r, e), f->name, nullptr, nullptr});
      return run(fm::exists1(e->name, fm::conj(fm::eq(e, fm::root()), body)));
    }
    switch (f->op) {
      case Op::Max: return atom_max(l->name);
      case Op::Member: return atom_member(f->name, l->name);
      case Op::Leq:
        return l->name == r->name ? atom_wf(l->name) : atom_leq(l->name, r->name);
      case Op::Eq:
        if (l->kind == Term::Kind::Succ) {
          const std::string& x = l->arg->name;
          return x == r->name ? atom_max(x) : atom_succ(x, r->name);
        }
        return l->name == r->name ? atom_wf(l->name) : atom_eq(l->name, r->name);
      default: break;
    }
    throw std::logic_error("not an atom");
  }

  SolverOptions opts_;
  int fresh_ = 0;
};

}  // namespace

TrackAutomaton intersect(const TrackAutomaton& a, const TrackAutomaton& b, const SolverOptions& opts) {
  return product(a, b, [](bool x, bool y) { return x && y; }, opts);
}

TrackAutomaton unite(const TrackAutomaton& a, const TrackAutomaton& b, const SolverOptions& opts) {
  auto u = product(a, b, [](bool x, bool y) { return x || y; }, opts);
  if (fo_names(a) == fo_names(b)) return u;
  return impose_well_formedness(u, opts);
}

TrackAutomaton complement(const TrackAutomaton& a, const SolverOptions& opts) {
  // State 0 is a fresh non-accepting copy of the initial state; state i+1
  // is a's state i with acceptance flipped.
  AutomatonBuilder r(a.tracks(), opts.max_states + 1);
  for (int s = 0; s <= a.num_states(); ++s) r.add_state(s > 0 && !a.accepting(s - 1));
  std::vector<int> memo(a.num_nodes(), -1);
  const auto& nodes = a.nodes();
  std::function<int(int)> copy = [&](int n) -> int {
    if (memo[n] >= 0) return memo[n];
    const Node& nd = nodes[n];
    int res = nd.var == kLeaf ? r.leaf(nd.lo + 1) : r.mk(nd.var, copy(nd.lo), copy(nd.hi));
    return memo[n] = res;
  };
  r.set_root(0, copy(a.root(a.initial())));
  for (int s = 0; s < a.num_states(); ++s) r.set_root(s + 1, copy(a.root(s)));
  auto c = minimize(r.finish());
  return impose_well_formedness(c, opts);
}

TrackAutomaton project(const TrackAutomaton& a, const std::vector<std::string>& vars,
                       const SolverOptions& opts) {
  const auto& tracks = a.tracks();
  std::vector<char> removed(tracks.size(), 0);
  bool any = false;
  for (const auto& v : vars) {
    int i = a.track_index(v);
    if (i >= 0) removed[i] = any = true;
  }
  if (!any) return a;
  std::vector<int> new_index(tracks.size(), -1);
  std::vector<Track> kept;
  for (std::size_t i = 0; i < tracks.size(); ++i)
    if (!removed[i]) {
      new_index[i] = static_cast<int>(kept.size());
      kept.push_back(tracks[i]);
    }

  AutomatonBuilder r(kept, opts.max_states);
  const auto& nodes = a.nodes();
  std::unordered_map<std::vector<int>, int, VecHash> subset_id;
  std::vector<std::vector<int>> subsets;
  auto get_subset = [&](std::vector<int> states) {
    auto it = subset_id.find(states);
    if (it != subset_id.end()) return it->second;
    bool acc = false;
    for (int s : states) acc = acc || a.accepting(s);
    int id = r.add_state(acc);
    subset_id.emplace(states, id);
    subsets.push_back(std::move(states));
    return id;
  };
  std::unordered_map<std::vector<int>, int, VecHash> memo;
  std::vector<int> stack;
  std::function<int(const std::vector<int>&)> build = [&](const std::vector<int>& list) -> int {
    std::vector<int> cur;
    stack.assign(list.begin(), list.end());
    while (!stack.empty()) {
      int n = stack.back();
      stack.pop_back();
      const Node& nd = nodes[n];
      if (nd.var != kLeaf && removed[nd.var]) {
        stack.push_back(nd.lo);
        stack.push_back(nd.hi);
      } else {
        cur.push_back(n);
      }
    }
    std::sort(cur.begin(), cur.end());
    cur.erase(std::unique(cur.begin(), cur.end()), cur.end());
    auto it = memo.find(cur);
    if (it != memo.end()) return it->second;
    int v = kLeaf;
    for (int n : cur) v = std::min(v, nodes[n].var);
    int res;
    if (v == kLeaf) {
      std::vector<int> states;
      for (int n : cur) states.push_back(nodes[n].lo);
      std::sort(states.begin(), states.end());
      states.erase(std::unique(states.begin(), states.end()), states.end());
      res = r.leaf(get_subset(std::move(states)));
    } else {
      std::vector<int> lo, hi;
      for (int n : cur) {
        lo.push_back(nodes[n].var == v ? nodes[n].lo : n);
        hi.push_back(nodes[n].var == v ? nodes[n].hi : n);
      }
      int l = build(lo);
      int h = build(hi);
      res = r.mk(new_index[v], l, h);
    }
    memo.emplace(std::move(cur), res);
    return res;
  };
  get_subset({a.initial()});
  for (std::size_t i = 0; i < subsets.size(); ++i) {
    std::vector<int> roots;
    for (int s : subsets[i]) roots.push_back(a.root(s));
    r.set_root(static_cast<int>(i), build(roots));
  }
  return minimize(r.finish());
}

TrackAutomaton minimize(const TrackAutomaton& a) {
  const int n = a.num_states();
  const auto& nodes = a.nodes();
  std::vector<int> cls(n);
  int ncls = 0;
  {
    int id_acc = -1, id_rej = -1;
    for (int s = 0; s < n; ++s) {
      int& id = a.accepting(s) ? id_acc : id_rej;
      if (id < 0) id = ncls++;
      cls[s] = id;
    }
  }
  // Moore refinement: a state's signature is its class plus its transition
  // diagram with leaves replaced by classes.
  while (true) {
    AutomatonBuilder tmp({});
    std::vector<int> memo(nodes.size(), -1);
    std::function<int(int)> relabel = [&](int x) -> int {
      if (memo[x] >= 0) return memo[x];
      const Node& nd = nodes[x];
      int res = nd.var == kLeaf ? tmp.leaf(cls[nd.lo]) : tmp.mk(nd.var, relabel(nd.lo), relabel(nd.hi));
      return memo[x] = res;
    };
    std::unordered_map<std::uint64_t, int> sig;
    std::vector<int> next(n);
    for (int s = 0; s < n; ++s) {
      auto [it, fresh] = sig.emplace(pair_key(cls[s], relabel(a.root(s))), static_cast<int>(sig.size()));
      next[s] = it->second;
    }
    int count = static_cast<int>(sig.size());
    cls.swap(next);
    if (count == ncls) break;
    ncls = count;
  }

  // Canonical numbering: breadth-first from the initial class, successors
  // in depth-first low-edge-first order of the diagram.
  std::vector<int> rep(ncls, -1), new_id(ncls, -1), order;
  for (int s = n - 1; s >= 0; --s) rep[cls[s]] = s;
  std::vector<int> stamp(nodes.size(), -1);
  new_id[cls[a.initial()]] = 0;
  order.push_back(cls[a.initial()]);
  for (std::size_t i = 0; i < order.size(); ++i) {
    int c = order[i];
    std::vector<int> stack{a.root(rep[c])};
    while (!stack.empty()) {
      int x = stack.back();
      stack.pop_back();
      if (stamp[x] == static_cast<int>(i)) continue;
      stamp[x] = static_cast<int>(i);
      const Node& nd = nodes[x];
      if (nd.var == kLeaf) {
        int t = cls[nd.lo];
        if (new_id[t] < 0) {
          new_id[t] = static_cast<int>(order.size());
          order.push_back(t);
        }
      } else {
        stack.push_back(nd.hi);
        stack.push_back(nd.lo);
      }
    }
  }
  AutomatonBuilder r(a.tracks());
  for (int c : order) r.add_state(a.accepting(rep[c]));
  std::vector<int> memo(nodes.size(), -1);
  std::function<int(int)> copy = [&](int x) -> int {
    if (memo[x] >= 0) return memo[x];
    const Node& nd = nodes[x];
    int res = nd.var == kLeaf ? r.leaf(new_id[cls[nd.lo]]) : r.mk(nd.var, copy(nd.lo), copy(nd.hi));
    return memo[x] = res;
  };
  for (std::size_t i = 0; i < order.size(); ++i) r.set_root(static_cast<int>(i), copy(a.root(rep[order[i]])));
  return r.finish();
}

namespace {

std::vector<int> successors(const TrackAutomaton& a, int s) {
  std::vector<int> out;
  std::vector<int> stack{a.root(s)};
  std::set<int> seen;
  while (!stack.empty()) {
    int x = stack.back();
    stack.pop_back();
    if (!seen.insert(x).second) continue;
    const Node& nd = a.nodes()[x];
    if (nd.var == kLeaf) {
      out.push_back(nd.lo);
    } else {
      stack.push_back(nd.hi);
      stack.push_back(nd.lo);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

// Some letter leading from s to t, don't-cares set to 0.
std::vector<bool> letter_between(const TrackAutomaton& a, int s, int t) {
  std::vector<bool> letter(a.tracks().size(), false);
  std::map<int, bool> reach;
  std::function<bool(int)> can = [&](int x) -> bool {
    auto it = reach.find(x);
    if (it != reach.end()) return it->second;
    const Node& nd = a.nodes()[x];
    bool ok = nd.var == kLeaf ? nd.lo == t : (can(nd.lo) || can(nd.hi));
    reach[x] = ok;
    return ok;
  };
  int x = a.root(s);
  while (a.nodes()[x].var != kLeaf) {
    const Node& nd = a.nodes()[x];
    if (can(nd.lo)) {
      x = nd.lo;
    } else {
      letter[nd.var] = true;
      x = nd.hi;
    }
  }
  return letter;
}

}  // namespace

bool is_empty(const TrackAutomaton& a) { return decide(a, 1).kind == Verdict::Kind::Unsat; }

bool language_equal(const TrackAutomaton& a, const TrackAutomaton& b, const SolverOptions& opts) {
  return is_empty(product(a, b, [](bool x, bool y) { return x != y; }, opts));
}

const char* to_string(Verdict::Kind k) {
  switch (k) {
    case Verdict::Kind::Unsat: return "UNSAT";
    case Verdict::Kind::Sat: return "SAT";
    case Verdict::Kind::Resource: return "RESOURCE";
  }
  return "?";
}

Verdict decide(const TrackAutomaton& a, int min_universe) {
  if (min_universe < 1) throw std::invalid_argument("min_universe must be >= 1");
  const int m = min_universe;
  Verdict v;
  v.automaton_states = a.num_states();
  // Breadth-first search over (state, min(length, m)).
  auto key = [&](int s, int d) { return s * (m + 1) + d; };
  std::vector<int> parent(static_cast<std::size_t>(a.num_states()) * (m + 1), -2);
  std::vector<int> queue{key(a.initial(), 0)};
  parent[queue[0]] = -1;
  std::vector<std::vector<int>> succ_cache(a.num_states());
  std::vector<char> cached(a.num_states(), 0);
  int goal = -1;
  for (std::size_t i = 0; i < queue.size() && goal < 0; ++i) {
    int s = queue[i] / (m + 1), d = queue[i] % (m + 1);
    if (!cached[s]) {
      succ_cache[s] = successors(a, s);
      cached[s] = 1;
    }
    for (int t : succ_cache[s]) {
      int k = key(t, std::min(d + 1, m));
      if (parent[k] != -2) continue;
      parent[k] = queue[i];
      queue.push_back(k);
      if (a.accepting(t) && d + 1 >= m) {
        goal = k;
        break;
      }
    }
  }
  if (goal < 0) {
    v.kind = Verdict::Kind::Unsat;
    return v;
  }
  std::vector<int> path;
  for (int k = goal; k >= 0; k = parent[k]) path.push_back(k / (m + 1));
  std::reverse(path.begin(), path.end());
  Structure w;
  w.size = static_cast<int>(path.size()) - 1;
  for (const auto& t : a.tracks())
    if (t.first_order)
      w.positions[t.name] = 0;
    else
      w.sets[t.name] = 0;
  for (int u = 0; u < w.size; ++u) {
    auto letter = letter_between(a, path[u], path[u + 1]);
    for (std::size_t i = 0; i < letter.size(); ++i) {
      if (!letter[i]) continue;
      const auto& t = a.tracks()[i];
      if (t.first_order)
        w.positions[t.name] = u;
      else
        w.sets[t.name] |= std::uint64_t{1} << u;
    }
  }
  v.kind = Verdict::Kind::Sat;
  v.witness = std::move(w);
  return v;
}

TrackAutomaton compile(const FormulaRef& f, const SolverOptions& opts) {
  FormulaRef g = is_flat(f) ? f : flatten(f);
  return Compiler(opts).run(g);
}

Verdict decide(const FormulaRef& f, int min_universe, const SolverOptions& opts, double eval_budget) {
  TrackAutomaton a;
  try {
    a = compile(f, opts);
  } catch (const ResourceLimit& e) {
    Verdict v;
    v.kind = Verdict::Kind::Resource;
    v.message = e.what();
    return v;
  }
  Verdict v = decide(a, min_universe);
  if (v.kind == Verdict::Kind::Sat) {
    FreeVariables fv = free_variables(f);
    for (const auto& x : fv.positions) v.witness.positions.emplace(x, 0);
    for (const auto& x : fv.sets) v.witness.sets.emplace(x, 0);
    if (v.witness.size <= 63 && evaluation_cost(f, v.witness.size) <= eval_budget) {
      if (!eval_ws1s(f, v.witness)) throw std::logic_error("solver witness fails evaluation");
      v.witness_evaluated = true;
    } else if (!a.accepts(v.witness)) {
      throw std::logic_error("solver witness rejected by its automaton");
    }
  }
  return v;
}

bool equivalent(const FormulaRef& f, const FormulaRef& g, const SolverOptions& opts) {
  return language_equal(compile(f, opts), compile(g, opts), opts);
}

}  // namespace trapinv
