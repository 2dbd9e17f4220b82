#include "trapinv/petri.hpp"

#include <algorithm>
#include <bit>
#include <deque>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

#include "trapinv/models.hpp"
#include "trapinv/solver.hpp"

namespace trapinv {

int InstanceNet::place_index(const std::string& state, int node) const {
  auto it = index.find({state, node});
  return it == index.end() ? -1 : it->second;
}

std::string InstanceNet::place_name(int p) const {
  return "(" + places[p].state + "," + std::to_string(places[p].node) + ")";
}

namespace {

void add_place(InstanceNet& net, const std::string& state, int node) {
  net.index[{state, node}] = static_cast<int>(net.places.size());
  net.places.push_back(Place{state, node});
}

std::string assignment_label(const std::vector<int>& a) {
  std::string s = "(";
  for (std::size_t i = 0; i < a.size(); ++i) s += (i ? "," : "") + std::to_string(a[i]);
  return s + ")";
}

}  // namespace

InstanceNet instantiate(const ValidatedSystem& sys, int n) {
  if (n < 1) throw std::invalid_argument("universe size must be >= 1");
  InstanceNet net;
  net.system = &sys;
  net.n = n;
  for (const auto& s : sys.states)
    for (int u = 0; u < n; ++u) add_place(net, s, u);
  net.initial.assign(net.places.size(), false);
  for (const auto& c : sys.spec.components)
    for (int u = 0; u < n; ++u) net.initial[net.place_index(c.initial, u)] = true;

  std::map<std::pair<std::vector<int>, std::vector<int>>, int> seen;
  const auto& clauses = sys.spec.clauses;
  for (int ci = 0; ci < static_cast<int>(clauses.size()); ++ci) {
    for (const auto& model : minimal_models(sys, clauses[ci], n)) {
      std::set<int> pre, post;
      for (const auto& [port, mask] : model.ports)
        for (int u = 0; u < n; ++u)
          if ((mask >> u) & 1u) {
            pre.insert(net.place_index(sys.pre(port), u));
            post.insert(net.place_index(sys.post(port), u));
          }
      std::vector<int> pv(pre.begin(), pre.end()), qv(post.begin(), post.end());
      ++net.instantiations;
      auto [it, fresh] = seen.emplace(std::make_pair(pv, qv), static_cast<int>(net.transitions.size()));
      if (fresh) {
        NetTransition t;
        t.pre = pv;
        t.post = qv;
        t.label = clauses[ci].name + assignment_label(model.assignment);
        net.transitions.push_back(std::move(t));
      }
      net.transitions[it->second].origins.emplace_back(ci, model.assignment);
    }
  }
  return net;
}

InstanceNet active_subnet(const InstanceNet& net) {
  const auto& sys = *net.system;
  std::set<std::pair<int, int>> active;  // (type, node)
  for (const auto& t : net.transitions)
    for (int p : t.pre) active.insert({sys.state_type.at(net.places[p].state), net.places[p].node});
  InstanceNet out;
  out.system = net.system;
  out.n = net.n;
  out.instantiations = net.instantiations;
  std::vector<int> remap(net.places.size(), -1);
  for (int p = 0; p < net.num_places(); ++p) {
    const auto& pl = net.places[p];
    if (!active.count({sys.state_type.at(pl.state), pl.node})) continue;
    remap[p] = static_cast<int>(out.places.size());
    add_place(out, pl.state, pl.node);
    out.initial.push_back(net.initial[p]);
  }
  for (const auto& t : net.transitions) {
    NetTransition r = t;
    for (auto* v : {&r.pre, &r.post})
      for (int& p : *v) p = remap[p];
    out.transitions.push_back(std::move(r));
  }
  return out;
}

bool enabled(const InstanceNet& net, const Marking& m, int t) {
  for (int p : net.transitions[t].pre)
    if (!m[p]) return false;
  return true;
}

Marking fire(const InstanceNet& net, const Marking& m, int t) {
  const auto& tr = net.transitions[t];
  Marking r = m;
  for (int p : tr.pre) r[p] = false;
  for (int p : tr.post) {
    if (r[p]) throw std::logic_error("firing " + tr.label + " puts a second token on " + net.place_name(p));
    r[p] = true;
  }
  return r;
}

ReachabilityGraph reachable(const InstanceNet& net, std::size_t max_markings) {
  ReachabilityGraph g;
  std::unordered_map<Marking, int> id;
  g.markings.push_back(net.initial);
  g.edges.emplace_back();
  id.emplace(net.initial, 0);
  for (std::size_t i = 0; i < g.markings.size(); ++i) {
    for (int t = 0; t < static_cast<int>(net.transitions.size()); ++t) {
      if (!enabled(net, g.markings[i], t)) continue;
      Marking next = fire(net, g.markings[i], t);
      auto [it, fresh] = id.emplace(next, static_cast<int>(g.markings.size()));
      if (fresh) {
        if (g.markings.size() >= max_markings)
          throw ResourceLimit("reachability limit of " + std::to_string(max_markings) + " markings exceeded");
        g.markings.push_back(std::move(next));
        g.edges.emplace_back();
      }
      g.edges[i].emplace_back(t, it->second);
    }
  }
  return g;
}

std::vector<Marking> deadlocks(const InstanceNet&, const ReachabilityGraph& g) {
  std::vector<Marking> out;
  for (std::size_t i = 0; i < g.markings.size(); ++i)
    if (g.edges[i].empty()) out.push_back(g.markings[i]);
  return out;
}

bool contains(const ReachabilityGraph& g, const Marking& m) {
  return std::find(g.markings.begin(), g.markings.end(), m) != g.markings.end();
}

bool is_trap(const InstanceNet& net, const PlaceSet& w) {
  for (const auto& t : net.transitions) {
    bool takes = std::any_of(t.pre.begin(), t.pre.end(), [&](int p) { return w[p]; });
    if (!takes) continue;
    bool gives = std::any_of(t.post.begin(), t.post.end(), [&](int p) { return w[p]; });
    if (!gives) return false;
  }
  return true;
}

namespace {

struct MaskNet {
  std::vector<std::uint32_t> pre, post;
  std::uint32_t initial = 0;
};

MaskNet to_masks(const InstanceNet& net) {
  if (net.num_places() > 24)
    throw ResourceLimit("subset enumeration is limited to 24 places, net has " +
                        std::to_string(net.num_places()));
  MaskNet mn;
  for (const auto& t : net.transitions) {
    std::uint32_t a = 0, b = 0;
    for (int p : t.pre) a |= 1u << p;
    for (int p : t.post) b |= 1u << p;
    mn.pre.push_back(a);
    mn.post.push_back(b);
  }
  mn.initial = set_to_mask(net.initial);
  return mn;
}

}  // namespace

std::vector<std::uint32_t> enumerate_traps(const InstanceNet& net) {
  MaskNet mn = to_masks(net);
  const std::uint64_t count = std::uint64_t{1} << net.num_places();
  std::vector<std::uint32_t> out;
  const std::size_t k = mn.pre.size();
  for (std::uint64_t w64 = 0; w64 < count; ++w64) {
    const auto w = static_cast<std::uint32_t>(w64);
    bool ok = true;
    for (std::size_t t = 0; t < k && ok; ++t)
      if ((mn.pre[t] & w) && !(mn.post[t] & w)) ok = false;
    if (ok) out.push_back(w);
  }
  return out;
}

bool is_structural_one_invariant(const InstanceNet& net, const PlaceSet& w) {
  if (count_common(w, net.initial) != 1) return false;
  for (const auto& t : net.transitions) {
    int a = 0, b = 0;
    for (int p : t.pre) a += w[p];
    for (int p : t.post) b += w[p];
    if (a > 1) continue;
    if (a != b) return false;
  }
  return true;
}

std::vector<std::uint32_t> enumerate_structural_one_invariants(const InstanceNet& net) {
  MaskNet mn = to_masks(net);
  const std::uint64_t count = std::uint64_t{1} << net.num_places();
  std::vector<std::uint32_t> out;
  const std::size_t k = mn.pre.size();
  for (std::uint64_t w64 = 0; w64 < count; ++w64) {
    const auto w = static_cast<std::uint32_t>(w64);
    if (std::popcount(w & mn.initial) != 1) continue;
    bool ok = true;
    for (std::size_t t = 0; t < k && ok; ++t) {
      int a = std::popcount(mn.pre[t] & w);
      if (a > 1) continue;
      if (a != std::popcount(mn.post[t] & w)) ok = false;
    }
    if (ok) out.push_back(w);
  }
  return out;
}

PlaceSet maximal_trap_within(const InstanceNet& net, PlaceSet q) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (const auto& t : net.transitions) {
      bool takes = std::any_of(t.pre.begin(), t.pre.end(), [&](int p) { return q[p]; });
      if (!takes) continue;
      bool gives = std::any_of(t.post.begin(), t.post.end(), [&](int p) { return q[p]; });
      if (gives) continue;
      for (int p : t.pre) q[p] = false;
      changed = true;
    }
  }
  return q;
}

bool meets_all_marked_traps(const InstanceNet& net, const Marking& m) {
  PlaceSet q(m.size());
  for (std::size_t p = 0; p < m.size(); ++p) q[p] = !m[p];
  // Every trap avoiding m lies inside the largest one.
  return !intersects(maximal_trap_within(net, q), net.initial);
}

PlaceSet mask_to_set(const InstanceNet& net, std::uint32_t mask) {
  PlaceSet w(net.places.size(), false);
  for (int p = 0; p < net.num_places(); ++p) w[p] = (mask >> p) & 1u;
  return w;
}

std::uint32_t set_to_mask(const PlaceSet& w) {
  std::uint32_t m = 0;
  for (std::size_t p = 0; p < w.size() && p < 32; ++p)
    if (w[p]) m |= 1u << p;
  return m;
}

bool intersects(const PlaceSet& a, const PlaceSet& b) {
  for (std::size_t p = 0; p < a.size(); ++p)
    if (a[p] && b[p]) return true;
  return false;
}

int count_common(const PlaceSet& a, const PlaceSet& b) {
  int c = 0;
  for (std::size_t p = 0; p < a.size(); ++p) c += a[p] && b[p];
  return c;
}

Structure marking_to_structure(const InstanceNet& net, const Marking& m, bool primed) {
  Structure s;
  s.size = net.n;
  for (const auto& st : net.system->states) s.sets[state_set_name(st, primed)] = 0;
  for (int p = 0; p < net.num_places(); ++p)
    if (m[p]) s.sets[state_set_name(net.places[p].state, primed)] |= std::uint64_t{1} << net.places[p].node;
  return s;
}

Marking structure_to_marking(const InstanceNet& net, const Structure& s, bool primed) {
  Marking m(net.places.size(), false);
  for (int p = 0; p < net.num_places(); ++p) {
    auto it = s.sets.find(state_set_name(net.places[p].state, primed));
    if (it != s.sets.end()) m[p] = (it->second >> net.places[p].node) & 1u;
  }
  return m;
}

std::string describe_marking(const InstanceNet& net, const Marking& m) {
  std::ostringstream os;
  for (int u = 0; u < net.n; ++u) {
    if (u) os << ' ';
    os << u << ':';
    bool first = true;
    for (const auto& st : net.system->states) {
      int p = net.place_index(st, u);
      if (p >= 0 && m[p]) {
        os << (first ? "" : ",") << st;
        first = false;
      }
    }
    if (first) os << '-';
  }
  return os.str();
}

std::string to_dot(const InstanceNet& net) {
  std::ostringstream os;
  os << "digraph net {\n  rankdir=LR;\n";
  for (int p = 0; p < net.num_places(); ++p)
    os << "  p" << p << " [shape=circle,label=\"" << net.places[p].state << "," << net.places[p].node
       << "\"" << (net.initial[p] ? ",style=filled,fillcolor=gray80" : "") << "];\n";
  for (std::size_t t = 0; t < net.transitions.size(); ++t) {
    const auto& tr = net.transitions[t];
    os << "  t" << t << " [shape=box,label=\"" << tr.label << "\"];\n";
    for (int p : tr.pre) os << "  p" << p << " -> t" << t << ";\n";
    for (int p : tr.post) os << "  t" << t << " -> p" << p << ";\n";
  }
  os << "}\n";
  return os.str();
}

}  // namespace trapinv
