#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "trapinv/logic.hpp"
#include "trapinv/syntax.hpp"

namespace trapinv {

// Bit per place, in InstanceNet::places order.
using Marking = std::vector<bool>;
using PlaceSet = std::vector<bool>;

struct Place {
  std::string state;
  int node;
};

struct NetTransition {
  std::vector<int> pre;   // sorted place indices
  std::vector<int> post;  // sorted place indices
  // Clause instantiations producing this transition (several after merging).
  std::vector<std::pair<int, std::vector<int>>> origins;
  std::string label;  // clause name and first assignment, e.g. "get(1)"
};

struct InstanceNet {
  const ValidatedSystem* system = nullptr;
  int n = 0;
  std::vector<Place> places;
  std::vector<NetTransition> transitions;
  Marking initial;
  std::size_t instantiations = 0;  // transitions before merging duplicates

  int num_places() const { return static_cast<int>(places.size()); }
  // -1 when the place is not part of this net.
  int place_index(const std::string& state, int node) const;
  std::string place_name(int p) const;

  std::map<std::pair<std::string, int>, int> index;
};

// The system must outlive the net.
InstanceNet instantiate(const ValidatedSystem& sys, int n);

// Keeps the places of component instances touched by some transition.
InstanceNet active_subnet(const InstanceNet& net);

bool enabled(const InstanceNet& net, const Marking& m, int t);
// Throws std::logic_error when firing would put a second token on a place.
Marking fire(const InstanceNet& net, const Marking& m, int t);

struct ReachabilityGraph {
  std::vector<Marking> markings;  // markings[0] is the initial marking
  std::vector<std::vector<std::pair<int, int>>> edges;  // (transition, target)
};

// Breadth-first exploration; throws ResourceLimit beyond max_markings.
ReachabilityGraph reachable(const InstanceNet& net, std::size_t max_markings = 1000000);
std::vector<Marking> deadlocks(const InstanceNet& net, const ReachabilityGraph& g);
bool contains(const ReachabilityGraph& g, const Marking& m);

bool is_trap(const InstanceNet& net, const PlaceSet& w);
// All traps as place bitmasks; nets with at most 24 places.
std::vector<std::uint32_t> enumerate_traps(const InstanceNet& net);
bool is_structural_one_invariant(const InstanceNet& net, const PlaceSet& w);
// All sets passing is_structural_one_invariant; nets with at most 24 places.
std::vector<std::uint32_t> enumerate_structural_one_invariants(const InstanceNet& net);
// Largest trap contained in q.
PlaceSet maximal_trap_within(const InstanceNet& net, PlaceSet q);
// m intersects every initially marked trap.
bool meets_all_marked_traps(const InstanceNet& net, const Marking& m);

PlaceSet mask_to_set(const InstanceNet& net, std::uint32_t mask);
std::uint32_t set_to_mask(const PlaceSet& w);
bool intersects(const PlaceSet& a, const PlaceSet& b);
int count_common(const PlaceSet& a, const PlaceSet& b);

// X_s -> {u | (s,u) in m}; states without places in the net map to {}.
Structure marking_to_structure(const InstanceNet& net, const Marking& m, bool primed = false);
Marking structure_to_marking(const InstanceNet& net, const Structure& s, bool primed = false);

// Component states of every node, e.g. "0:w,f 1:e,b".
std::string describe_marking(const InstanceNet& net, const Marking& m);
std::string to_dot(const InstanceNet& net);

}  // namespace trapinv
