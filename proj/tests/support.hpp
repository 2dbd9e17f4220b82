#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "trapinv/logic.hpp"
#include "trapinv/solver.hpp"
#include "trapinv/syntax.hpp"

namespace testing {

inline std::string source_path(const std::string& rel) { return std::string(TRAPINV_SOURCE_DIR) + "/" + rel; }

inline trapinv::ValidatedSystem corpus(const std::string& name) {
  return trapinv::load_system(source_path("corpus/" + name + ".cbs"));
}

inline const std::vector<std::string>& corpus_names() {
  static const std::vector<std::string> names = {"philosophers", "alternating",    "semaphore",
                                                 "broadcast_mutex", "token_ring", "preemptive",
                                                 "herman",       "israeli_jalfon"};
  return names;
}

// Calls fn on every structure of the given size over the free variables.
inline void for_each_structure(int size, const std::vector<std::string>& positions,
                               const std::vector<std::string>& sets,
                               const std::function<void(const trapinv::Structure&)>& fn) {
  trapinv::Structure s;
  s.size = size;
  std::vector<int> pos(positions.size(), 0);
  std::vector<std::uint64_t> bits(sets.size(), 0);
  const std::uint64_t full = std::uint64_t{1} << size;
  while (true) {
    for (std::size_t i = 0; i < positions.size(); ++i) s.positions[positions[i]] = pos[i];
    for (std::size_t i = 0; i < sets.size(); ++i) s.sets[sets[i]] = bits[i];
    fn(s);
    std::size_t i = 0;
    for (; i < positions.size(); ++i) {
      if (++pos[i] < size) break;
      pos[i] = 0;
    }
    if (i < positions.size()) continue;
    std::size_t j = 0;
    for (; j < sets.size(); ++j) {
      if (++bits[j] < full) break;
      bits[j] = 0;
    }
    if (j == sets.size()) return;
  }
}

inline void for_each_structure(const trapinv::FormulaRef& f, int size,
                               const std::function<void(const trapinv::Structure&)>& fn) {
  auto fv = trapinv::free_variables(f);
  for_each_structure(size, {fv.positions.begin(), fv.positions.end()}, {fv.sets.begin(), fv.sets.end()},
                     fn);
}

// Calls fn on every structure of the given size accepted by the automaton,
// walking only prefixes that can still reach acceptance.
inline void for_each_accepted(const trapinv::TrackAutomaton& a, int size,
                              const std::function<void(const trapinv::Structure&)>& fn) {
  const int tracks = static_cast<int>(a.tracks().size());
  const std::uint32_t letters = 1u << tracks;
  auto letter_bits = [&](std::uint32_t l) {
    std::vector<bool> bits(tracks);
    for (int t = 0; t < tracks; ++t) bits[t] = (l >> t) & 1;
    return bits;
  };
  // live[k][s]: some word of length k leads from s to acceptance.
  std::vector<std::vector<char>> live(size + 1, std::vector<char>(a.num_states(), 0));
  for (int s = 0; s < a.num_states(); ++s) live[0][s] = a.accepting(s);
  for (int k = 1; k <= size; ++k)
    for (int s = 0; s < a.num_states(); ++s)
      for (std::uint32_t l = 0; l < letters && !live[k][s]; ++l) live[k][s] = live[k - 1][a.step(s, letter_bits(l))];
  std::vector<std::uint32_t> word(size);
  std::function<void(int, int)> walk = [&](int pos, int state) {
    if (pos == size) {
      trapinv::Structure st;
      st.size = size;
      for (int t = 0; t < tracks; ++t) {
        std::uint64_t bits = 0;
        for (int u = 0; u < size; ++u)
          if ((word[u] >> t) & 1) bits |= std::uint64_t{1} << u;
        const auto& tr = a.tracks()[t];
        if (tr.first_order) {
          for (int u = 0; u < size; ++u)
            if ((bits >> u) & 1) st.positions[tr.name] = u;
        } else {
          st.sets[tr.name] = bits;
        }
      }
      fn(st);
      return;
    }
    for (std::uint32_t l = 0; l < letters; ++l) {
      int next = a.step(state, letter_bits(l));
      if (!live[size - pos - 1][next]) continue;
      word[pos] = l;
      walk(pos + 1, next);
    }
  };
  if (size >= 1 && live[size][a.initial()]) walk(0, a.initial());
}

// Random formulas over position variables x, y and predicates p, q.
// With `ws1s`, also eps, last(), set quantifiers over X.
class FormulaGen {
 public:
  FormulaGen(std::uint32_t seed, bool ws1s) : rng_(seed), ws1s_(ws1s) {}

  trapinv::FormulaRef formula(int depth) {
    using namespace trapinv::fm;
    if (depth == 0) return atom();
    switch (pick(ws1s_ ? 9 : 7)) {
      case 0: return neg(formula(depth - 1));
      case 1: return conj(formula(depth - 1), formula(depth - 1));
      case 2: return disj(formula(depth - 1), formula(depth - 1));
      case 3: return implies(formula(depth - 1), formula(depth - 1));
      case 4: return exists1(pos_var(), formula(depth - 1));
      case 5: return forall1(pos_var(), formula(depth - 1));
      case 6: return atom();
      case 7: return exists2("X", formula(depth - 1));
      default: return forall2("X", formula(depth - 1));
    }
  }

 private:
  int pick(int n) { return std::uniform_int_distribution<int>(0, n - 1)(rng_); }
  std::string pos_var() { return pick(2) ? "x" : "y"; }

  trapinv::TermRef term() {
    using namespace trapinv::fm;
    if (ws1s_ && pick(6) == 0) return root();
    trapinv::TermRef t = var(pos_var());
    for (int k = pick(4); k >= 2; --k) t = succ(t);
    return t;
  }

  trapinv::FormulaRef atom() {
    using namespace trapinv::fm;
    switch (pick(ws1s_ ? 7 : 5)) {
      case 0: return leq(term(), term());
      case 1: return eq(term(), term());
      case 2: return member("p", term());
      case 3: return member("q", term());
      case 4: return lt(term(), term());
      case 5: return max(term());
      default: return member("X", term());
    }
  }

  std::mt19937 rng_;
  bool ws1s_;
};

// IL formula pool for the translation checks: every formula of depth <= 3
// produced by the generator from a fixed seed range, plus hand-picked
// wrap-around cases.
inline std::vector<trapinv::FormulaRef> il_pool() {
  std::vector<trapinv::FormulaRef> pool;
  for (std::uint32_t seed = 1; seed <= 300; ++seed) {
    FormulaGen gen(seed, false);
    pool.push_back(gen.formula(1 + seed % 3));
  }
  for (auto s : {"succ(x) = y", "succ(succ(x)) = x", "p(succ(x)) -> q(x)", "forall x. p(x) -> p(succ(x))",
                 "exists x. succ(x) <= x", "forall x. exists y. succ(y) = x", "succ(x) = succ(y)"})
    pool.push_back(trapinv::parse_formula(s));
  return pool;
}

}  // namespace testing
