#pragma once

#include <map>
#include <string>

#include "trapinv/logic.hpp"

namespace trapinv {

// Renders a WS1S formula as a Mona program in string mode (m2l-str), so
// the finite-word semantics of the built-in solver is preserved. Free
// variables become var1/var2 declarations; words shorter than
// `min_universe` are excluded by an extra conjunct. Successor atoms are
// spelled out with the order, giving succ(last) = last.
std::string to_mona(const FormulaRef& f, int min_universe = 1);

// Identifier used for `name` in the Mona output (primes and reserved
// characters replaced, keywords avoided).
std::string mona_identifier(const std::string& name);

}  // namespace trapinv
