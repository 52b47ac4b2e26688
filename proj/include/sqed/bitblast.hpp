#pragma once

#include <unordered_map>

#include "sqed/cnf.hpp"
#include "sqed/expr.hpp"

namespace sqed {

struct Blasted {
  Cnf cnf;
  // SAT variable of each bit of each interned node, LSB first. Fresh and
  // injective; internal gate variables (carries etc.) do not appear here.
  std::unordered_map<NodeRef, std::vector<int>> var_map;
};

// Conjunction of width-1 formulas as CNF; each root bit is asserted with a
// unit clause. Arithmetic lowers to ripple-carry, multiplication to
// shift-and-add, variable shifts to mux stages.
Blasted bitblast(const std::vector<Expr>& formulas);

}  // namespace sqed
