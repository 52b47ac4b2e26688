#pragma once

#include <string>
#include <vector>

#include "sqed/errors.hpp"

namespace sqed {

// Clausal formula over 1-based variables; literals are signed DIMACS ints.
struct Cnf {
  int num_vars = 0;
  std::vector<std::vector<int>> clauses;

  int new_var() { return ++num_vars; }

  void add_clause(std::vector<int> lits) {
    for (int l : lits) {
      int v = l < 0 ? -l : l;
      if (v == 0 || v > num_vars) throw BadParams("literal " + std::to_string(l));
    }
    clauses.push_back(std::move(lits));
  }
};

std::string to_dimacs(const Cnf& cnf);
Cnf parse_dimacs(const std::string& text);

}  // namespace sqed
