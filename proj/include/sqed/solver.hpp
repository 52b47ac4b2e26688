#pragma once

#include <cstdint>
#include <vector>

#include "sqed/cnf.hpp"

namespace sqed {

enum class SatStatus { Sat, Unsat, Budget };

const char* sat_status_name(SatStatus s);

struct SatResult {
  SatStatus status = SatStatus::Budget;
  // 1-indexed by variable, entries 0/1; meaningful only when Sat.
  std::vector<uint8_t> model;
  uint64_t conflicts = 0;
  uint64_t decisions = 0;
  uint64_t propagations = 0;
};

// Conflict-driven solver. Deterministic for a fixed (cnf, seed); the seed
// only picks initial phases. conflict_limit 0 means unlimited, otherwise the
// run stops with Budget once the limit is exceeded.
SatResult sat_solve(const Cnf& cnf, uint64_t seed = 0, uint64_t conflict_limit = 0);

// Checks a model against the clause list.
bool model_satisfies(const Cnf& cnf, const std::vector<uint8_t>& model);

}  // namespace sqed
