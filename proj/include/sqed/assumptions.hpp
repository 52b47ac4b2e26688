#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sqed/cores.hpp"

namespace sqed {

struct AssumptionViolation {
  int assumption = 0;  // 1 or 2
  uint64_t cycle = 0;
  std::string instruction;
  uint64_t expected = 0;
  uint64_t observed = 0;
};

struct AssumptionReport {
  uint64_t runs = 0;
  std::vector<AssumptionViolation> violations;
};

// Randomized concrete validation of the two execution assumptions the QED
// property rests on. Each trial runs a random duplicated prefix from reset
// (establishing a consistent post-T_C state), snapshots it, then feeds a
// random interleaved original/duplicate test while observing operand data at
// the execution ports and values at the commit ports.
//
// Assumption 1: two executions of one opcode on equal operand data commit
// equal results. Assumption 2: a committed instruction's operand equals the
// last program-order producer's committed value, or the snapshot value when
// no producer exists.
AssumptionReport check_assumptions(const Core& core, uint64_t runs, uint64_t seed);
AssumptionReport check_assumptions(CoreKind kind, uint64_t runs, uint64_t seed);

}  // namespace sqed
