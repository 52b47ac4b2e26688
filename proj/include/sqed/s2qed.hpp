#pragma once

#include <optional>

#include "sqed/bmc.hpp"
#include "sqed/inject.hpp"

namespace sqed {

// Two in-order core instances checked against each other: both fetch the one
// symbolic instruction under verification at step 0 (CPU-2 with register
// fields remapped), then NOPs. Step-0 assumptions equate mapped register
// pairs and the memories; the consistency assert compares the register files
// the cycle after CPU-1 commits the instruction.
struct S2qedConfig {
  CoreParams params;
  std::vector<uint32_t> mapping;  // bijection on register indices; empty = identity
  std::optional<BugSpec> trojan;  // injected identically into both instances
  bool cpu2_probe = false;        // fixture: corrupt CPU-2's decode unconditionally
};

struct S2qedSystem {
  TransitionSystem ts;
  std::string property_name;
  uint32_t num_regs = 8;
  std::vector<uint32_t> mapping;
};

S2qedSystem build_s2qed(const S2qedConfig& cfg = {});

CheckResult s2qed_check(const S2qedSystem& sys, int k_max, const CheckOptions& opt = {});

}  // namespace sqed
