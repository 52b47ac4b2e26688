#pragma once

#include <string>
#include <vector>

#include "sqed/cores.hpp"
#include "sqed/qed.hpp"

namespace sqed {

// Start-state and step assumptions excluding unreachable-state false
// positives, plus the gated consistency property. All expressions are over
// the instrumented (composed) system.
struct ConstraintSet {
  std::vector<Expr> c1_init;  // commit-order coherence of the start state
  std::vector<Expr> c2_step;  // register/memory half equality at sif_rise
  std::vector<Expr> c3_step;  // recorded operand data anchored at sif_rise
  Expr property;
};

ConstraintSet build_constraints(const Core& core, const TcRecorder& tc,
                                const OperandBuffers& bufs, const QedReady& ready,
                                const QedConfig& cfg, const Ablations& abl);

void apply_constraints(TransitionSystem& ts, const ConstraintSet& cs,
                       const std::string& property_name);

}  // namespace sqed
