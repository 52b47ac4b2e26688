#pragma once

#include "sqed/cores.hpp"
#include "sqed/qed.hpp"
#include "sqed/ts.hpp"

namespace sqed {

// Commit-point tracker as a fragment. Expressions are over fragment-local
// names until composed.
//
// In-order inputs: fetch_fire(1), dispatch_ready(1), exec_ready(1),
// mem_ready(1). The mode chain follows the first tracked instruction one
// stage per asserted ready; sif_complete holds from the final stage on.
//
// Out-of-order inputs: dispatch_fire(1), alloc_tag(tb), rob_head(tb),
// rob_count(tb+1). Every post-start allocation is marked; sif_complete holds
// once the head entry is marked or the buffer has drained.
struct TcFragment {
  TransitionSystem ts;
  Expr sif_complete, sif_rise, prev_sif;
  // in-order
  Expr mode, mode_next;
  // out-of-order
  Expr seen, marked_tag;
  std::vector<Expr> qed_alloc;
};
TcFragment build_tc_recorder(CoreKind kind, uint32_t rob_entries = 4);

// Operand recording buffers as a fragment.
//
// In-order inputs: mode(3), mode_next(3), prev_sif(1), s1_valid(1),
// s1_addr(rb), s1_data(w), s2_valid, s2_addr, s2_data, m_valid, m_addr(mb),
// m_data(w). Source reads record while the tracked instruction is past
// fetch and before the final stage; memory reads record in the last two
// stages, stopping one cycle after sif_complete.
//
// Out-of-order inputs: sif_now(1), prev_sif(1), s1_valid, s1_addr, s1_data,
// s1_wait(1), s1_tag(tb), s2_* likewise, m_valid, m_addr, m_data. Source
// reads record strictly before sif_now, memory reads until prev_sif.
struct OperandFragment {
  TransitionSystem ts;
  OperandBuffer src1, src2, mem;
};
OperandFragment build_operand_recorder(CoreKind kind, uint32_t width, uint32_t reg_bits,
                                       uint32_t mem_bits, uint32_t capacity,
                                       uint32_t rob_entries = 4);

}  // namespace sqed
