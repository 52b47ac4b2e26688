#pragma once

#include <optional>

#include "sqed/bmc.hpp"
#include "sqed/cores.hpp"
#include "sqed/isa.hpp"

namespace sqed {

// Register a maps to a + N/2, memory word i to i + M/2; both maps are
// involutive between halves.
struct QedConfig {
  uint32_t num_regs = 8;
  uint32_t mem_words = 8;
  uint32_t queue_depth = 4;
  uint32_t counter_width = 8;  // saturating commit counters
  bool assume_enable = true;   // pin the module's enable input to 1
};

// Selectively drop start-state constraints; used to demonstrate that each
// one is load-bearing.
struct Ablations {
  bool drop_c1 = false;
  bool drop_c2_reg = false;
  bool drop_c2_mem = false;
  bool drop_c2_testen = false;
  bool drop_c3 = false;
  bool drop_property_sif_gate = false;
};

// Instruction-level duplication: register indices shift up by N/2. Throws
// NotOriginal if the instruction already touches the duplicate half.
Instruction dup_map(const Instruction& instr, uint32_t num_regs);

// Same map as a circuit over a raw 16-bit word. Assumes the input encodes an
// original-half instruction.
Expr dup_map_expr(Expr word, uint32_t num_regs);

// Commit-parity tracker state handles.
struct QedReady {
  Expr count_original, count_duplicate;
  Expr qed_ready;
};

// The instruction-transforming module as a standalone fragment. Inputs:
// enable(1), next_instruction(16), fetch_next(1), original(1). The output
// expressions are over fragment-local names; compose and remap to use them.
struct QedModule {
  TransitionSystem ts;
  Expr insert_valid, delete_valid;
  Expr instruction_out, instruction_valid;
  Expr head_instruction, duplicate_instruction;
  Expr count, full, empty;
};
QedModule build_qed_module(const QedConfig& cfg);

// Commit-parity counters as a fragment. Inputs: p{i}_valid(1), p{i}_addr(rb)
// per port, gate(1). Counters tick only while gate is 1; callers needing
// per-port gating fold it into p{i}_valid and pass gate = 1.
struct QedReadyFragment {
  TransitionSystem ts;
  QedReady ready;
};
QedReadyFragment build_qed_ready(uint32_t num_ports, uint32_t reg_bits, const QedConfig& cfg);

// Step assumptions confining fired original instructions to the original
// half: canonical encoding, rd/rs1 (and rs2 for register forms) below N/2.
std::vector<Expr> original_constraints(const QedConfig& cfg, Expr instruction_word, Expr fire);

// T_C recorder handles. In-order exposes the Fig-5 mode chain; the ROB
// variant exposes the marked first-QED tag and per-entry post-start bits.
struct TcRecorder {
  Expr sif_complete;  // combinational, true from T_C on
  Expr sif_rise;      // one-cycle pulse at T_C
  Expr prev_sif;      // sif_complete delayed one cycle
  // in-order
  Expr mode;       // 3 bits, S0..S4
  Expr mode_next;  // combinational next mode
  // out-of-order
  Expr seen, marked_tag;
  std::vector<Expr> qed_alloc;  // per ROB entry: allocated after step 0
};

// One fixed-capacity recording buffer (per operand port).
struct OperandBuffer {
  uint32_t capacity = 0;
  Expr count;
  std::vector<Expr> valid, addr, data;
  std::vector<Expr> waiting, producer_tag;  // out-of-order only
};

struct OperandBuffers {
  OperandBuffer src1, src2, mem;
};

// The fully instrumented system: core + QED module + recorders + constraint
// assumptions + the gated consistency assert, ready for check().
struct Instrumented {
  Core core;  // core.ts is the composed system
  QedConfig cfg;
  Ablations ablations;

  // QED module signals
  std::string in_next_instruction, in_original, in_enable;
  Expr instruction_out, instruction_valid, insert_valid, delete_valid, dup_flag;
  Expr queue_count;

  TcRecorder tc;
  OperandBuffers buffers;
  QedReady ready;

  std::string property_name;  // the consistency assert
  TraceDecode decode;
};

Instrumented attach_qed(Core&& core, const QedConfig& cfg = {}, const Ablations& abl = {});

// Constrains the first `prefix_len` fetched instructions to the original
// half, modeling a checker that duplicates only after a warm-up program.
// Long-dormancy triggers then survive the reachable bound undetected.
void force_original_prefix(Instrumented& inst, uint32_t prefix_len);

// Convenience: build + instrument in one step.
Instrumented build_instrumented(CoreKind kind, const QedConfig& cfg = {},
                                const Ablations& abl = {}, const CoreParams& params = {});

// Input valuation for one simulated cycle of an instrumented system: the QED
// inputs as given, test inputs held 0, and the core fetch inputs driven from
// the module outputs (the bindings BMC enforces through step assumptions).
Env instrumented_inputs(const Simulator& sim, const Instrumented& inst, uint16_t next_instruction,
                        bool original, bool enable = true);

}  // namespace sqed
