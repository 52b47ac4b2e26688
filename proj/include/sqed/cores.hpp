#pragma once

#include <map>

#include "sqed/isa.hpp"
#include "sqed/sim.hpp"
#include "sqed/ts.hpp"

namespace sqed {

struct CoreParams {
  uint32_t width = 8;      // data width
  uint32_t num_regs = 8;   // N, power of two; encoding fields allow up to 8
  uint32_t mem_words = 8;  // M, power of two
  // out-of-order parameters
  uint32_t rob_entries = 4;
  uint32_t commit_width = 2;
  uint32_t rs_alu = 2;
  uint32_t rs_lsu = 1;
};

enum class CoreKind { IOC5, OOC };
const char* core_kind_name(CoreKind k);
CoreKind core_kind_from_name(const std::string& name);

// Register writeback as seen at commit time.
struct CommitPort {
  Expr valid, addr, data;
};

struct MemWritePort {
  Expr valid, addr, data;
};

// A register read performed when an instruction is dispatched. `waiting` and
// `producer_tag` are meaningful on the out-of-order core; the in-order core
// reports waiting == 0.
struct OperandReadPort {
  Expr valid, addr, data, waiting, producer_tag;
};

// A data-memory read performed by a load.
struct MemReadPort {
  Expr valid, addr, data, tag;
};

// Operand values an execution unit actually consumes, after any forwarding.
struct ExecPort {
  std::string name;
  Expr valid, tag, used1, used2;
};

struct Core {
  CoreKind kind = CoreKind::IOC5;
  CoreParams params;
  TransitionSystem ts;

  // fetch-side inputs (names of ts inputs)
  std::string in_instr, in_valid, in_dup_mem;
  std::string in_test_enable, in_test_addr, in_test_data;

  Expr fetch_ready;     // accepts an instruction this cycle
  Expr fetch_fire;      // fetch_ready && instr_valid
  Expr dispatch_ready;  // stage progress, in-order core
  Expr exec_ready;
  Expr mem_ready;

  std::vector<CommitPort> commits;
  std::vector<MemWritePort> mem_writes;
  OperandReadPort src1, src2;
  MemReadPort mem_read;
  std::vector<ExecPort> execs;

  Expr dispatch_fire;  // instruction enters the machine this cycle
  Expr alloc_tag;      // out-of-order: ROB tag being allocated
  Expr rob_head;       // out-of-order only
  Expr commit0_tag, commit1_tag;
  Expr idle;  // no instruction in flight

  // Named internal wires eligible for fault injection.
  std::map<std::string, Expr> taps;
  Expr tap(const std::string& name) const;

  Expr reg(uint32_t i) const;  // architectural register state var
  Expr mem(uint32_t i) const;

  uint32_t reg_bits() const;  // index width
  uint32_t mem_bits() const;
};

Core build_core_ioc5(const CoreParams& params = {});
Core build_core_ooc(const CoreParams& params = {});
Core build_core(CoreKind kind, const CoreParams& params = {});

// Feeds a program through the fetch handshake, then drains with invalid
// fetches until the machine is idle (or max_cycles is hit). Returns the
// number of cycles simulated; the simulator is left at the final state.
struct ProgramRun {
  uint64_t cycles = 0;
  bool drained = false;
};
ProgramRun run_program(Simulator& sim, const Core& core, const std::vector<Instruction>& prog,
                       uint64_t max_cycles = 10000);

// Architectural view of a simulated core state.
ArchState arch_of(const Simulator& sim, const Core& core);

}  // namespace sqed
