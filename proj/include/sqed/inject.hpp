#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "sqed/cores.hpp"

namespace sqed {

// ---- logic-bug activation criteria ----
// Fires as a pulse (or combinationally) whenever the condition holds; the
// watcher state is symbolic-eligible so a bounded check from a symbolic start
// may begin arbitrarily close to firing, while concrete reset starts it at 0.
struct ActForwarding {};  // a forwarding/wakeup path is live this cycle
struct ActTwoInstrWithinX {
  Opcode op1 = Opcode::MUL;
  Opcode op2 = Opcode::MUL;
  uint32_t x = 2;  // second opcode decoded within x cycles after the first
};
struct ActRRegsEqualV {
  uint32_t r = 2;  // registers first..first+r-1
  uint64_t v = 20;
  uint32_t first = 0;
};
struct ActSeqNWithinY {
  uint32_t n = 2;  // opcode sequence length, derived from seed
  uint32_t y = 4;  // cycle budget from the first matched element
  uint64_t seed = 0;
};
struct ActCacheState {};  // no cache exists on either core; always rejected

using BugActivation =
    std::variant<ActForwarding, ActTwoInstrWithinX, ActRRegsEqualV, ActSeqNWithinY, ActCacheState>;

enum class BugEffect { NextToNop, OpcodeCorrupt, RegReadCorrupt };

struct BugSpec {
  std::string id;
  BugActivation activation;
  BugEffect effect = BugEffect::RegReadCorrupt;
  std::string target_wire;  // tap name; empty selects the canonical wire for the effect
};

// ---- hardware-Trojan activation criteria ----
struct ActSeqOnWires {
  uint32_t n = 4;   // pattern sequence length
  uint32_t m1 = 4;  // watched wires: low m1 bits of the fetch word
  uint64_t seed = 0;
  bool overlap_friendly = false;  // derive patterns so firings can chain
};
struct ActCounter {
  uint64_t x1 = 65535;  // free-running cycle counter threshold
};
struct ActComparator {
  uint32_t m2 = 8;  // compared register-file bits, low bits first
  uint64_t seed = 0;
};
struct ActRareEventCounter {
  uint64_t x2 = 65535;  // counted event: data-memory write to the top word
};

using TrojanActivation =
    std::variant<ActSeqOnWires, ActCounter, ActComparator, ActRareEventCounter>;

enum class TrojanEffect {
  InFlightToNop,
  InFlightOpcode,
  RegReadCorrupt,
  ExecResultCorrupt,
  RobCorruptEarlyCommit,  // out-of-order core only
};

struct TrojanSpec {
  std::string id;
  TrojanActivation activation;
  TrojanEffect effect = TrojanEffect::RegReadCorrupt;
  std::string stealth_style;  // descriptive tag, carried through reports
};

// Activation is a conjunction over snapshot bits of a concrete deep-execution
// state; effect is fixed to a corrupted register read.
struct ExtremalSpec {
  std::string id;
  uint64_t seed = 0;
  std::vector<Instruction> program;
  uint64_t stop_cycle = 0;
  uint32_t random_suffix_len = 100;
  std::vector<std::pair<std::string, uint32_t>> bits;  // flop subset: (state var, bit index)
  uint64_t pattern = 0;                                // recorded value of bits[i] at bit i
};

const char* bug_effect_name(BugEffect e);
const char* trojan_effect_name(TrojanEffect e);
std::string activation_name(const BugActivation& a);
std::string activation_name(const TrojanActivation& a);

// Core with a watcher state machine grafted in (state names under "inj.") and
// the victim wire muxed to its corrupted value while `fired` holds. With the
// watcher quiescent the system is bit-identical to the input core. The fired
// signal is also available as tap "inj.fired".
struct Injected {
  Core core;
  Expr fired;
  std::string victim;  // resolved tap name of the corrupted wire
};

Injected inject(const Core& core, const BugSpec& spec);
Injected inject(const Core& core, const TrojanSpec& spec);
Injected inject(const Core& core, const ExtremalSpec& spec);

// Test fixture: the effect's corruption applied unconditionally (fired = 1).
Injected inject_always(const Core& core, BugEffect effect);

// Scenario generators. Grids are sized for desk-scale cores: activation
// lengths 2..64, trigger counters 16..32 bits.
struct SuiteGrid {
  std::vector<uint32_t> two_instr_x = {2, 4, 8};
  std::vector<uint32_t> rregs_r = {2, 4, 8};
  std::vector<uint64_t> rregs_v = {20, 33};
  std::vector<std::pair<uint32_t, uint32_t>> seq_ny = {{2, 4},   {4, 8},   {8, 16},
                                                       {16, 32}, {16, 64}, {32, 64},
                                                       {64, 64}};
  std::vector<uint64_t> counter_x1 = {(1ull << 16) - 1, (1ull << 24) - 1, (1ull << 32) - 1};
  std::vector<uint64_t> rare_x2 = {(1ull << 16) - 1, (1ull << 20) - 1};
  std::vector<uint32_t> seq_wires_n = {2, 8, 32, 64};
  std::vector<uint32_t> comparator_m2 = {8, 12, 16};
};

std::vector<BugSpec> gen_bug_suite(CoreKind kind, const SuiteGrid& grid = {});
std::vector<TrojanSpec> gen_ht_suite(CoreKind kind, const SuiteGrid& grid = {});

// Runs `program_text` from concrete reset to a seed-chosen stop cycle, then a
// random 100-instruction valid suffix, and snapshots n_flops state bits
// (n_flops <= 64; the values pack into `pattern`).
ExtremalSpec gen_extremal(const Core& core, const std::string& program_text, uint64_t seed,
                          uint32_t n_flops);

// Straight-line unrolled matrix-product workload, also shipped as
// assets/workload.asm. Branch-free source for deep concrete runs.
const char* default_workload();

}  // namespace sqed
