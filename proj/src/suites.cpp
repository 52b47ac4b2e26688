#include <bit>
#include <random>

#include "sqed/errors.hpp"
#include "sqed/inject.hpp"

namespace sqed {

namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::string bug_id(const BugActivation& a, BugEffect e) {
  return "bug-" + activation_name(a) + "-" + bug_effect_name(e);
}

std::string ht_id(const TrojanActivation& a, TrojanEffect e, bool overlap = false) {
  std::string id = "ht-" + activation_name(a) + "-" + trojan_effect_name(e);
  if (overlap) id += "-overlap";
  return id;
}

constexpr BugEffect kAllBugEffects[] = {BugEffect::NextToNop, BugEffect::OpcodeCorrupt,
                                        BugEffect::RegReadCorrupt};
// Value effects only: a single killed instruction permanently unbalances the
// original/duplicate commit counters, so the readiness window never reopens
// and no bounded counterexample exists. Kill effects are paired only with
// triggers that can fire once per half.
constexpr BugEffect kValueBugEffects[] = {BugEffect::OpcodeCorrupt, BugEffect::RegReadCorrupt};
constexpr TrojanEffect kValueHtEffects[] = {TrojanEffect::InFlightOpcode,
                                            TrojanEffect::RegReadCorrupt,
                                            TrojanEffect::ExecResultCorrupt};

}  // namespace

std::vector<BugSpec> gen_bug_suite(CoreKind kind, const SuiteGrid& grid) {
  std::vector<BugSpec> out;
  auto add = [&](BugActivation a, BugEffect e) {
    out.push_back(BugSpec{bug_id(a, e), a, e, ""});
  };

  for (BugEffect e : kAllBugEffects) add(ActForwarding{}, e);

  for (uint32_t x : grid.two_instr_x)
    for (BugEffect e : kAllBugEffects)
      add(ActTwoInstrWithinX{Opcode::MUL, Opcode::MUL, x}, e);

  for (uint32_t r : grid.rregs_r)
    for (uint64_t v : grid.rregs_v)
      for (BugEffect e : kValueBugEffects) add(ActRRegsEqualV{r, v}, e);
  // Next-to-nop pairings need a pre-readiness firing window, which only the
  // in-order core's delayed readiness rise provides.
  if (kind == CoreKind::IOC5 && !grid.rregs_v.empty())
    for (uint32_t r : grid.rregs_r) add(ActRRegsEqualV{r, grid.rregs_v[0]}, BugEffect::NextToNop);

  for (auto [n, y] : grid.seq_ny) {
    uint64_t seed = uint64_t(n) * 1000 + y;
    if (n == 2) {
      for (BugEffect e : kAllBugEffects) add(ActSeqNWithinY{n, y, seed}, e);
    } else {
      for (BugEffect e : kValueBugEffects) add(ActSeqNWithinY{n, y, seed}, e);
    }
  }
  return out;
}

std::vector<TrojanSpec> gen_ht_suite(CoreKind kind, const SuiteGrid& grid) {
  std::vector<TrojanSpec> out;
  auto add = [&](TrojanActivation a, TrojanEffect e, const std::string& style,
                 bool overlap = false) {
    out.push_back(TrojanSpec{ht_id(a, e, overlap), a, e, style});
  };

  for (uint64_t x1 : grid.counter_x1) {
    for (TrojanEffect e : kValueHtEffects) add(ActCounter{x1}, e, "time-bomb");
    if (kind == CoreKind::OOC)
      add(ActCounter{x1}, TrojanEffect::RobCorruptEarlyCommit, "time-bomb");
  }

  for (uint64_t x2 : grid.rare_x2)
    for (TrojanEffect e : kValueHtEffects) add(ActRareEventCounter{x2}, e, "event-bomb");

  for (uint32_t n : grid.seq_wires_n) {
    uint64_t seed = uint64_t(n) * 100 + 4;
    add(ActSeqOnWires{n, 4, seed, false}, TrojanEffect::InFlightOpcode, "cheat-code");
  }
  if (!grid.seq_wires_n.empty()) {
    uint32_t n = grid.seq_wires_n[0];
    add(ActSeqOnWires{n, 4, uint64_t(n) * 100 + 4, true}, TrojanEffect::InFlightToNop,
        "cheat-code", true);
  }

  for (uint32_t m2 : grid.comparator_m2)
    for (TrojanEffect e : kValueHtEffects) add(ActComparator{m2, m2}, e, "data-trigger");
  // As with next-to-nop above: the kill pairing needs the in-order core's
  // pre-readiness window.
  if (kind == CoreKind::IOC5 && grid.comparator_m2.size() >= 2) {
    add(ActComparator{grid.comparator_m2.front(), grid.comparator_m2.front()},
        TrojanEffect::InFlightToNop, "data-trigger");
    add(ActComparator{grid.comparator_m2.back(), grid.comparator_m2.back()},
        TrojanEffect::InFlightToNop, "data-trigger");
  }
  return out;
}

const char* default_workload() {
  return R"(# unrolled 2x2 matrix product: A in words 0..3, B in words 4..7, C over A
LW   r1, r0, 0
LW   r2, r0, 1
LW   r3, r0, 2
LW   r4, r0, 3
LW   r5, r0, 4
LW   r6, r0, 5
MUL  r7, r1, r5
MUL  r1, r1, r6
LW   r5, r0, 6
LW   r6, r0, 7
MUL  r5, r2, r5
MUL  r6, r2, r6
ADD  r7, r7, r5
ADD  r1, r1, r6
SW   r7, r0, 0
SW   r1, r0, 1
LW   r5, r0, 4
LW   r6, r0, 5
MUL  r7, r3, r5
MUL  r1, r3, r6
LW   r5, r0, 6
LW   r6, r0, 7
MUL  r5, r4, r5
MUL  r6, r4, r6
ADD  r7, r7, r5
ADD  r1, r1, r6
SW   r7, r0, 2
SW   r1, r0, 3
# checksum tail exercising the remaining ALU forms
ADDI r2, r7, 3
XOR  r2, r2, r1
SLL  r2, r2, r4
SRL  r3, r2, r1
SUB  r3, r3, r7
OR   r4, r3, r2
AND  r5, r4, r1
SW   r4, r0, 5
)";
}

ExtremalSpec gen_extremal(const Core& core, const std::string& program_text, uint64_t seed,
                          uint32_t n_flops) {
  if (n_flops > 64) throw BadParams("flop subset capped at 64 bits");
  uint64_t total_bits = 0;
  for (const auto& sv : core.ts.state_vars) total_bits += sv.width;
  if (n_flops > total_bits) throw BadParams("flop subset larger than the design");

  ExtremalSpec spec;
  spec.id = "xt-s" + std::to_string(seed) + "-f" + std::to_string(n_flops);
  spec.seed = seed;
  spec.program = parse_asm(program_text);
  std::mt19937_64 rng(splitmix64(seed ^ 0xe87e3a1ull));
  spec.stop_cycle = 20 + rng() % 181;

  Simulator sim(core.ts);
  Env base;
  for (const auto& in : core.ts.inputs) base.set(in.name, in.width, 0);

  // Program phase: feed through the fetch handshake until the stop cycle.
  size_t pc = 0;
  while (sim.cycle() < spec.stop_cycle) {
    Env env = base;
    if (pc < spec.program.size()) {
      env.set(core.in_valid, 1, 1);
      env.set(core.in_instr, 16, encode(spec.program[pc]));
    }
    if (sim.peek(core.fetch_fire, env)) ++pc;
    sim.step(env);
  }

  // Random valid suffix across the full register and opcode range.
  constexpr Opcode kPool[] = {Opcode::ADD, Opcode::SUB, Opcode::AND, Opcode::OR,
                              Opcode::XOR, Opcode::SLL, Opcode::SRL, Opcode::MUL,
                              Opcode::ADDI, Opcode::LW, Opcode::SW};
  uint32_t fed = 0;
  uint64_t guard = 0;
  while (fed < spec.random_suffix_len && guard++ < 100 * spec.random_suffix_len) {
    Instruction i;
    i.op = kPool[rng() % std::size(kPool)];
    i.rd = int(rng() % core.params.num_regs);
    i.rs1 = int(rng() % core.params.num_regs);
    if (opcode_uses_rs2(i.op))
      i.rs2 = int(rng() % core.params.num_regs);
    else
      i.imm = int(rng() % 64) - 32;
    Env env = base;
    env.set(core.in_valid, 1, 1);
    env.set(core.in_instr, 16, encode(i));
    bool took = sim.peek(core.fetch_fire, env) != 0;
    sim.step(env);
    if (took) ++fed;
  }

  // Snapshot right after the last suffix instruction entered the machine.
  std::vector<std::pair<std::string, uint32_t>> all_bits;
  for (const auto& sv : core.ts.state_vars)
    for (uint32_t b = 0; b < sv.width; ++b) all_bits.emplace_back(sv.name, b);
  for (uint32_t j = 0; j < n_flops; ++j) {
    size_t pick = j + rng() % (all_bits.size() - j);
    std::swap(all_bits[j], all_bits[pick]);
    const auto& [name, bit] = all_bits[j];
    spec.bits.emplace_back(name, bit);
    spec.pattern |= ((sim.get(name) >> bit) & 1) << j;
  }
  return spec;
}

}  // namespace sqed
