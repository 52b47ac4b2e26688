#include "sqed/inject.hpp"

#include <bit>
#include <functional>
#include <random>

#include "core_common.hpp"
#include "sqed/errors.hpp"
#include "sqed/eval.hpp"

namespace sqed {

using detail::op_is;

namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

uint32_t count_width(uint64_t max_value) {
  uint32_t w = std::bit_width(max_value);
  return w == 0 ? 1 : w;
}

// values[idx], clamping out-of-range idx to the last entry
Expr select_by_index(const std::vector<uint64_t>& values, Expr idx, uint32_t value_width) {
  Expr out = bv_const(values.back(), value_width);
  for (size_t i = values.size() - 1; i-- > 0;)
    out = bv_ite(bv_eq_const(idx, i), bv_const(values[i], value_width), out);
  return out;
}

// Watcher state lives in the core ts under "inj."; no declared init, so it is
// symbolic under a symbolic start and zero under concrete reset.
Expr build_watcher(Core& core, const ActForwarding&) { return core.tap("fwd_active"); }

Expr build_watcher(Core& core, const ActTwoInstrWithinX& a) {
  if (a.x == 0) throw BadParams("two-instruction window must be positive");
  uint32_t cw = count_width(a.x);
  Expr c = core.ts.add_state("inj.window", cw);
  Expr obs = core.tap("decode_opcode");
  Expr hold = bv_ite(bv_eq_const(c, 0), c, bv_sub(c, bv_const(1, cw)));
  core.ts.set_next("inj.window", bv_ite(op_is(obs, a.op1), bv_const(a.x, cw), hold));
  return bv_and(op_is(obs, a.op2), bv_not(bv_eq_const(c, 0)));
}

Expr build_watcher(Core& core, const ActRRegsEqualV& a) {
  if (a.r == 0 || a.first + a.r > core.params.num_regs)
    throw ShapeMismatch("register-equality trigger needs a register range within 0.." +
                        std::to_string(core.params.num_regs - 1));
  std::vector<Expr> eq;
  for (uint32_t i = a.first; i < a.first + a.r; ++i)
    eq.push_back(bv_eq_const(core.reg(i), a.v & mask_width(core.params.width)));
  return bv_and_many(eq);
}

Expr build_watcher(Core& core, const ActSeqNWithinY& a) {
  if (a.n == 0 || a.y == 0) throw BadParams("opcode-sequence trigger needs n > 0 and y > 0");
  std::mt19937_64 rng(splitmix64(a.seed ^ 0x5e15e9ull));
  std::vector<uint64_t> pat(a.n);
  for (auto& p : pat) p = 1 + rng() % (kNumOpcodes - 1);  // non-NOP opcodes

  uint32_t iw = count_width(a.n);
  uint32_t bw = count_width(a.y);
  Expr idx = core.ts.add_state("inj.seq_idx", iw);
  Expr budget = core.ts.add_state("inj.seq_budget", bw);
  Expr obs = core.tap("decode_opcode");
  Expr active = bv_not(op_is(obs, Opcode::NOP));

  // A partial match expires when the cycle budget hits zero; bubbles neither
  // advance nor reset the sequence position.
  Expr expired = bv_and(bv_not(bv_eq_const(idx, 0)), bv_eq_const(budget, 0));
  Expr eidx = bv_ite(expired, bv_const(0, iw), idx);
  Expr sel = select_by_index(pat, eidx, 4);
  Expr match = bv_and(active, bv_eq(obs, sel));
  Expr fired = bv_and(match, bv_eq_const(eidx, a.n - 1));

  Expr idx_next = bv_ite(fired, bv_const(0, iw),
                         bv_ite(match, bv_add(eidx, bv_const(1, iw)),
                                bv_ite(active, bv_const(0, iw), eidx)));
  Expr armed = bv_and(match, bv_eq_const(eidx, 0));
  Expr budget_next =
      bv_ite(bv_eq_const(idx_next, 0), bv_const(0, bw),
             bv_ite(armed, bv_const(a.y - 1, bw), bv_sub(budget, bv_const(1, bw))));
  core.ts.set_next("inj.seq_idx", idx_next);
  core.ts.set_next("inj.seq_budget", budget_next);
  return fired;
}

Expr build_watcher(Core&, const ActCacheState&) {
  throw UnsupportedOnCore("cache-state trigger: core has no cache hierarchy");
}

Expr build_watcher(Core& core, const ActSeqOnWires& a) {
  if (a.n == 0) throw BadParams("wire-sequence trigger needs n > 0");
  if (a.m1 == 0 || a.m1 > 16) throw BadParams("wire-sequence trigger observes 1..16 fetch bits");
  std::mt19937_64 rng(splitmix64(a.seed ^ 0x3135ull));
  std::vector<uint64_t> pat(a.n);
  for (auto& p : pat) p = rng() & mask_width(a.m1);
  if (a.overlap_friendly)
    for (auto& p : pat) p = pat[0];  // uniform pattern, firings can chain

  uint32_t iw = count_width(a.n);
  Expr idx = core.ts.add_state("inj.wire_idx", iw);
  Expr obs = bv_extract(core.tap("fetch_instr"), a.m1 - 1, 0);
  Expr match = bv_eq(obs, select_by_index(pat, idx, a.m1));
  Expr fired = bv_and(match, bv_eq_const(idx, a.n - 1));
  Expr restart = bv_ite(bv_eq_const(obs, pat[0]), bv_const(1 % a.n, iw), bv_const(0, iw));
  core.ts.set_next("inj.wire_idx",
                   bv_ite(fired, restart, bv_ite(match, bv_add(idx, bv_const(1, iw)), restart)));
  return fired;
}

Expr build_watcher(Core& core, const ActCounter& a) {
  if (a.x1 == 0) throw BadParams("cycle-counter threshold must be positive");
  uint32_t w = count_width(a.x1);
  Expr count = core.ts.add_state("inj.count", w);
  core.ts.set_next("inj.count", bv_add(count, bv_const(1, w)));
  return bv_eq_const(count, a.x1);
}

Expr build_watcher(Core& core, const ActComparator& a) {
  uint32_t total = core.params.num_regs * core.params.width;
  if (a.m2 == 0 || a.m2 > total)
    throw ShapeMismatch("comparator observes 1.." + std::to_string(total) + " register bits");
  std::mt19937_64 rng(splitmix64(a.seed ^ 0xc09a4eull));
  uint64_t pattern = rng();
  // Force a high data bit so the pattern is never one small immediate away
  // from reset.
  pattern |= 1ull << std::min<uint32_t>(5, a.m2 - 1);
  std::vector<Expr> eq;
  for (uint32_t j = 0; j < a.m2; ++j) {
    uint32_t b = j % core.params.width;
    Expr bit = bv_extract(core.reg(j / core.params.width), b, b);
    eq.push_back(bv_eq_const(bit, (pattern >> j) & 1));
  }
  return bv_and_many(eq);
}

Expr build_watcher(Core& core, const ActRareEventCounter& a) {
  if (a.x2 == 0) throw BadParams("event-counter threshold must be positive");
  if (core.mem_writes.empty()) throw UnsupportedOnCore("event counter needs a store port");
  uint32_t w = count_width(a.x2);
  Expr count = core.ts.add_state("inj.events", w);
  const auto& port = core.mem_writes[0];
  Expr event = bv_and(port.valid, bv_eq_const(port.addr, core.params.mem_words - 1));
  core.ts.set_next("inj.events", bv_ite(event, bv_add(count, bv_const(1, w)), count));
  return bv_eq_const(count, a.x2);
}

struct EffectPlan {
  std::string tap_name;
  // corruption applied to the victim value while the trigger fires
  std::function<Expr(Expr)> corrupt;
};

EffectPlan plan_effect(BugEffect e) {
  switch (e) {
    case BugEffect::NextToNop:
      return {"fetch_instr", [](Expr v) { return bv_const(0, v.width()); }};
    case BugEffect::OpcodeCorrupt:
      return {"decode_opcode", [](Expr v) { return bv_xor(v, bv_const(3, v.width())); }};
    case BugEffect::RegReadCorrupt:
      return {"src1_data", [](Expr v) { return bv_xor(v, bv_const(1, v.width())); }};
  }
  throw BadParams("unknown bug effect");
}

EffectPlan plan_effect(const Core& core, TrojanEffect e) {
  switch (e) {
    case TrojanEffect::InFlightToNop:
      return {"inflight_instr", [](Expr v) { return bv_const(0, v.width()); }};
    case TrojanEffect::InFlightOpcode:
      return {"inflight_instr", [](Expr v) { return bv_xor(v, bv_const(0x3000, v.width())); }};
    case TrojanEffect::RegReadCorrupt:
      return {"src1_data", [](Expr v) { return bv_xor(v, bv_const(1, v.width())); }};
    case TrojanEffect::ExecResultCorrupt:
      return {"exec_result", [](Expr v) { return bv_xor(v, bv_const(1, v.width())); }};
    case TrojanEffect::RobCorruptEarlyCommit:
      if (core.kind != CoreKind::OOC)
        throw UnsupportedOnCore("premature-commit effect needs a reorder buffer");
      return {"rob_head_done", [](Expr v) { return bv_const(1, v.width()); }};
  }
  throw BadParams("unknown trojan effect");
}

void rewrite_port(OperandReadPort& p, const NodeMap& m) {
  for (Expr* e : {&p.valid, &p.addr, &p.data, &p.waiting, &p.producer_tag})
    if (e->valid()) *e = substitute(*e, m);
}

// Splices the corrupted value into every formula of the design. Watcher next
// functions are exempt: the trigger observes the clean wire, as inserted
// logic taps the signal upstream of its own mux.
void rewrite_design(Core& core, const NodeMap& m) {
  for (auto& [name, e] : core.ts.next)
    if (name.rfind("inj.", 0) != 0) e = substitute(e, m);
  for (auto& e : core.ts.init_assumes) e = substitute(e, m);
  for (auto& e : core.ts.step_assumes) e = substitute(e, m);
  for (auto& a : core.ts.asserts) a.expr = substitute(a.expr, m);

  auto rw = [&](Expr& e) {
    if (e.valid()) e = substitute(e, m);
  };
  rw(core.fetch_ready);
  rw(core.fetch_fire);
  rw(core.dispatch_ready);
  rw(core.exec_ready);
  rw(core.mem_ready);
  for (auto& c : core.commits) {
    rw(c.valid);
    rw(c.addr);
    rw(c.data);
  }
  for (auto& w : core.mem_writes) {
    rw(w.valid);
    rw(w.addr);
    rw(w.data);
  }
  rewrite_port(core.src1, m);
  rewrite_port(core.src2, m);
  rw(core.mem_read.valid);
  rw(core.mem_read.addr);
  rw(core.mem_read.data);
  rw(core.mem_read.tag);
  for (auto& x : core.execs) {
    rw(x.valid);
    rw(x.tag);
    rw(x.used1);
    rw(x.used2);
  }
  rw(core.dispatch_fire);
  rw(core.alloc_tag);
  rw(core.rob_head);
  rw(core.commit0_tag);
  rw(core.commit1_tag);
  rw(core.idle);
  for (auto& [name, e] : core.taps) e = substitute(e, m);
}

Injected finish(Core core, Expr fired, const EffectPlan& plan, const std::string& target_wire) {
  std::string victim_name = target_wire.empty() ? plan.tap_name : target_wire;
  Expr victim = core.tap(victim_name);
  Expr mux = bv_ite(fired, plan.corrupt(victim), victim);
  rewrite_design(core, NodeMap{{victim.node(), mux}});
  core.taps["inj.fired"] = fired;
  return Injected{std::move(core), fired, victim_name};
}

}  // namespace

const char* bug_effect_name(BugEffect e) {
  switch (e) {
    case BugEffect::NextToNop: return "next-to-nop";
    case BugEffect::OpcodeCorrupt: return "opcode-corrupt";
    case BugEffect::RegReadCorrupt: return "regread-corrupt";
  }
  return "?";
}

const char* trojan_effect_name(TrojanEffect e) {
  switch (e) {
    case TrojanEffect::InFlightToNop: return "inflight-to-nop";
    case TrojanEffect::InFlightOpcode: return "inflight-opcode";
    case TrojanEffect::RegReadCorrupt: return "regread-corrupt";
    case TrojanEffect::ExecResultCorrupt: return "exec-corrupt";
    case TrojanEffect::RobCorruptEarlyCommit: return "early-commit";
  }
  return "?";
}

std::string activation_name(const BugActivation& a) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ActForwarding>)
          return "forwarding";
        else if constexpr (std::is_same_v<T, ActTwoInstrWithinX>)
          return "twoinstr-x" + std::to_string(v.x);
        else if constexpr (std::is_same_v<T, ActRRegsEqualV>)
          return "rregs-r" + std::to_string(v.r) + "-v" + std::to_string(v.v) +
                 (v.first ? "-at" + std::to_string(v.first) : "");
        else if constexpr (std::is_same_v<T, ActSeqNWithinY>)
          return "seqn-n" + std::to_string(v.n) + "-y" + std::to_string(v.y);
        else
          return "cache-state";
      },
      a);
}

std::string activation_name(const TrojanActivation& a) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, ActSeqOnWires>)
          return "seqwires-n" + std::to_string(v.n) + "-m" + std::to_string(v.m1);
        else if constexpr (std::is_same_v<T, ActCounter>)
          return "counter-x" + std::to_string(v.x1);
        else if constexpr (std::is_same_v<T, ActComparator>)
          return "comparator-m" + std::to_string(v.m2);
        else
          return "rare-x" + std::to_string(v.x2);
      },
      a);
}

Injected inject(const Core& base, const BugSpec& spec) {
  Core core = base;
  Expr fired = std::visit([&](const auto& a) { return build_watcher(core, a); }, spec.activation);
  return finish(std::move(core), fired, plan_effect(spec.effect), spec.target_wire);
}

Injected inject(const Core& base, const TrojanSpec& spec) {
  Core core = base;
  Expr fired = std::visit([&](const auto& a) { return build_watcher(core, a); }, spec.activation);
  return finish(std::move(core), fired, plan_effect(core, spec.effect), "");
}

Injected inject_always(const Core& base, BugEffect effect) {
  return finish(base, bv_bool(true), plan_effect(effect), "");
}

Injected inject(const Core& base, const ExtremalSpec& spec) {
  Core core = base;
  std::vector<Expr> eq;
  uint32_t j = 0;
  for (const auto& [name, bit] : spec.bits) {
    Expr v = core.ts.state(name);
    if (bit >= v.width()) throw ShapeMismatch("flop bit out of range: " + name);
    eq.push_back(bv_eq_const(bv_extract(v, bit, bit), (spec.pattern >> j) & 1));
    ++j;
  }
  Expr fired = bv_and_many(eq);
  return finish(std::move(core), fired, plan_effect(BugEffect::RegReadCorrupt), "");
}

}  // namespace sqed
