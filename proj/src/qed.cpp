#include "sqed/qed.hpp"

#include <bit>

#include "core_common.hpp"
#include "sqed/constraints.hpp"
#include "sqed/errors.hpp"
#include "sqed/recorders.hpp"

namespace sqed {

using namespace detail;

Instruction dup_map(const Instruction& instr, uint32_t num_regs) {
  const int half = static_cast<int>(num_regs / 2);
  if (instr.op == Opcode::NOP) return instr;
  auto shifted = [&](int idx, const char* field) {
    if (idx < 0 || idx >= half)
      throw NotOriginal(std::string(field) + "=" + std::to_string(idx) + " with N=" +
                        std::to_string(num_regs));
    return idx + half;
  };
  Instruction out = instr;
  out.rd = shifted(instr.rd, "rd");
  out.rs1 = shifted(instr.rs1, "rs1");
  if (opcode_uses_rs2(instr.op)) out.rs2 = shifted(instr.rs2, "rs2");
  return out;
}

Expr dup_map_expr(Expr word, uint32_t num_regs) {
  if (word.width() != 16) throw WidthMismatch("dup_map_expr expects a 16-bit word");
  if (num_regs < 2 || num_regs > 8 || (num_regs & (num_regs - 1)) != 0)
    throw BadParams("num_regs must be a power of two in [2,8]");
  const uint32_t b = std::countr_zero(num_regs / 2);
  const uint64_t base_mask = (1ull << (9 + b)) | (1ull << (6 + b));
  const uint64_t rs2_mask = 1ull << b;
  Expr op4 = bv_extract(word, 15, 12);
  Expr mask = bv_ite(uses_rs2(op4), bv_const(base_mask | rs2_mask, 16), bv_const(base_mask, 16));
  return bv_ite(op_is(op4, Opcode::NOP), word, bv_or(word, mask));
}

QedModule build_qed_module(const QedConfig& cfg) {
  if (cfg.queue_depth < 1 || cfg.queue_depth > 16) throw BadParams("queue_depth out of range");
  QedModule m;
  TransitionSystem& ts = m.ts;
  const uint32_t d = cfg.queue_depth;
  const uint32_t cw = std::bit_width(d);  // holds 0..d

  Expr enable = ts.add_input("enable", 1);
  Expr next_instruction = ts.add_input("next_instruction", 16);
  Expr fetch_next = ts.add_input("fetch_next", 1);
  Expr original = ts.add_input("original", 1);

  std::vector<Expr> q;
  for (uint32_t i = 0; i < d; ++i) q.push_back(ts.add_state("q" + std::to_string(i), 16, 0));
  m.count = ts.add_state("count", cw, 0);

  m.full = bv_eq_const(m.count, d);
  m.empty = bv_eq_const(m.count, 0);
  m.insert_valid = bv_and_many({fetch_next, original, bv_not(m.full)});
  m.delete_valid = bv_and_many({fetch_next, bv_not(original), bv_not(m.empty)});
  m.head_instruction = q[0];
  m.duplicate_instruction = dup_map_expr(q[0], cfg.num_regs);
  m.instruction_out =
      bv_ite(bv_and(enable, bv_not(original)), m.duplicate_instruction, next_instruction);
  m.instruction_valid = bv_or(m.insert_valid, m.delete_valid);

  for (uint32_t i = 0; i < d; ++i) {
    Expr shifted = (i + 1 < d) ? q[i + 1] : bv_const(0, 16);
    Expr ins_here = bv_and(m.insert_valid, bv_eq_const(m.count, i));
    ts.set_next("q" + std::to_string(i),
                bv_ite(m.delete_valid, shifted, bv_ite(ins_here, next_instruction, q[i])));
  }
  ts.set_next("count", bv_ite(m.insert_valid, bv_add(m.count, bv_const(1, cw)),
                              bv_ite(m.delete_valid, bv_sub(m.count, bv_const(1, cw)), m.count)));
  return m;
}

QedReadyFragment build_qed_ready(uint32_t num_ports, uint32_t reg_bits, const QedConfig& cfg) {
  if (num_ports < 1 || num_ports > 4) throw BadParams("commit port count out of range");
  if (cfg.counter_width < 2 || cfg.counter_width > 32) throw BadParams("counter_width");
  QedReadyFragment f;
  TransitionSystem& ts = f.ts;
  const uint32_t cw = cfg.counter_width;
  const uint32_t ww = cw + 3;  // wide enough for max + num_ports

  Expr gate = ts.add_input("gate", 1);
  std::vector<Expr> valids, addrs;
  for (uint32_t p = 0; p < num_ports; ++p) {
    valids.push_back(ts.add_input("p" + std::to_string(p) + "_valid", 1));
    addrs.push_back(ts.add_input("p" + std::to_string(p) + "_addr", reg_bits));
  }

  Expr co = ts.add_state("count_original", cw, 0);
  Expr cd = ts.add_state("count_duplicate", cw, 0);

  Expr half = bv_const(cfg.num_regs / 2, reg_bits);
  Expr wide_o = bv_zext(co, ww);
  Expr wide_d = bv_zext(cd, ww);
  for (uint32_t p = 0; p < num_ports; ++p) {
    Expr tick = bv_and(valids[p], gate);
    Expr is_orig = bv_ult(addrs[p], half);
    wide_o = bv_add(wide_o, bv_zext(bv_and(tick, is_orig), ww));
    wide_d = bv_add(wide_d, bv_zext(bv_and(tick, bv_not(is_orig)), ww));
  }
  const uint64_t max = (1ull << cw) - 1;
  auto saturate = [&](Expr wide) {
    return bv_ite(bv_ult(wide, bv_const(max, ww)), bv_extract(wide, cw - 1, 0),
                  bv_const(max, cw));
  };
  ts.set_next("count_original", saturate(wide_o));
  ts.set_next("count_duplicate", saturate(wide_d));

  f.ready.count_original = co;
  f.ready.count_duplicate = cd;
  f.ready.qed_ready = bv_eq(co, cd);
  return f;
}

std::vector<Expr> original_constraints(const QedConfig& cfg, Expr instruction_word, Expr fire) {
  if (instruction_word.width() != 16) throw WidthMismatch("original_constraints");
  if (fire.width() != 1) throw WidthMismatch("original_constraints fire");
  DecodedInstr dc = decode_instr(instruction_word, 8);
  Expr half = bv_const(cfg.num_regs / 2, 3);
  Expr non_nop = bv_not(op_is(dc.op, Opcode::NOP));
  Expr fields_ok =
      bv_and(bv_implies(non_nop, bv_and(bv_ult(dc.rd, half), bv_ult(dc.rs1, half))),
             bv_implies(uses_rs2(dc.op), bv_ult(dc.rs2, half)));
  return {bv_implies(fire, bv_and(dc.valid, fields_ok))};
}

namespace {

using Rewrites = std::unordered_map<std::string, Expr>;

// The same rename/wire map compose applies internally, for remapping a
// fragment's exported expressions onto the composed system.
Rewrites fragment_rewrites(const TransitionSystem& frag, const Rewrites& conns,
                           const std::string& prefix) {
  Rewrites rw;
  for (const InputVar& iv : frag.inputs) {
    auto it = conns.find(iv.name);
    if (it == conns.end()) throw PortMissing("fragment input " + iv.name + " not connected");
    rw[iv.name] = it->second;
  }
  for (const StateVar& sv : frag.state_vars) rw[sv.name] = bv_var(prefix + sv.name, sv.width);
  return rw;
}

Expr rmap(const Expr& e, const Rewrites& rw) { return e.valid() ? substitute_vars(e, rw) : e; }

}  // namespace

Instrumented attach_qed(Core&& core, const QedConfig& cfg, const Ablations& abl) {
  Instrumented inst;
  inst.core = std::move(core);
  inst.cfg = cfg;
  inst.ablations = abl;
  Core& c = inst.core;
  if (cfg.num_regs != c.params.num_regs || cfg.mem_words != c.params.mem_words)
    throw ShapeMismatch("qed config does not match core parameters");
  if (c.in_instr.empty() || c.in_valid.empty() || c.in_dup_mem.empty())
    throw PortMissing("core fetch inputs");
  TransitionSystem& ts = c.ts;
  const uint32_t rb = c.reg_bits();
  const uint32_t mb = c.mem_bits();
  const uint32_t tb = 2;

  // BMC-facing inputs replacing the core's raw fetch port.
  Expr in_ni = ts.add_input("qed.next_instruction", 16);
  Expr in_orig = ts.add_input("qed.original", 1);
  Expr in_en = ts.add_input("qed.enable", 1);
  inst.in_next_instruction = "qed.next_instruction";
  inst.in_original = "qed.original";
  inst.in_enable = "qed.enable";

  // instruction-transforming module
  QedModule qm = build_qed_module(cfg);

  // The core's readiness may depend on the incoming instruction (reservation
  // station class on the reorder-buffer core), while the candidate the
  // module would deliver never depends on fetch_next. Evaluating readiness
  // on the candidate breaks the cycle.
  Rewrites pre = {{"enable", in_en}, {"original", in_orig}, {"next_instruction", in_ni}};
  for (const StateVar& sv : qm.ts.state_vars) pre[sv.name] = bv_var("qed." + sv.name, sv.width);
  Expr candidate = substitute_vars(qm.instruction_out, pre);
  Expr ready_cand = substitute_vars(
      c.fetch_ready, {{c.in_instr, candidate}, {c.in_valid, bv_bool(true)}});

  Rewrites qconn = {{"enable", in_en},
                    {"next_instruction", in_ni},
                    {"fetch_next", ready_cand},
                    {"original", in_orig}};
  ts = compose(ts, qm.ts, qconn, "qed.");
  Rewrites qrw = fragment_rewrites(qm.ts, qconn, "qed.");
  inst.instruction_out = candidate;
  inst.instruction_valid = rmap(qm.instruction_valid, qrw);
  inst.insert_valid = rmap(qm.insert_valid, qrw);
  inst.delete_valid = rmap(qm.delete_valid, qrw);
  inst.queue_count = rmap(qm.count, qrw);
  inst.dup_flag = bv_and(in_en, bv_not(in_orig));

  // Bind the core fetch port to the module outputs. The simulator does not
  // enforce these; instrumented_inputs reproduces them.
  ts.step_assumes.push_back(bv_eq(ts.input(c.in_instr), inst.instruction_out));
  ts.step_assumes.push_back(bv_eq(ts.input(c.in_valid), inst.instruction_valid));
  ts.step_assumes.push_back(bv_eq(ts.input(c.in_dup_mem), inst.dup_flag));
  if (cfg.assume_enable) ts.step_assumes.push_back(bv_eq_const(in_en, 1));

  // commit-point tracker
  TcFragment tf = build_tc_recorder(c.kind, c.params.rob_entries);
  Rewrites tconn;
  if (c.kind == CoreKind::IOC5) {
    tconn = {{"fetch_fire", c.fetch_fire},
             {"dispatch_ready", c.dispatch_ready},
             {"exec_ready", c.exec_ready},
             {"mem_ready", c.mem_ready}};
  } else {
    tconn = {{"dispatch_fire", c.dispatch_fire},
             {"alloc_tag", c.alloc_tag},
             {"rob_head", c.rob_head},
             {"rob_count", ts.state("rob.count")}};
  }
  ts = compose(ts, tf.ts, tconn, "tc.");
  Rewrites trw = fragment_rewrites(tf.ts, tconn, "tc.");
  inst.tc.sif_complete = rmap(tf.sif_complete, trw);
  inst.tc.sif_rise = rmap(tf.sif_rise, trw);
  inst.tc.prev_sif = rmap(tf.prev_sif, trw);
  inst.tc.mode = rmap(tf.mode, trw);
  inst.tc.mode_next = rmap(tf.mode_next, trw);
  inst.tc.seen = rmap(tf.seen, trw);
  inst.tc.marked_tag = rmap(tf.marked_tag, trw);
  for (const Expr& e : tf.qed_alloc) inst.tc.qed_alloc.push_back(rmap(e, trw));

  // operand recorders
  const uint32_t cap = c.kind == CoreKind::IOC5 ? 4 : c.params.rob_entries;
  OperandFragment of =
      build_operand_recorder(c.kind, c.params.width, rb, mb, cap, c.params.rob_entries);
  Rewrites oconn;
  if (c.kind == CoreKind::IOC5) {
    oconn = {{"mode", inst.tc.mode},         {"mode_next", inst.tc.mode_next},
             {"prev_sif", inst.tc.prev_sif}, {"s1_valid", c.src1.valid},
             {"s1_addr", c.src1.addr},       {"s1_data", c.src1.data},
             {"s2_valid", c.src2.valid},     {"s2_addr", c.src2.addr},
             {"s2_data", c.src2.data},       {"m_valid", c.mem_read.valid},
             {"m_addr", c.mem_read.addr},    {"m_data", c.mem_read.data}};
  } else {
    oconn = {{"sif_now", inst.tc.sif_complete},
             {"prev_sif", inst.tc.prev_sif},
             {"s1_valid", c.src1.valid},
             {"s1_addr", c.src1.addr},
             {"s1_data", c.src1.data},
             {"s1_wait", c.src1.waiting},
             {"s1_tag", c.src1.producer_tag},
             {"s2_valid", c.src2.valid},
             {"s2_addr", c.src2.addr},
             {"s2_data", c.src2.data},
             {"s2_wait", c.src2.waiting},
             {"s2_tag", c.src2.producer_tag},
             {"m_valid", c.mem_read.valid},
             {"m_addr", c.mem_read.addr},
             {"m_data", c.mem_read.data}};
  }
  ts = compose(ts, of.ts, oconn, "rec.");
  Rewrites orw = fragment_rewrites(of.ts, oconn, "rec.");
  auto remap_buffer = [&](const OperandBuffer& b) {
    OperandBuffer out;
    out.capacity = b.capacity;
    out.count = rmap(b.count, orw);
    for (const Expr& e : b.valid) out.valid.push_back(rmap(e, orw));
    for (const Expr& e : b.addr) out.addr.push_back(rmap(e, orw));
    for (const Expr& e : b.data) out.data.push_back(rmap(e, orw));
    for (const Expr& e : b.waiting) out.waiting.push_back(rmap(e, orw));
    for (const Expr& e : b.producer_tag) out.producer_tag.push_back(rmap(e, orw));
    return out;
  };
  inst.buffers.src1 = remap_buffer(of.src1);
  inst.buffers.src2 = remap_buffer(of.src2);
  inst.buffers.mem = remap_buffer(of.mem);

  // commit-parity counters; the out-of-order gate is per port (only commits
  // of post-start allocations count), the in-order gate is sif_complete
  QedReadyFragment qf = build_qed_ready(static_cast<uint32_t>(c.commits.size()), rb, cfg);
  Rewrites cconn;
  if (c.kind == CoreKind::IOC5) {
    cconn["gate"] = inst.tc.sif_complete;
    for (size_t p = 0; p < c.commits.size(); ++p) {
      cconn["p" + std::to_string(p) + "_valid"] = c.commits[p].valid;
      cconn["p" + std::to_string(p) + "_addr"] = c.commits[p].addr;
    }
  } else {
    cconn["gate"] = bv_bool(true);
    std::vector<Expr> port_tags = {c.commit0_tag, c.commit1_tag};
    for (size_t p = 0; p < c.commits.size(); ++p) {
      Expr alloc_here = bv_const(0, 1);
      for (uint32_t e = 0; e < c.params.rob_entries; ++e)
        alloc_here = bv_ite(bv_eq(port_tags[p], bv_const(e, tb)), inst.tc.qed_alloc[e], alloc_here);
      cconn["p" + std::to_string(p) + "_valid"] = bv_and(c.commits[p].valid, alloc_here);
      cconn["p" + std::to_string(p) + "_addr"] = c.commits[p].addr;
    }
  }
  ts = compose(ts, qf.ts, cconn, "qr.");
  Rewrites crw = fragment_rewrites(qf.ts, cconn, "qr.");
  inst.ready.count_original = rmap(qf.ready.count_original, crw);
  inst.ready.count_duplicate = rmap(qf.ready.count_duplicate, crw);
  inst.ready.qed_ready = rmap(qf.ready.qed_ready, crw);

  // original-half confinement; effective addresses of non-duplicate memory
  // accesses stay in the original half (this also narrows SIF loads/stores)
  for (Expr e : original_constraints(cfg, in_ni, inst.insert_valid)) ts.step_assumes.push_back(e);
  ts.step_assumes.push_back(bv_implies(
      c.tap("mem_ea_active"), bv_ult(c.tap("mem_ea_nat"), bv_const(cfg.mem_words / 2, mb))));

  ConstraintSet cs = build_constraints(c, inst.tc, inst.buffers, inst.ready, cfg, abl);
  apply_constraints(ts, cs, "qed_consistency");
  inst.property_name = "qed_consistency";

  inst.decode.fetch_fire = c.fetch_fire;
  inst.decode.fetch_instr = inst.instruction_out;
  inst.decode.fetch_original = in_orig;
  inst.decode.fetch_valid = inst.instruction_valid;
  inst.decode.sif_complete = inst.tc.sif_complete;
  for (const CommitPort& p : c.commits) inst.decode.commit_valids.push_back(p.valid);

  auto errs = validate_ts(ts);
  if (!errs.empty()) throw Error("attach_qed: " + errs.front());
  return inst;
}

Instrumented build_instrumented(CoreKind kind, const QedConfig& cfg, const Ablations& abl,
                                const CoreParams& params) {
  return attach_qed(build_core(kind, params), cfg, abl);
}

Env instrumented_inputs(const Simulator& sim, const Instrumented& inst, uint16_t next_instruction,
                        bool original, bool enable) {
  const Core& c = inst.core;
  Env in;
  in.set(inst.in_next_instruction, 16, next_instruction);
  in.set(inst.in_original, 1, original ? 1 : 0);
  in.set(inst.in_enable, 1, enable ? 1 : 0);
  in.set(c.in_test_enable, 1, 0);
  in.set(c.in_test_addr, c.reg_bits(), 0);
  in.set(c.in_test_data, c.params.width, 0);
  in.set(c.in_instr, 16, sim.peek(inst.instruction_out, in));
  in.set(c.in_valid, 1, sim.peek(inst.instruction_valid, in));
  in.set(c.in_dup_mem, 1, sim.peek(inst.dup_flag, in));
  return in;
}

void force_original_prefix(Instrumented& inst, uint32_t prefix_len) {
  if (prefix_len == 0) return;
  TransitionSystem& ts = inst.core.ts;
  uint32_t w = std::bit_width(uint64_t(prefix_len));
  // Pinned to zero in every mode: the warm-up applies to the trace prefix,
  // not to a symbolic resumption point.
  Expr count = ts.add_state("qp.count", w, 0);
  Expr fire = inst.decode.fetch_fire;
  Expr in_warmup = bv_not(bv_eq_const(count, prefix_len));
  ts.set_next("qp.count", bv_ite(bv_and(fire, in_warmup), bv_add(count, bv_const(1, w)), count));
  ts.step_assumes.push_back(bv_implies(bv_and(fire, in_warmup),
                                       bv_eq_const(ts.input(inst.in_original), 1)));
}

}  // namespace sqed
