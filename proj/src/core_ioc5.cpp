#include <cmath>

#include "core_common.hpp"
#include "sqed/cores.hpp"
#include "sqed/errors.hpp"

namespace sqed {

using namespace detail;

const char* core_kind_name(CoreKind k) { return k == CoreKind::IOC5 ? "ioc5" : "ooc"; }

CoreKind core_kind_from_name(const std::string& name) {
  if (name == "ioc5") return CoreKind::IOC5;
  if (name == "ooc") return CoreKind::OOC;
  throw BadParams("unknown core kind: " + name);
}

Expr Core::tap(const std::string& name) const {
  auto it = taps.find(name);
  if (it == taps.end()) throw PortMissing("tap " + name);
  return it->second;
}

Expr Core::reg(uint32_t i) const { return ts.state("r" + std::to_string(i)); }
Expr Core::mem(uint32_t i) const { return ts.state("m" + std::to_string(i)); }

static uint32_t log2_exact(uint32_t v, const char* what) {
  if (v == 0 || (v & (v - 1)) != 0) throw BadParams(std::string(what) + " must be a power of two");
  uint32_t b = 0;
  while ((1u << b) < v) ++b;
  return b;
}

uint32_t Core::reg_bits() const { return log2_exact(params.num_regs, "num_regs"); }
uint32_t Core::mem_bits() const { return log2_exact(params.mem_words, "mem_words"); }

Core build_core(CoreKind kind, const CoreParams& params) {
  return kind == CoreKind::IOC5 ? build_core_ioc5(params) : build_core_ooc(params);
}

static void check_common_params(const CoreParams& p) {
  log2_exact(p.num_regs, "num_regs");
  uint32_t mb = log2_exact(p.mem_words, "mem_words");
  if (p.num_regs < 2 || p.num_regs > 8) throw BadParams("num_regs out of range");
  if (p.mem_words < 2) throw BadParams("mem_words out of range");
  if (p.width < mb || p.width > kMaxWidth) throw BadParams("width out of range");
}

Core build_core_ioc5(const CoreParams& params) {
  check_common_params(params);
  Core core;
  core.kind = CoreKind::IOC5;
  core.params = params;
  TransitionSystem& ts = core.ts;
  const uint32_t w = params.width;
  const uint32_t rb = core.reg_bits();

  Expr in_instr = ts.add_input("instr", 16);
  Expr in_valid = ts.add_input("instr_valid", 1);
  Expr in_dup = ts.add_input("dup_mem", 1);
  Expr t_en = ts.add_input("test_enable", 1);
  Expr t_addr = ts.add_input("test_addr", rb);
  Expr t_data = ts.add_input("test_data", w);
  core.in_instr = "instr";
  core.in_valid = "instr_valid";
  core.in_dup_mem = "dup_mem";
  core.in_test_enable = "test_enable";
  core.in_test_addr = "test_addr";
  core.in_test_data = "test_data";

  std::vector<Expr> regs, mems;
  for (uint32_t i = 0; i < params.num_regs; ++i) regs.push_back(ts.add_state("r" + std::to_string(i), w));
  for (uint32_t i = 0; i < params.mem_words; ++i) mems.push_back(ts.add_state("m" + std::to_string(i), w));

  Expr ifid_instr = ts.add_state("ifid.instr", 16);
  Expr ifid_valid = ts.add_state("ifid.valid", 1);
  Expr ifid_dup = ts.add_state("ifid.dup", 1);

  Expr idex_valid = ts.add_state("idex.valid", 1);
  Expr idex_op = ts.add_state("idex.op", 4);
  Expr idex_rd = ts.add_state("idex.rd", rb);
  Expr idex_rs1 = ts.add_state("idex.rs1", rb);
  Expr idex_bsrc = ts.add_state("idex.bsrc", rb);
  Expr idex_a = ts.add_state("idex.a", w);
  Expr idex_b = ts.add_state("idex.b", w);
  Expr idex_imm = ts.add_state("idex.imm", w);
  Expr idex_dup = ts.add_state("idex.dup", 1);

  Expr exmem_valid = ts.add_state("exmem.valid", 1);
  Expr exmem_op = ts.add_state("exmem.op", 4);
  Expr exmem_rd = ts.add_state("exmem.rd", rb);
  Expr exmem_alu = ts.add_state("exmem.alu", w);
  Expr exmem_store = ts.add_state("exmem.store", w);

  Expr memwb_valid = ts.add_state("memwb.valid", 1);
  Expr memwb_wen = ts.add_state("memwb.wen", 1);
  Expr memwb_rd = ts.add_state("memwb.rd", rb);
  Expr memwb_val = ts.add_state("memwb.val", w);

  // ---- ID stage ----
  DecodedInstr d = decode_instr(ifid_instr, w);
  Expr eop = bv_ite(bv_and(ifid_valid, d.valid), d.op, op_const(Opcode::NOP));
  core.taps["decode_opcode"] = eop;
  Expr rd_f = bv_extract(d.rd, rb - 1, 0);
  Expr rs1_f = bv_extract(d.rs1, rb - 1, 0);
  Expr rs2_f = bv_extract(d.rs2, rb - 1, 0);

  // write-through bypass: a value committing this cycle is visible to reads
  auto read_reg = [&](const Expr& a) {
    Expr raw = read_file(regs, a);
    Expr hit = bv_and_many({memwb_valid, memwb_wen, bv_eq(memwb_rd, a)});
    return bv_ite(hit, memwb_val, raw);
  };

  Expr id_uses_rs2 = uses_rs2(eop);
  Expr id_is_sw = op_is(eop, Opcode::SW);
  Expr baddr = bv_ite(id_is_sw, rd_f, rs2_f);
  Expr src1_data = read_reg(rs1_f);
  Expr src2_data = read_reg(baddr);
  core.taps["src1_data"] = src1_data;
  core.taps["src2_data"] = src2_data;

  // load-use hazard: stall while the producer is in EX
  Expr id_reads_rs1 = reads_rs1(eop);
  Expr m1 = bv_and(id_reads_rs1, bv_eq(idex_rd, rs1_f));
  Expr m2 = bv_and(bv_or(id_uses_rs2, id_is_sw), bv_eq(idex_rd, baddr));
  Expr stall = bv_and_many({idex_valid, op_is(idex_op, Opcode::LW), bv_or(m1, m2)});
  Expr go = bv_not(stall);

  // ---- EX stage ----
  Expr exm_writes = bv_and_many({exmem_valid, writes_reg(exmem_op), bv_not(op_is(exmem_op, Opcode::LW))});
  Expr wb_writes = bv_and(memwb_valid, memwb_wen);
  auto fwd = [&](const Expr& src_reg, const Expr& stale) {
    Expr from_wb = bv_ite(bv_and(wb_writes, bv_eq(memwb_rd, src_reg)), memwb_val, stale);
    return bv_ite(bv_and(exm_writes, bv_eq(exmem_rd, src_reg)), exmem_alu, from_wb);
  };
  Expr op_a = fwd(idex_rs1, idex_a);
  Expr op_b = fwd(idex_bsrc, idex_b);
  Expr fa_hit = bv_or(bv_and(exm_writes, bv_eq(exmem_rd, idex_rs1)),
                      bv_and(wb_writes, bv_eq(memwb_rd, idex_rs1)));
  Expr fb_hit = bv_or(bv_and(exm_writes, bv_eq(exmem_rd, idex_bsrc)),
                      bv_and(wb_writes, bv_eq(memwb_rd, idex_bsrc)));

  Expr alu_out = alu_compute(idex_op, op_a, op_b, idex_imm);
  core.taps["alu_result"] = alu_out;
  Expr ea = effective_addr(op_a, idex_imm, idex_dup, core.mem_bits());
  Expr ex_result = bv_ite(is_mem(idex_op), bv_zext(ea, w), alu_out);
  core.taps["mem_ea_nat"] = bv_extract(bv_add(op_a, idex_imm), core.mem_bits() - 1, 0);
  core.taps["mem_ea_active"] = bv_and_many({idex_valid, is_mem(idex_op), bv_not(idex_dup)});

  // ---- MEM stage ----
  Expr maddr = bv_extract(exmem_alu, core.mem_bits() - 1, 0);
  Expr is_lw = bv_and(exmem_valid, op_is(exmem_op, Opcode::LW));
  Expr is_sw = bv_and(exmem_valid, op_is(exmem_op, Opcode::SW));
  Expr load_val = read_file(mems, maddr);
  Expr wb_val = bv_ite(op_is(exmem_op, Opcode::LW), load_val, exmem_alu);

  // ---- next state ----
  Expr fetched = bv_ite(in_valid, in_instr, bv_const(0, 16));
  core.taps["fetch_instr"] = fetched;
  core.taps["inflight_instr"] = ifid_instr;
  ts.set_next("ifid.instr", bv_ite(go, fetched, ifid_instr));
  ts.set_next("ifid.valid", bv_ite(go, in_valid, ifid_valid));
  ts.set_next("ifid.dup", bv_ite(go, in_dup, ifid_dup));

  ts.set_next("idex.valid", bv_ite(go, bv_and(ifid_valid, d.valid), bv_const(0, 1)));
  ts.set_next("idex.op", bv_ite(go, eop, op_const(Opcode::NOP)));
  ts.set_next("idex.rd", bv_ite(go, rd_f, bv_const(0, rb)));
  ts.set_next("idex.rs1", bv_ite(go, rs1_f, bv_const(0, rb)));
  ts.set_next("idex.bsrc", bv_ite(go, baddr, bv_const(0, rb)));
  ts.set_next("idex.a", bv_ite(go, src1_data, bv_const(0, w)));
  ts.set_next("idex.b", bv_ite(go, src2_data, bv_const(0, w)));
  ts.set_next("idex.imm", bv_ite(go, d.imm, bv_const(0, w)));
  ts.set_next("idex.dup", bv_ite(go, ifid_dup, bv_const(0, 1)));

  ts.set_next("exmem.valid", idex_valid);
  ts.set_next("exmem.op", idex_op);
  ts.set_next("exmem.rd", idex_rd);
  ts.set_next("exmem.alu", ex_result);
  ts.set_next("exmem.store", op_b);

  ts.set_next("memwb.valid", exmem_valid);
  ts.set_next("memwb.wen", bv_and(exmem_valid, writes_reg(exmem_op)));
  ts.set_next("memwb.rd", exmem_rd);
  ts.set_next("memwb.val", wb_val);

  for (uint32_t i = 0; i < params.num_regs; ++i) {
    Expr idx = bv_const(i, rb);
    Expr wb_hit = bv_and(wb_writes, bv_eq(memwb_rd, idx));
    Expr t_hit = bv_and(t_en, bv_eq(t_addr, idx));
    Expr nxt = bv_ite(t_hit, t_data, bv_ite(wb_hit, memwb_val, regs[i]));
    ts.set_next("r" + std::to_string(i), nxt);
  }
  for (uint32_t i = 0; i < params.mem_words; ++i) {
    Expr hit = bv_and(is_sw, bv_eq(maddr, bv_const(i, core.mem_bits())));
    ts.set_next("m" + std::to_string(i), bv_ite(hit, exmem_store, mems[i]));
  }

  // ---- ports ----
  core.fetch_ready = go;
  core.fetch_fire = bv_and(go, in_valid);
  core.dispatch_fire = core.fetch_fire;
  core.dispatch_ready = go;
  core.exec_ready = bv_const(1, 1);
  core.mem_ready = bv_const(1, 1);
  core.alloc_tag = bv_const(0, 1);
  core.rob_head = bv_const(0, 1);
  core.commit0_tag = bv_const(0, 1);
  core.commit1_tag = bv_const(0, 1);

  core.commits.push_back({wb_writes, memwb_rd, memwb_val});
  core.mem_writes.push_back({is_sw, maddr, exmem_store});

  Expr zero = bv_const(0, 1);
  core.src1 = {bv_and_many({go, ifid_valid, id_reads_rs1}), rs1_f, src1_data, zero, zero};
  core.src2 = {bv_and_many({go, ifid_valid, bv_or(id_uses_rs2, id_is_sw)}), baddr, src2_data,
               zero, zero};
  core.mem_read = {is_lw, maddr, load_val, zero};

  Expr exec_valid = bv_and(idex_valid, bv_not(op_is(idex_op, Opcode::NOP)));
  Expr used2 = bv_ite(op_is(idex_op, Opcode::ADDI), idex_imm, op_b);
  core.execs.push_back({"ex", exec_valid, zero, op_a, used2});

  core.taps["fwd_active"] = bv_and(idex_valid, bv_or(fa_hit, fb_hit));
  core.taps["exec_result"] = ex_result;
  core.taps["load_data"] = load_val;

  core.idle = bv_not(bv_or_many({ifid_valid, idex_valid, exmem_valid, memwb_valid}));

  // internal consistency guard during bring-up
  auto errs = validate_ts(ts);
  if (!errs.empty()) throw Error("ioc5 build: " + errs.front());
  return core;
}

ProgramRun run_program(Simulator& sim, const Core& core, const std::vector<Instruction>& prog,
                       uint64_t max_cycles) {
  ProgramRun run;
  size_t pc = 0;
  for (uint64_t c = 0; c < max_cycles; ++c) {
    Env in;
    bool feeding = pc < prog.size();
    in.set(core.in_instr, 16, feeding ? encode(prog[pc]) : 0);
    in.set(core.in_valid, 1, feeding ? 1 : 0);
    in.set(core.in_dup_mem, 1, 0);
    in.set(core.in_test_enable, 1, 0);
    in.set(core.in_test_addr, core.reg_bits(), 0);
    in.set(core.in_test_data, core.params.width, 0);
    if (!feeding && sim.peek(core.idle, in) == 1) {
      run.cycles = c;
      run.drained = true;
      return run;
    }
    if (feeding && sim.peek(core.fetch_fire, in) == 1) ++pc;
    sim.step(in);
  }
  run.cycles = max_cycles;
  run.drained = false;
  return run;
}

ArchState arch_of(const Simulator& sim, const Core& core) {
  ArchState st = make_arch_state(core.params.width, core.params.num_regs, core.params.mem_words);
  for (uint32_t i = 0; i < core.params.num_regs; ++i) st.regs[i] = sim.get("r" + std::to_string(i));
  for (uint32_t i = 0; i < core.params.mem_words; ++i) st.mem[i] = sim.get("m" + std::to_string(i));
  return st;
}

}  // namespace sqed
