#include "core_common.hpp"
#include "sqed/cores.hpp"
#include "sqed/errors.hpp"

namespace sqed {

using namespace detail;

namespace {

struct WbPort {
  Expr valid;  // broadcasting a register result this cycle
  Expr tag;
  Expr val;
};

struct RsOperand {
  Expr v, w, t;
};

// Wakeup: a waiting operand captures the first matching broadcast.
RsOperand wakeup(const RsOperand& o, const std::vector<WbPort>& wbs) {
  Expr any = bv_const(0, 1);
  Expr val = o.v;
  for (auto it = wbs.rbegin(); it != wbs.rend(); ++it) {
    Expr hit = bv_and_many({o.w, it->valid, bv_eq(it->tag, o.t)});
    val = bv_ite(hit, it->val, val);
    any = bv_or(any, hit);
  }
  return {val, bv_and(o.w, bv_not(any)), o.t};
}

}  // namespace

Core build_core_ooc(const CoreParams& params) {
  if (params.rob_entries != 4) throw BadParams("rob_entries must be 4");
  if (params.commit_width < 1 || params.commit_width > 2) throw BadParams("commit_width must be 1 or 2");
  if (params.rs_alu != 2 || params.rs_lsu != 1) throw BadParams("unsupported reservation station shape");
  Core core;
  core.kind = CoreKind::OOC;
  core.params = params;
  TransitionSystem& ts = core.ts;
  const uint32_t w = params.width;
  const uint32_t rb = core.reg_bits();
  const uint32_t mb = core.mem_bits();
  const uint32_t tb = 2;  // rob tag bits
  if (params.num_regs < 2 || params.num_regs > 8) throw BadParams("num_regs out of range");
  if (w < mb || w > kMaxWidth) throw BadParams("width out of range");

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

  std::vector<Expr> bt_busy, bt_tag;
  for (uint32_t i = 0; i < params.num_regs; ++i) {
    bt_busy.push_back(ts.add_state("bt" + std::to_string(i) + ".busy", 1));
    bt_tag.push_back(ts.add_state("bt" + std::to_string(i) + ".tag", tb));
  }

  const uint32_t ne = params.rob_entries;
  std::vector<Expr> rb_valid, rb_done, rb_op, rb_rd, rb_val, rb_addr, rb_sdata;
  for (uint32_t i = 0; i < ne; ++i) {
    std::string p = "rob" + std::to_string(i) + ".";
    rb_valid.push_back(ts.add_state(p + "valid", 1));
    rb_done.push_back(ts.add_state(p + "done", 1));
    rb_op.push_back(ts.add_state(p + "op", 4));
    rb_rd.push_back(ts.add_state(p + "rd", rb));
    rb_val.push_back(ts.add_state(p + "val", w));
    rb_addr.push_back(ts.add_state(p + "addr", mb));
    rb_sdata.push_back(ts.add_state(p + "sdata", w));
  }
  Expr head = ts.add_state("rob.head", tb);
  Expr count = ts.add_state("rob.count", tb + 1);

  struct RsState {
    std::string name;
    Expr busy, op, tag, v1, w1, t1, v2, w2, t2, imm, dup;
  };
  auto add_rs = [&](const std::string& name, bool has_imm, bool has_dup) {
    RsState rs;
    rs.name = name;
    rs.busy = ts.add_state(name + ".busy", 1);
    rs.op = ts.add_state(name + ".op", 4);
    rs.tag = ts.add_state(name + ".tag", tb);
    rs.v1 = ts.add_state(name + ".v1", w);
    rs.w1 = ts.add_state(name + ".w1", 1);
    rs.t1 = ts.add_state(name + ".t1", tb);
    rs.v2 = ts.add_state(name + ".v2", w);
    rs.w2 = ts.add_state(name + ".w2", 1);
    rs.t2 = ts.add_state(name + ".t2", tb);
    if (has_imm) rs.imm = ts.add_state(name + ".imm", w);
    if (has_dup) rs.dup = ts.add_state(name + ".dup", 1);
    return rs;
  };
  RsState rsa0 = add_rs("rsa0", true, false);
  RsState rsa1 = add_rs("rsa1", true, false);
  RsState rsl = add_rs("rsl", true, true);
  RsState rsm = add_rs("rsm", false, false);

  Expr mulp_busy = ts.add_state("mulp.busy", 1);
  Expr mulp_tag = ts.add_state("mulp.tag", tb);
  Expr mulp_val = ts.add_state("mulp.val", w);

  Expr one = bv_const(1, 1);
  Expr zero = bv_const(0, 1);

  // ---- execute ----
  Expr issue0 = bv_and_many({rsa0.busy, bv_not(rsa0.w1), bv_not(rsa0.w2)});
  Expr issue1 = bv_and_many({rsa1.busy, bv_not(rsa1.w1), bv_not(rsa1.w2)});
  Expr res0 = alu_compute(rsa0.op, rsa0.v1, rsa0.v2, rsa0.imm);
  Expr res1 = alu_compute(rsa1.op, rsa1.v1, rsa1.v2, rsa1.imm);
  core.taps["alu0_result"] = res0;
  core.taps["alu1_result"] = res1;
  core.taps["exec_result"] = res0;

  Expr mul_issue = bv_and_many({rsm.busy, bv_not(rsm.w1), bv_not(rsm.w2)});
  Expr mul_res = bv_mul(rsm.v1, rsm.v2);

  // position of an entry relative to head, for age comparisons
  auto pos_of = [&](const Expr& tag) { return bv_sub(tag, head); };
  Expr lsu_is_lw = op_is(rsl.op, Opcode::LW);
  Expr lsu_is_sw = op_is(rsl.op, Opcode::SW);
  std::vector<Expr> older_store;
  for (uint32_t e = 0; e < ne; ++e) {
    older_store.push_back(bv_and_many({rb_valid[e], op_is(rb_op[e], Opcode::SW),
                                       bv_ult(pos_of(bv_const(e, tb)), pos_of(rsl.tag))}));
  }
  Expr lw_ok = bv_not(bv_or_many(older_store));
  Expr lsu_fire_sw = bv_and_many({rsl.busy, lsu_is_sw, bv_not(rsl.w1), bv_not(rsl.w2)});
  Expr lsu_fire_lw = bv_and_many({rsl.busy, lsu_is_lw, bv_not(rsl.w1), lw_ok});
  Expr lsu_fire = bv_or(lsu_fire_sw, lsu_fire_lw);
  Expr lsu_addr = effective_addr(rsl.v1, rsl.imm, rsl.dup, mb);
  Expr load_data = read_file(mems, lsu_addr);
  core.taps["mem_ea_nat"] = bv_extract(bv_add(rsl.v1, rsl.imm), mb - 1, 0);
  core.taps["mem_ea_active"] = bv_and(lsu_fire, bv_not(rsl.dup));

  std::vector<WbPort> wbs = {
      {issue0, rsa0.tag, res0},
      {issue1, rsa1.tag, res1},
      {mulp_busy, mulp_tag, mulp_val},
      {lsu_fire_lw, rsl.tag, load_data},
  };

  // ---- commit ----
  auto at = [&](const std::vector<Expr>& cells, const Expr& idx) { return read_file(cells, idx); };
  Expr head1 = bv_add(head, bv_const(1, tb));
  Expr head_done = at(rb_done, head);
  core.taps["rob_head_done"] = head_done;
  Expr c0_fire = bv_and(at(rb_valid, head), head_done);
  Expr c1_fire = params.commit_width >= 2
                     ? bv_and_many({c0_fire, at(rb_valid, head1), at(rb_done, head1)})
                     : zero;
  Expr e0_op = at(rb_op, head), e1_op = at(rb_op, head1);
  Expr e0_rd = at(rb_rd, head), e1_rd = at(rb_rd, head1);
  Expr e0_val = at(rb_val, head), e1_val = at(rb_val, head1);
  Expr e0_addr = at(rb_addr, head), e1_addr = at(rb_addr, head1);
  Expr e0_sdata = at(rb_sdata, head), e1_sdata = at(rb_sdata, head1);
  Expr w0 = bv_and(c0_fire, writes_reg(e0_op));
  Expr w1c = bv_and(c1_fire, writes_reg(e1_op));
  Expr s0 = bv_and(c0_fire, op_is(e0_op, Opcode::SW));
  Expr s1 = bv_and(c1_fire, op_is(e1_op, Opcode::SW));
  Expr ncommit = bv_add(bv_zext(c0_fire, tb + 1), bv_zext(c1_fire, tb + 1));

  // ---- dispatch ----
  Expr fetched = bv_ite(in_valid, in_instr, bv_const(0, 16));
  core.taps["fetch_instr"] = fetched;
  core.taps["inflight_instr"] = fetched;
  DecodedInstr d = decode_instr(fetched, w);
  Expr eop = bv_ite(bv_and(in_valid, d.valid), d.op, op_const(Opcode::NOP));
  core.taps["decode_opcode"] = eop;
  Expr rd_f = bv_extract(d.rd, rb - 1, 0);
  Expr rs1_f = bv_extract(d.rs1, rb - 1, 0);
  Expr rs2_f = bv_extract(d.rs2, rb - 1, 0);

  Expr is_nop = op_is(eop, Opcode::NOP);
  Expr is_mul_c = op_is(eop, Opcode::MUL);
  Expr is_mem_c = is_mem(eop);
  Expr is_alu_c = bv_not(bv_or_many({is_nop, is_mul_c, is_mem_c}));

  Expr avail_a0 = bv_or(bv_not(rsa0.busy), issue0);
  Expr avail_a1 = bv_or(bv_not(rsa1.busy), issue1);
  Expr avail_l = bv_or(bv_not(rsl.busy), lsu_fire);
  Expr avail_m = bv_or(bv_not(rsm.busy), mul_issue);
  Expr rob_avail = bv_ult(count, bv_const(ne, tb + 1));

  Expr rs_ok = bv_or_many({is_nop, bv_and(is_alu_c, bv_or(avail_a0, avail_a1)),
                           bv_and(is_mul_c, avail_m), bv_and(is_mem_c, avail_l)});
  Expr fetch_ready = bv_and(rob_avail, rs_ok);
  Expr dispatch_fire = bv_and(fetch_ready, in_valid);
  Expr tail = bv_extract(bv_add(bv_zext(head, tb + 1), count), tb - 1, 0);

  // operand fetch with writeback snooping
  Expr snoop_any = zero;
  auto resolve = [&](const Expr& r) {
    Expr busy = at(bt_busy, r);
    Expr tag = at(bt_tag, r);
    Expr snoop_hit = zero;
    Expr snoop_val = bv_const(0, w);
    for (const auto& wb : wbs) {
      Expr hit = bv_and(wb.valid, bv_eq(wb.tag, tag));
      snoop_val = bv_ite(bv_and(hit, bv_not(snoop_hit)), wb.val, snoop_val);
      snoop_hit = bv_or(snoop_hit, hit);
    }
    Expr known = at(rb_done, tag);
    RsOperand o;
    o.v = bv_ite(busy, bv_ite(snoop_hit, snoop_val, at(rb_val, tag)), at(regs, r));
    o.w = bv_and_many({busy, bv_not(known), bv_not(snoop_hit)});
    o.t = tag;
    snoop_any = bv_or(snoop_any, bv_and(busy, snoop_hit));
    return o;
  };

  RsOperand op1 = resolve(rs1_f);
  Expr src2_addr = bv_ite(op_is(eop, Opcode::SW), rd_f, rs2_f);
  RsOperand op2_reg = resolve(src2_addr);
  Expr needs_op2 = bv_or(uses_rs2(eop), op_is(eop, Opcode::SW));
  RsOperand op2{bv_ite(needs_op2, op2_reg.v, bv_const(0, w)),
                bv_and(needs_op2, op2_reg.w), op2_reg.t};
  core.taps["src1_data"] = op1.v;
  core.taps["src2_data"] = op2_reg.v;

  // ---- next state ----
  Expr d_alu = bv_and(dispatch_fire, is_alu_c);
  Expr d_a0 = bv_and(d_alu, avail_a0);
  Expr d_a1 = bv_and_many({d_alu, bv_not(avail_a0), avail_a1});
  Expr d_l = bv_and(dispatch_fire, is_mem_c);
  Expr d_m = bv_and(dispatch_fire, is_mul_c);

  auto set_rs_next = [&](const RsState& rs, const Expr& disp, const Expr& issue, bool has_imm,
                         bool has_dup) {
    RsOperand k1 = wakeup({rs.v1, rs.w1, rs.t1}, wbs);
    RsOperand k2 = wakeup({rs.v2, rs.w2, rs.t2}, wbs);
    ts.set_next(rs.name + ".busy", bv_ite(disp, one, bv_ite(issue, zero, rs.busy)));
    ts.set_next(rs.name + ".op", bv_ite(disp, eop, rs.op));
    ts.set_next(rs.name + ".tag", bv_ite(disp, tail, rs.tag));
    ts.set_next(rs.name + ".v1", bv_ite(disp, op1.v, k1.v));
    ts.set_next(rs.name + ".w1", bv_ite(disp, op1.w, k1.w));
    ts.set_next(rs.name + ".t1", bv_ite(disp, op1.t, k1.t));
    ts.set_next(rs.name + ".v2", bv_ite(disp, op2.v, k2.v));
    ts.set_next(rs.name + ".w2", bv_ite(disp, op2.w, k2.w));
    ts.set_next(rs.name + ".t2", bv_ite(disp, op2.t, k2.t));
    if (has_imm) ts.set_next(rs.name + ".imm", bv_ite(disp, d.imm, rs.imm));
    if (has_dup) ts.set_next(rs.name + ".dup", bv_ite(disp, in_dup, rs.dup));
  };
  set_rs_next(rsa0, d_a0, issue0, true, false);
  set_rs_next(rsa1, d_a1, issue1, true, false);
  set_rs_next(rsl, d_l, lsu_fire, true, true);
  set_rs_next(rsm, d_m, mul_issue, false, false);

  ts.set_next("mulp.busy", mul_issue);
  ts.set_next("mulp.tag", bv_ite(mul_issue, rsm.tag, mulp_tag));
  ts.set_next("mulp.val", bv_ite(mul_issue, mul_res, mulp_val));

  for (uint32_t e = 0; e < ne; ++e) {
    Expr te = bv_const(e, tb);
    Expr committed = bv_or(bv_and(c0_fire, bv_eq(head, te)), bv_and(c1_fire, bv_eq(head1, te)));
    Expr disp = bv_and(dispatch_fire, bv_eq(tail, te));
    Expr wb_hit = zero;
    Expr wb_val = bv_const(0, w);
    for (size_t j = 0; j < wbs.size(); ++j) {
      Expr hit = bv_and(wbs[j].valid, bv_eq(wbs[j].tag, te));
      wb_val = bv_ite(bv_and(hit, bv_not(wb_hit)), wbs[j].val, wb_val);
      wb_hit = bv_or(wb_hit, hit);
    }
    Expr sw_hit = bv_and(lsu_fire_sw, bv_eq(rsl.tag, te));
    Expr lw_hit = bv_and(lsu_fire_lw, bv_eq(rsl.tag, te));
    std::string p = "rob" + std::to_string(e) + ".";
    Expr finish = bv_and(rb_valid[e], bv_or(wb_hit, sw_hit));
    ts.set_next(p + "valid", bv_ite(disp, one, bv_ite(committed, zero, rb_valid[e])));
    ts.set_next(p + "done",
                bv_ite(disp, is_nop, bv_ite(committed, zero, bv_or(finish, rb_done[e]))));
    ts.set_next(p + "op", bv_ite(disp, eop, rb_op[e]));
    ts.set_next(p + "rd", bv_ite(disp, rd_f, rb_rd[e]));
    ts.set_next(p + "val", bv_ite(disp, bv_const(0, w), bv_ite(wb_hit, wb_val, rb_val[e])));
    ts.set_next(p + "addr",
                bv_ite(disp, bv_const(0, mb),
                       bv_ite(bv_or(sw_hit, lw_hit), lsu_addr, rb_addr[e])));
    ts.set_next(p + "sdata",
                bv_ite(disp, bv_const(0, w), bv_ite(sw_hit, rsl.v2, rb_sdata[e])));
  }

  ts.set_next("rob.head", bv_add(head, bv_extract(ncommit, tb - 1, 0)));
  ts.set_next("rob.count",
              bv_sub(bv_add(count, bv_zext(dispatch_fire, tb + 1)), ncommit));

  Expr bt_set = bv_and(dispatch_fire, writes_reg(eop));
  for (uint32_t r = 0; r < params.num_regs; ++r) {
    Expr ri = bv_const(r, rb);
    Expr set = bv_and(bt_set, bv_eq(rd_f, ri));
    Expr clr = bv_or(
        bv_and_many({w0, bv_eq(e0_rd, ri), bt_busy[r], bv_eq(bt_tag[r], head)}),
        bv_and_many({w1c, bv_eq(e1_rd, ri), bt_busy[r], bv_eq(bt_tag[r], head1)}));
    std::string p = "bt" + std::to_string(r) + ".";
    ts.set_next(p + "busy", bv_ite(set, one, bv_ite(clr, zero, bt_busy[r])));
    ts.set_next(p + "tag", bv_ite(set, tail, bt_tag[r]));
  }

  for (uint32_t r = 0; r < params.num_regs; ++r) {
    Expr ri = bv_const(r, rb);
    Expr t_hit = bv_and(t_en, bv_eq(t_addr, ri));
    Expr nxt = bv_ite(t_hit, t_data,
                      bv_ite(bv_and(w1c, bv_eq(e1_rd, ri)), e1_val,
                             bv_ite(bv_and(w0, bv_eq(e0_rd, ri)), e0_val, regs[r])));
    ts.set_next("r" + std::to_string(r), nxt);
  }
  for (uint32_t j = 0; j < params.mem_words; ++j) {
    Expr mj = bv_const(j, mb);
    Expr nxt = bv_ite(bv_and(s1, bv_eq(e1_addr, mj)), e1_sdata,
                      bv_ite(bv_and(s0, bv_eq(e0_addr, mj)), e0_sdata, mems[j]));
    ts.set_next("m" + std::to_string(j), nxt);
  }

  // ---- ports ----
  core.fetch_ready = fetch_ready;
  core.fetch_fire = dispatch_fire;
  core.dispatch_fire = dispatch_fire;
  core.dispatch_ready = one;
  core.exec_ready = one;
  core.mem_ready = one;
  core.alloc_tag = tail;
  core.rob_head = head;
  core.commit0_tag = head;
  core.commit1_tag = head1;

  core.commits.push_back({w0, e0_rd, e0_val});
  core.commits.push_back({w1c, e1_rd, e1_val});
  core.mem_writes.push_back({s0, e0_addr, e0_sdata});
  core.mem_writes.push_back({s1, e1_addr, e1_sdata});

  core.src1 = {bv_and(dispatch_fire, reads_rs1(eop)), rs1_f, op1.v, op1.w, op1.t};
  core.src2 = {bv_and(dispatch_fire, needs_op2), src2_addr, op2_reg.v, op2_reg.w, op2_reg.t};
  core.mem_read = {lsu_fire_lw, lsu_addr, load_data, rsl.tag};

  core.execs.push_back({"alu0", issue0, rsa0.tag, rsa0.v1,
                        bv_ite(uses_imm(rsa0.op), rsa0.imm, rsa0.v2)});
  core.execs.push_back({"alu1", issue1, rsa1.tag, rsa1.v1,
                        bv_ite(uses_imm(rsa1.op), rsa1.imm, rsa1.v2)});
  core.execs.push_back({"mul", mul_issue, rsm.tag, rsm.v1, rsm.v2});
  core.execs.push_back({"lsu", lsu_fire, rsl.tag, rsl.v1,
                        bv_ite(lsu_is_sw, rsl.v2, rsl.imm)});

  std::vector<Expr> wake_hits;
  for (const RsState* rs : {&rsa0, &rsa1, &rsl, &rsm}) {
    for (const auto& wb : wbs) {
      wake_hits.push_back(bv_and_many({rs->w1, wb.valid, bv_eq(wb.tag, rs->t1)}));
      wake_hits.push_back(bv_and_many({rs->w2, wb.valid, bv_eq(wb.tag, rs->t2)}));
    }
  }
  wake_hits.push_back(bv_and(dispatch_fire, snoop_any));
  core.taps["fwd_active"] = bv_or_many(wake_hits);

  core.idle = bv_and_many({bv_eq(count, bv_const(0, tb + 1)), bv_not(mulp_busy),
                           bv_not(rsa0.busy), bv_not(rsa1.busy), bv_not(rsl.busy),
                           bv_not(rsm.busy)});

  auto errs = validate_ts(ts);
  if (!errs.empty()) throw Error("ooc build: " + errs.front());
  return core;
}

}  // namespace sqed
