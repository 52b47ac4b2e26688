#include "sqed/constraints.hpp"

#include "core_common.hpp"
#include "sqed/errors.hpp"

namespace sqed {

using namespace detail;

ConstraintSet build_constraints(const Core& core, const TcRecorder& tc,
                                const OperandBuffers& bufs, const QedReady& ready,
                                const QedConfig& cfg, const Ablations& abl) {
  ConstraintSet cs;
  const uint32_t N = cfg.num_regs;
  const uint32_t M = cfg.mem_words;
  std::vector<Expr> regs, mems;
  for (uint32_t i = 0; i < N; ++i) regs.push_back(core.reg(i));
  for (uint32_t i = 0; i < M; ++i) mems.push_back(core.mem(i));

  // C-1: start-state coherence of the commit order. In-order pipelines need
  // nothing; the reorder buffer needs its entries, reservation stations and
  // busy table to agree, or a stale in-flight write can land in an entry a
  // later instruction reuses.
  if (!abl.drop_c1 && core.kind == CoreKind::OOC) {
    const TransitionSystem& ts = core.ts;
    const uint32_t ne = core.params.rob_entries;
    const uint32_t tb = 2;
    Expr head = core.rob_head;
    Expr count = ts.state("rob.count");
    std::vector<Expr> rb_valid, rb_done, rb_op, rb_rd;
    for (uint32_t i = 0; i < ne; ++i) {
      std::string p = "rob" + std::to_string(i) + ".";
      rb_valid.push_back(ts.state(p + "valid"));
      rb_done.push_back(ts.state(p + "done"));
      rb_op.push_back(ts.state(p + "op"));
      rb_rd.push_back(ts.state(p + "rd"));
    }
    auto in_seg = [&](const Expr& tag) {
      return bv_ult(bv_zext(bv_sub(tag, head), tb + 1), count);
    };
    cs.c1_init.push_back(bv_ult(count, bv_const(ne + 1, tb + 1)));
    for (uint32_t i = 0; i < ne; ++i)
      cs.c1_init.push_back(bv_eq(rb_valid[i], in_seg(bv_const(i, tb))));

    struct Unit {
      Expr busy, tag, w1, t1, w2, t2;
    };
    std::vector<Unit> units;
    for (const std::string p : {"rsa0", "rsa1", "rsl", "rsm"}) {
      units.push_back({ts.state(p + ".busy"), ts.state(p + ".tag"), ts.state(p + ".w1"),
                       ts.state(p + ".t1"), ts.state(p + ".w2"), ts.state(p + ".t2")});
    }
    units.push_back({ts.state("mulp.busy"), ts.state("mulp.tag"), Expr(), Expr(), Expr(), Expr()});

    for (const Unit& u : units) {
      cs.c1_init.push_back(
          bv_implies(u.busy, bv_and(in_seg(u.tag), bv_not(read_file(rb_done, u.tag)))));
      if (u.w1.valid()) {
        cs.c1_init.push_back(bv_implies(bv_and(u.busy, u.w1), in_seg(u.t1)));
        cs.c1_init.push_back(bv_implies(bv_and(u.busy, u.w2), in_seg(u.t2)));
      }
    }
    for (size_t i = 0; i < units.size(); ++i)
      for (size_t j = i + 1; j < units.size(); ++j)
        cs.c1_init.push_back(bv_implies(bv_and(units[i].busy, units[j].busy),
                                        bv_ne(units[i].tag, units[j].tag)));

    for (uint32_t r = 0; r < N; ++r) {
      Expr busy = ts.state("bt" + std::to_string(r) + ".busy");
      Expr tag = ts.state("bt" + std::to_string(r) + ".tag");
      cs.c1_init.push_back(bv_implies(
          busy, bv_and_many({in_seg(tag), bv_eq(read_file(rb_rd, tag), bv_const(r, core.reg_bits())),
                             writes_reg(read_file(rb_op, tag))})));
    }
  }

  // C-2: the start state is QED-consistent at the commit point and test mode
  // stays off. The off clause is unconditional rather than gated on the
  // commit point: a pre-commit test write can clobber the destination of an
  // in-flight result after a consumer already took it off the bypass, a
  // divergence between consumed and architectural data that no start-state
  // choice reproduces and the anchoring below cannot see.
  std::vector<Expr> reg_pairs, mem_pairs;
  for (uint32_t a = 0; a < N / 2; ++a) reg_pairs.push_back(bv_eq(regs[a], regs[a + N / 2]));
  for (uint32_t i = 0; i < M / 2; ++i) mem_pairs.push_back(bv_eq(mems[i], mems[i + M / 2]));
  if (!abl.drop_c2_reg) cs.c2_step.push_back(bv_implies(tc.sif_rise, bv_and_many(reg_pairs)));
  if (!abl.drop_c2_mem) cs.c2_step.push_back(bv_implies(tc.sif_rise, bv_and_many(mem_pairs)));
  if (!abl.drop_c2_testen)
    cs.c2_step.push_back(bv_eq_const(core.ts.input(core.in_test_enable), 0));

  // C-3: operand data recorded before the commit point matches the state
  // there; waiting operands must name a post-start producer.
  if (!abl.drop_c3) {
    std::vector<Expr> anchored;
    auto src_buffer = [&](const OperandBuffer& b) {
      for (size_t i = 0; i < b.valid.size(); ++i) {
        Expr not_wait = b.waiting.empty() ? bv_bool(true) : bv_not(b.waiting[i]);
        anchored.push_back(bv_implies(bv_and(b.valid[i], not_wait),
                                      bv_eq(b.data[i], read_file(regs, b.addr[i]))));
        if (!b.waiting.empty()) {
          Expr alloc_at = bv_const(0, 1);
          for (size_t e = 0; e < tc.qed_alloc.size(); ++e)
            alloc_at = bv_ite(bv_eq_const(b.producer_tag[i], e), tc.qed_alloc[e], alloc_at);
          anchored.push_back(bv_implies(bv_and(b.valid[i], b.waiting[i]), alloc_at));
        }
      }
    };
    src_buffer(bufs.src1);
    src_buffer(bufs.src2);
    for (size_t i = 0; i < bufs.mem.valid.size(); ++i)
      anchored.push_back(bv_implies(
          bufs.mem.valid[i], bv_eq(bufs.mem.data[i], read_file(mems, bufs.mem.addr[i]))));
    cs.c3_step.push_back(bv_implies(tc.sif_rise, bv_and_many(anchored)));
  }

  Expr gate = abl.drop_property_sif_gate ? ready.qed_ready
                                         : bv_and(ready.qed_ready, tc.sif_complete);
  cs.property = bv_implies(gate, bv_and_many(reg_pairs));
  return cs;
}

void apply_constraints(TransitionSystem& ts, const ConstraintSet& cs,
                       const std::string& property_name) {
  for (const Expr& e : cs.c1_init) ts.init_assumes.push_back(e);
  for (const Expr& e : cs.c2_step) ts.step_assumes.push_back(e);
  for (const Expr& e : cs.c3_step) ts.step_assumes.push_back(e);
  ts.asserts.push_back({property_name, cs.property});
}

}  // namespace sqed
