#include "sqed/recorders.hpp"

#include "sqed/errors.hpp"

namespace sqed {

namespace {

TcFragment tc_recorder_inorder() {
  TcFragment f;
  TransitionSystem& ts = f.ts;
  Expr fetch_fire = ts.add_input("fetch_fire", 1);
  Expr dispatch_ready = ts.add_input("dispatch_ready", 1);
  Expr exec_ready = ts.add_input("exec_ready", 1);
  Expr mem_ready = ts.add_input("mem_ready", 1);

  Expr mode = ts.add_state("mode", 3, 0);
  Expr prev = ts.add_state("prev", 1, 0);

  auto at_stage = [&](uint64_t s) { return bv_eq_const(mode, s); };
  Expr next = bv_ite(bv_and(at_stage(0), fetch_fire), bv_const(1, 3),
                     bv_ite(bv_and(at_stage(1), dispatch_ready), bv_const(2, 3),
                            bv_ite(bv_and(at_stage(2), exec_ready), bv_const(3, 3),
                                   bv_ite(bv_and(at_stage(3), mem_ready), bv_const(4, 3), mode))));
  ts.set_next("mode", next);

  f.mode = mode;
  f.mode_next = next;
  f.sif_complete = at_stage(4);
  f.prev_sif = prev;
  f.sif_rise = bv_and(f.sif_complete, bv_not(prev));
  ts.set_next("prev", f.sif_complete);
  return f;
}

TcFragment tc_recorder_ooc(uint32_t rob_entries) {
  if (rob_entries != 4) throw BadParams("rob_entries must be 4");
  const uint32_t tb = 2;
  TcFragment f;
  TransitionSystem& ts = f.ts;
  Expr dispatch_fire = ts.add_input("dispatch_fire", 1);
  Expr alloc_tag = ts.add_input("alloc_tag", tb);
  Expr rob_head = ts.add_input("rob_head", tb);
  Expr rob_count = ts.add_input("rob_count", tb + 1);

  Expr seen = ts.add_state("seen", 1, 0);
  Expr marked = ts.add_state("marked", tb, 0);
  Expr sif = ts.add_state("sif", 1, 0);
  std::vector<Expr> alloc;
  for (uint32_t i = 0; i < rob_entries; ++i)
    alloc.push_back(ts.add_state("alloc" + std::to_string(i), 1, 0));

  Expr first = bv_and(dispatch_fire, bv_not(seen));
  ts.set_next("seen", bv_or(seen, dispatch_fire));
  ts.set_next("marked", bv_ite(first, alloc_tag, marked));
  for (uint32_t i = 0; i < rob_entries; ++i) {
    Expr here = bv_and(dispatch_fire, bv_eq_const(alloc_tag, i));
    ts.set_next("alloc" + std::to_string(i), bv_or(alloc[i], here));
  }

  // Complete once every start-state entry has drained: the head entry was
  // allocated after the start, or the buffer is empty.
  Expr head_marked = bv_const(0, 1);
  for (uint32_t i = 0; i < rob_entries; ++i)
    head_marked = bv_ite(bv_eq_const(rob_head, i), alloc[i], head_marked);
  Expr sif_now = bv_or_many({sif, bv_eq_const(rob_count, 0), head_marked});
  ts.set_next("sif", sif_now);

  f.sif_complete = sif_now;
  f.prev_sif = sif;
  f.sif_rise = bv_and(sif_now, bv_not(sif));
  f.seen = seen;
  f.marked_tag = marked;
  f.qed_alloc = alloc;
  return f;
}

struct BufferSignals {
  Expr addr, data, waiting, producer_tag;  // waiting/tag may be null
};

OperandBuffer add_buffer(TransitionSystem& ts, const std::string& name, uint32_t capacity,
                         Expr record, const BufferSignals& sig) {
  if (capacity < 1 || capacity > 8) throw BadParams("buffer capacity out of range");
  OperandBuffer b;
  b.capacity = capacity;
  Expr count = ts.add_state(name + "_n", 4, 0);
  b.count = count;
  Expr rec = bv_and(record, bv_not(bv_eq_const(count, capacity)));
  for (uint32_t i = 0; i < capacity; ++i) {
    std::string sfx = std::to_string(i);
    Expr here = bv_and(rec, bv_eq_const(count, i));
    Expr v = ts.add_state(name + "_v" + sfx, 1, 0);
    Expr a = ts.add_state(name + "_a" + sfx, sig.addr.width(), 0);
    Expr d = ts.add_state(name + "_d" + sfx, sig.data.width(), 0);
    ts.set_next(name + "_v" + sfx, bv_or(v, here));
    ts.set_next(name + "_a" + sfx, bv_ite(here, sig.addr, a));
    ts.set_next(name + "_d" + sfx, bv_ite(here, sig.data, d));
    b.valid.push_back(v);
    b.addr.push_back(a);
    b.data.push_back(d);
    if (sig.waiting.valid()) {
      Expr wt = ts.add_state(name + "_w" + sfx, 1, 0);
      Expr tg = ts.add_state(name + "_t" + sfx, sig.producer_tag.width(), 0);
      ts.set_next(name + "_w" + sfx, bv_ite(here, sig.waiting, wt));
      ts.set_next(name + "_t" + sfx, bv_ite(here, sig.producer_tag, tg));
      b.waiting.push_back(wt);
      b.producer_tag.push_back(tg);
    }
  }
  ts.set_next(name + "_n", bv_ite(rec, bv_add(count, bv_const(1, 4)), count));
  return b;
}

}  // namespace

TcFragment build_tc_recorder(CoreKind kind, uint32_t rob_entries) {
  return kind == CoreKind::IOC5 ? tc_recorder_inorder() : tc_recorder_ooc(rob_entries);
}

OperandFragment build_operand_recorder(CoreKind kind, uint32_t width, uint32_t reg_bits,
                                       uint32_t mem_bits, uint32_t capacity,
                                       uint32_t rob_entries) {
  OperandFragment f;
  TransitionSystem& ts = f.ts;
  const uint32_t tb = 2;
  if (rob_entries != 4) throw BadParams("rob_entries must be 4");

  Expr s1_valid = ts.add_input("s1_valid", 1);
  Expr s1_addr = ts.add_input("s1_addr", reg_bits);
  Expr s1_data = ts.add_input("s1_data", width);
  Expr s2_valid, s2_addr, s2_data, m_valid, m_addr, m_data;
  Expr s1_wait, s1_tag, s2_wait, s2_tag;

  Expr src_gate, mem_gate;
  if (kind == CoreKind::IOC5) {
    Expr mode = ts.add_input("mode", 3);
    Expr mode_next = ts.add_input("mode_next", 3);
    Expr prev_sif = ts.add_input("prev_sif", 1);
    s2_valid = ts.add_input("s2_valid", 1);
    s2_addr = ts.add_input("s2_addr", reg_bits);
    s2_data = ts.add_input("s2_data", width);
    m_valid = ts.add_input("m_valid", 1);
    m_addr = ts.add_input("m_addr", mem_bits);
    m_data = ts.add_input("m_data", width);
    // Source reads recorded while the tracked instruction sits between
    // fetch and writeback; at the final stage the write-through bypass can
    // hand back values the commit-point register file never held.
    src_gate = bv_and_many({bv_not(bv_eq_const(mode_next, 0)), bv_not(bv_eq_const(mode_next, 1)),
                            bv_not(bv_eq_const(mode, 4))});
    mem_gate = bv_and(bv_or(bv_eq_const(mode, 3), bv_eq_const(mode, 4)), bv_not(prev_sif));
  } else {
    Expr sif_now = ts.add_input("sif_now", 1);
    Expr prev_sif = ts.add_input("prev_sif", 1);
    s1_wait = ts.add_input("s1_wait", 1);
    s1_tag = ts.add_input("s1_tag", tb);
    s2_valid = ts.add_input("s2_valid", 1);
    s2_addr = ts.add_input("s2_addr", reg_bits);
    s2_data = ts.add_input("s2_data", width);
    s2_wait = ts.add_input("s2_wait", 1);
    s2_tag = ts.add_input("s2_tag", tb);
    m_valid = ts.add_input("m_valid", 1);
    m_addr = ts.add_input("m_addr", mem_bits);
    m_data = ts.add_input("m_data", width);
    src_gate = bv_not(sif_now);
    mem_gate = bv_not(prev_sif);
  }

  f.src1 = add_buffer(ts, "s1", capacity, bv_and(s1_valid, src_gate),
                      {s1_addr, s1_data, s1_wait, s1_tag});
  f.src2 = add_buffer(ts, "s2", capacity, bv_and(s2_valid, src_gate),
                      {s2_addr, s2_data, s2_wait, s2_tag});
  f.mem = add_buffer(ts, "m", capacity, bv_and(m_valid, mem_gate),
                     {m_addr, m_data, Expr(), Expr()});
  return f;
}

}  // namespace sqed
