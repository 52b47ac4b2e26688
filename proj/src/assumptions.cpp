#include "sqed/assumptions.hpp"

#include <cstdint>
#include <deque>
#include <map>
#include <random>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "sqed/qed.hpp"

namespace sqed {

namespace {

uint64_t splitmix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// One fed instruction plus everything observed about it during the trial.
struct FeedEntry {
  Instruction instr;  // already duplicate-mapped when dup is set
  bool dup = false;
  bool exec_seen = false;
  uint64_t used1 = 0, used2 = 0;
  uint64_t exec_cycle = 0;
  bool committed = false;
  uint64_t commit_val = 0;
  bool mem_seen = false;
  uint64_t mem_datum = 0;
};

struct Trial {
  const Core& core;
  Simulator sim;
  std::mt19937_64 rng;
  ArchState shadow;  // architectural original-half tracker, drives operand picks
  std::vector<FeedEntry> feed;
  uint64_t cycle = 0;
  bool misaligned = false;  // an event had no owner; injected cores only

  // in-order association queues (feed indices)
  std::deque<size_t> exec_q, commit_q, lw_q;
  // out-of-order association by ROB tag
  std::unordered_map<uint64_t, size_t> tag2idx;

  Trial(const Core& c, uint64_t seed)
      : core(c),
        sim(c.ts),
        rng(seed),
        shadow(make_arch_state(c.params.num_regs, c.params.mem_words, c.params.width)) {}

  Instruction random_original() {
    static const Opcode kPool[] = {Opcode::ADD, Opcode::SUB, Opcode::AND,  Opcode::OR,
                                   Opcode::XOR, Opcode::SLL, Opcode::SRL,  Opcode::MUL,
                                   Opcode::ADD, Opcode::ADDI, Opcode::ADDI, Opcode::LW,
                                   Opcode::LW,  Opcode::SW};
    Instruction i;
    i.op = kPool[rng() % (sizeof(kPool) / sizeof(kPool[0]))];
    uint32_t half_r = core.params.num_regs / 2;
    uint32_t half_m = core.params.mem_words / 2;
    i.rd = int(rng() % half_r);
    i.rs1 = int(rng() % half_r);
    if (opcode_uses_rs2(i.op)) i.rs2 = int(rng() % half_r);
    if (opcode_is_mem(i.op)) {
      // Pick imm so the effective address lands in the original half.
      uint64_t target = rng() % half_m;
      uint64_t base = shadow.regs[size_t(i.rs1)];
      i.imm = int((target - base) % core.params.mem_words);
    } else if (opcode_uses_imm(i.op)) {
      i.imm = int(rng() % 64) - 32;
    }
    return i;
  }

  Env base_inputs() const {
    Env in;
    in.set(core.in_instr, 16, 0);
    in.set(core.in_valid, 1, 0);
    in.set(core.in_dup_mem, 1, 0);
    in.set(core.in_test_enable, 1, 0);
    in.set(core.in_test_addr, core.reg_bits(), 0);
    in.set(core.in_test_data, core.params.width, 0);
    return in;
  }

  uint64_t px(const Expr& e, const Env& in) { return sim.peek(e, in); }

  // feed index owning a ROB tag, or npos
  size_t owner(uint64_t tag) {
    auto it = tag2idx.find(tag);
    if (it == tag2idx.end()) {
      misaligned = true;
      return size_t(-1);
    }
    return it->second;
  }

  size_t pop_q(std::deque<size_t>& q) {
    if (q.empty()) {
      misaligned = true;
      return size_t(-1);
    }
    size_t idx = q.front();
    q.pop_front();
    return idx;
  }

  void observe(const Env& in, bool recording) {
    bool ooc = core.kind == CoreKind::OOC;
    for (const ExecPort& ep : core.execs) {
      if (!px(ep.valid, in)) continue;
      size_t idx = ooc ? owner(px(ep.tag, in)) : pop_q(exec_q);
      if (idx == size_t(-1)) continue;
      if (!recording) continue;
      FeedEntry& fe = feed[idx];
      fe.exec_seen = true;
      fe.used1 = px(ep.used1, in);
      fe.used2 = px(ep.used2, in);
      fe.exec_cycle = cycle;
    }
    if (px(core.mem_read.valid, in)) {
      size_t idx = ooc ? owner(px(core.mem_read.tag, in)) : pop_q(lw_q);
      if (idx != size_t(-1) && recording) {
        feed[idx].mem_seen = true;
        feed[idx].mem_datum = px(core.mem_read.data, in);
      }
    }
    for (size_t p = 0; p < core.commits.size(); ++p) {
      if (!px(core.commits[p].valid, in)) continue;
      size_t idx;
      if (ooc) {
        idx = owner(px(p == 0 ? core.commit0_tag : core.commit1_tag, in));
      } else {
        idx = pop_q(commit_q);
      }
      if (idx == size_t(-1)) continue;
      if (!recording) continue;
      feed[idx].committed = true;
      feed[idx].commit_val = px(core.commits[p].data, in);
    }
  }

  void on_dispatch(size_t idx, const Env& in) {
    if (core.kind == CoreKind::OOC) {
      tag2idx[px(core.alloc_tag, in)] = idx;
    } else {
      const Instruction& i = feed[idx].instr;
      if (i.op != Opcode::NOP) exec_q.push_back(idx);
      if (opcode_writes_reg(i.op)) commit_q.push_back(idx);
      if (i.op == Opcode::LW) lw_q.push_back(idx);
    }
  }

  // Feeds every entry of `feed` starting at `from` through the fetch
  // handshake, then drains to idle. Returns false when the cycle budget runs
  // out or an association slipped.
  bool run(size_t from, bool recording, uint64_t budget) {
    size_t next = from;
    uint64_t limit = cycle + budget;
    while (next < feed.size() && cycle < limit && !misaligned) {
      Env in = base_inputs();
      in.set(core.in_instr, 16, encode(feed[next].instr));
      in.set(core.in_valid, 1, 1);
      in.set(core.in_dup_mem, 1, feed[next].dup ? 1 : 0);
      bool fire = px(core.fetch_fire, in) != 0;
      observe(in, recording);
      if (fire) on_dispatch(next++, in);
      sim.step(in);
      ++cycle;
    }
    while (cycle < limit && !misaligned) {
      Env in = base_inputs();
      if (px(core.idle, in)) return next == feed.size();
      observe(in, recording);
      sim.step(in);
      ++cycle;
    }
    return false;
  }

  // Appends n original/duplicate pairs, interleaved so each duplicate follows
  // its original and duplicates stay in original order.
  void push_pairs(size_t n) {
    std::deque<Instruction> pending;
    size_t made = 0;
    while (made < n || !pending.empty()) {
      bool push;
      if (pending.empty()) {
        push = true;  // made < n here, else the loop would have ended
      } else if (made == n || pending.size() >= 4) {
        push = false;
      } else {
        push = (rng() & 1) != 0;
      }
      if (push) {
        Instruction orig = random_original();
        feed.push_back({orig, false});
        pending.push_back(orig);
        ref_step(shadow, orig);
        ++made;
      } else {
        Instruction dup = dup_map(pending.front(), core.params.num_regs);
        pending.pop_front();
        feed.push_back({dup, true});
      }
    }
  }
};

void eval_a1(const std::vector<FeedEntry>& feed, std::vector<AssumptionViolation>& out) {
  // key: opcode, operand data, loaded datum, immediate
  std::map<std::tuple<int, uint64_t, uint64_t, uint64_t, int>, uint64_t> seen;
  for (const FeedEntry& fe : feed) {
    if (!fe.committed || !fe.exec_seen) continue;
    const Instruction& i = fe.instr;
    if (!opcode_writes_reg(i.op)) continue;
    uint64_t d2 = opcode_uses_rs2(i.op) ? fe.used2 : 0;
    uint64_t datum = i.op == Opcode::LW ? fe.mem_datum : 0;
    int imm = opcode_uses_imm(i.op) ? i.imm : 0;
    auto key = std::make_tuple(int(i.op), fe.used1, d2, datum, imm);
    auto [it, inserted] = seen.emplace(key, fe.commit_val);
    if (!inserted && it->second != fe.commit_val) {
      out.push_back({1, fe.exec_cycle, print_instr(i), it->second, fe.commit_val});
    }
  }
}

void eval_a2(const std::vector<FeedEntry>& feed, const std::vector<uint64_t>& snapshot,
             std::vector<AssumptionViolation>& out) {
  // last_writer[r]: feed index of the most recent program-order producer of r
  std::map<int, size_t> last_writer;
  for (size_t k = 0; k < feed.size(); ++k) {
    const FeedEntry& fe = feed[k];
    const Instruction& i = fe.instr;
    auto check = [&](int r, uint64_t observed) {
      uint64_t expected;
      auto it = last_writer.find(r);
      if (it != last_writer.end()) {
        if (!feed[it->second].committed) return;  // producer never retired
        expected = feed[it->second].commit_val;
      } else {
        expected = snapshot[size_t(r)];
      }
      if (observed != expected) {
        out.push_back({2, fe.exec_cycle, print_instr(i), expected, observed});
      }
    };
    if (fe.exec_seen) {
      if (opcode_reads_rs1(i.op)) check(i.rs1, fe.used1);
      if (opcode_uses_rs2(i.op)) check(i.rs2, fe.used2);
      if (i.op == Opcode::SW) check(i.rd, fe.used2);  // store source rides used2
    }
    if (opcode_writes_reg(i.op)) last_writer[i.rd] = k;
  }
}

}  // namespace

AssumptionReport check_assumptions(const Core& core, uint64_t runs, uint64_t seed) {
  AssumptionReport rep;
  rep.runs = runs;
  for (uint64_t t = 0; t < runs; ++t) {
    Trial tr(core, splitmix64(seed ^ (t + 1)));
    size_t prefix_pairs = tr.rng() % 4;       // 0..3
    size_t test_pairs = 1 + tr.rng() % 4;     // 1..4
    tr.push_pairs(prefix_pairs);
    if (!tr.run(0, false, 200)) continue;     // injected cores may wedge; skip trial
    std::vector<uint64_t> snapshot(core.params.num_regs);
    for (uint32_t r = 0; r < core.params.num_regs; ++r) {
      snapshot[r] = tr.sim.peek(core.reg(r), tr.base_inputs());
    }
    size_t test_from = tr.feed.size();
    tr.push_pairs(test_pairs);
    if (!tr.run(test_from, true, 300)) continue;
    std::vector<FeedEntry> test(tr.feed.begin() + long(test_from), tr.feed.end());
    eval_a1(test, rep.violations);
    eval_a2(test, snapshot, rep.violations);
  }
  return rep;
}

AssumptionReport check_assumptions(CoreKind kind, uint64_t runs, uint64_t seed) {
  Core core = build_core(kind);
  return check_assumptions(core, runs, seed);
}

}  // namespace sqed
