#include "sqed/solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace sqed {

const char* sat_status_name(SatStatus s) {
  switch (s) {
    case SatStatus::Sat: return "Sat";
    case SatStatus::Unsat: return "Unsat";
    case SatStatus::Budget: return "Budget";
  }
  return "?";
}

namespace {

// Internal literal: var << 1 | sign, vars 0-based. Sign 1 means negated.
inline int ilit(int dimacs) {
  int v = dimacs < 0 ? -dimacs : dimacs;
  return ((v - 1) << 1) | (dimacs < 0 ? 1 : 0);
}
inline int ivar(int l) { return l >> 1; }
inline int ineg(int l) { return l ^ 1; }

// Clauses live in one flat arena: [size, flags|lbd<<2, activity, lits...].
// A ClauseRef is the offset of the size slot. Learnt clauses carry an LBD
// and a float activity; both fit in the fixed 3-slot header.
using ClauseRef = int;
constexpr int kHeader = 3;
constexpr uint32_t kLearnt = 1, kDeleted = 2;

struct Arena {
  std::vector<int> slots;

  ClauseRef alloc(const std::vector<int>& lits, bool learnt, int lbd) {
    ClauseRef r = slots.size();
    slots.push_back(lits.size());
    slots.push_back((learnt ? kLearnt : 0) | (uint32_t)lbd << 2);
    slots.push_back(0);
    slots.insert(slots.end(), lits.begin(), lits.end());
    return r;
  }

  int size(ClauseRef r) const { return slots[r]; }
  bool learnt(ClauseRef r) const { return slots[r + 1] & kLearnt; }
  bool deleted(ClauseRef r) const { return slots[r + 1] & kDeleted; }
  void mark_deleted(ClauseRef r) { slots[r + 1] |= kDeleted; }
  int lbd(ClauseRef r) const { return (uint32_t)slots[r + 1] >> 2; }
  void set_lbd(ClauseRef r, int lbd) {
    slots[r + 1] = (slots[r + 1] & 3) | (uint32_t)lbd << 2;
  }
  float act(ClauseRef r) const {
    float f;
    std::memcpy(&f, &slots[r + 2], sizeof f);
    return f;
  }
  void set_act(ClauseRef r, float f) { std::memcpy(&slots[r + 2], &f, sizeof f); }
  int* lits(ClauseRef r) { return slots.data() + r + kHeader; }
  const int* lits(ClauseRef r) const { return slots.data() + r + kHeader; }
};

// Max-heap on (activity desc, var index asc), with position tracking.
class VarHeap {
 public:
  explicit VarHeap(const std::vector<double>& act) : act_(act) {}

  bool contains(int v) const { return v < (int)pos_.size() && pos_[v] >= 0; }
  bool empty() const { return heap_.empty(); }

  void insert(int v) {
    if ((int)pos_.size() <= v) pos_.resize(v + 1, -1);
    if (pos_[v] >= 0) return;
    pos_[v] = heap_.size();
    heap_.push_back(v);
    up(pos_[v]);
  }

  int pop() {
    int top = heap_[0];
    swap_at(0, heap_.size() - 1);
    pos_[top] = -1;
    heap_.pop_back();
    if (!heap_.empty()) down(0);
    return top;
  }

  void bumped(int v) {
    if (contains(v)) up(pos_[v]);
  }

 private:
  bool before(int a, int b) const { return act_[a] > act_[b] || (act_[a] == act_[b] && a < b); }
  void swap_at(size_t i, size_t j) {
    std::swap(heap_[i], heap_[j]);
    pos_[heap_[i]] = i;
    pos_[heap_[j]] = j;
  }
  void up(size_t i) {
    while (i > 0) {
      size_t p = (i - 1) / 2;
      if (!before(heap_[i], heap_[p])) break;
      swap_at(i, p);
      i = p;
    }
  }
  void down(size_t i) {
    for (;;) {
      size_t l = 2 * i + 1, r = 2 * i + 2, best = i;
      if (l < heap_.size() && before(heap_[l], heap_[best])) best = l;
      if (r < heap_.size() && before(heap_[r], heap_[best])) best = r;
      if (best == i) break;
      swap_at(i, best);
      i = best;
    }
  }

  const std::vector<double>& act_;
  std::vector<int> heap_;
  std::vector<int> pos_;
};

uint64_t luby(uint64_t x) {
  // 1 1 2 1 1 2 4 1 1 2 1 1 2 4 8 ..., 0-based position x.
  uint64_t size = 1, seq = 0;
  while (size < x + 1) {
    ++seq;
    size = 2 * size + 1;
  }
  while (size - 1 != x) {
    size = (size - 1) >> 1;
    --seq;
    x = x % size;
  }
  return 1ull << seq;
}

struct Watcher {
  ClauseRef cref;
  int blocker;
};

struct Solver {
  int nvars;
  Arena ca;
  std::vector<ClauseRef> learnts;
  std::vector<std::vector<Watcher>> watches;  // by literal
  std::vector<int8_t> assigns;                // by var: -1 unset, 0 false, 1 true
  std::vector<int8_t> polarity;               // saved phase
  std::vector<int> level;
  std::vector<ClauseRef> reason;  // -1 for decisions and level-0 units
  std::vector<int> trail;
  std::vector<int> trail_lim;
  size_t qhead = 0;
  std::vector<double> activity;
  double var_inc = 1.0;
  double cla_inc = 1.0;
  std::vector<int> lbd_stamp;
  VarHeap heap;
  std::vector<uint8_t> seen;
  int lbd_gen = 0;
  std::vector<int> minimize_stack, to_clear;
  uint64_t conflicts = 0, decisions = 0, propagations = 0;
  size_t n_problem_lits = 0;
  bool unsat_at_load = false;

  explicit Solver(int n)
      : nvars(n),
        watches(2 * n),
        assigns(n, -1),
        polarity(n, 0),
        level(n, 0),
        reason(n, -1),
        activity(n, 0.0),
        lbd_stamp(n + 1, 0),
        heap(activity) {
    seen.assign(n, 0);
    trail.reserve(n);
    for (int v = 0; v < n; ++v) heap.insert(v);
  }

  int decision_level() const { return trail_lim.size(); }

  int lit_value(int l) const {
    int a = assigns[ivar(l)];
    return a < 0 ? -1 : a ^ (l & 1);
  }

  void enqueue(int l, ClauseRef from) {
    int v = ivar(l);
    assigns[v] = 1 ^ (l & 1);
    level[v] = decision_level();
    reason[v] = from;
    trail.push_back(l);
  }

  void attach(ClauseRef r) {
    const int* ls = ca.lits(r);
    watches[ls[0]].push_back({r, ls[1]});
    watches[ls[1]].push_back({r, ls[0]});
  }

  bool add_problem_clause(const std::vector<int>& dimacs) {
    std::vector<int> lits;
    for (int dl : dimacs) lits.push_back(ilit(dl));
    std::sort(lits.begin(), lits.end());
    lits.erase(std::unique(lits.begin(), lits.end()), lits.end());
    std::vector<int> kept;
    for (size_t i = 0; i < lits.size(); ++i) {
      if (i + 1 < lits.size() && lits[i + 1] == ineg(lits[i])) return true;  // tautology
      int v = lit_value(lits[i]);
      if (v == 1) return true;  // satisfied by a load-time unit
      if (v == -1) kept.push_back(lits[i]);
    }
    if (kept.empty()) return false;
    if (kept.size() == 1) {
      enqueue(kept[0], -1);
      return true;
    }
    attach(ca.alloc(kept, false, 0));
    return true;
  }

  // Keeps the invariant that a reason clause has the implied literal first.
  int propagate() {
    while (qhead < trail.size()) {
      int p = trail[qhead++];
      ++propagations;
      int fl = ineg(p);  // literal that just became false
      std::vector<Watcher>& ws = watches[fl];
      size_t i = 0, j = 0;
      while (i < ws.size()) {
        Watcher w = ws[i++];
        if (lit_value(w.blocker) == 1) {
          ws[j++] = w;
          continue;
        }
        ClauseRef r = w.cref;
        if (ca.deleted(r)) continue;
        int* ls = ca.lits(r);
        int n = ca.size(r);
        if (n == 2) {
          // Binary: the blocker is the other literal, the watch never moves.
          ws[j++] = w;
          if (lit_value(w.blocker) == 0) {
            while (i < ws.size()) ws[j++] = ws[i++];
            ws.resize(j);
            return r;
          }
          if (ls[0] != w.blocker) std::swap(ls[0], ls[1]);
          enqueue(w.blocker, r);
          continue;
        }
        if (ls[0] == fl) std::swap(ls[0], ls[1]);
        int first = ls[0];
        Watcher nw{r, first};
        if (first != w.blocker && lit_value(first) == 1) {
          ws[j++] = nw;
          continue;
        }
        bool moved = false;
        for (int k = 2; k < n; ++k) {
          if (lit_value(ls[k]) != 0) {
            std::swap(ls[1], ls[k]);
            watches[ls[1]].push_back(nw);
            moved = true;
            break;
          }
        }
        if (moved) continue;
        ws[j++] = nw;
        if (lit_value(first) == 0) {
          while (i < ws.size()) ws[j++] = ws[i++];
          ws.resize(j);
          return r;
        }
        enqueue(first, r);
      }
      ws.resize(j);
    }
    return -1;
  }

  void bump_var(int v) {
    activity[v] += var_inc;
    if (activity[v] > 1e100) {
      for (double& a : activity) a *= 1e-100;
      var_inc *= 1e-100;
    }
    heap.bumped(v);
  }

  void bump_clause(ClauseRef r) {
    float a = ca.act(r) + (float)cla_inc;
    ca.set_act(r, a);
    if (a > 1e20f) {
      for (ClauseRef l : learnts) ca.set_act(l, ca.act(l) * 1e-20f);
      cla_inc *= 1e-20;
    }
  }

  int compute_lbd(const std::vector<int>& lits) {
    ++lbd_gen;
    int n = 0;
    for (int l : lits) {
      int lv = level[ivar(l)];
      if (lbd_stamp[lv] != lbd_gen) {
        lbd_stamp[lv] = lbd_gen;
        ++n;
      }
    }
    return n;
  }

  uint32_t abstract_level(int v) const { return 1u << (level[v] & 31); }

  // True when l is implied by literals already marked seen, searching the
  // implication graph. Leaves extra seen marks recorded in to_clear.
  bool lit_redundant(int l, uint32_t levels) {
    minimize_stack.clear();
    minimize_stack.push_back(l);
    size_t top = to_clear.size();
    while (!minimize_stack.empty()) {
      int q = minimize_stack.back();
      minimize_stack.pop_back();
      ClauseRef r = reason[ivar(q)];
      const int* ls = ca.lits(r);
      int n = ca.size(r);
      for (int k = 1; k < n; ++k) {
        int v = ivar(ls[k]);
        if (seen[v] || level[v] == 0) continue;
        if (reason[v] < 0 || !(abstract_level(v) & levels)) {
          for (size_t m = top; m < to_clear.size(); ++m) seen[ivar(to_clear[m])] = 0;
          to_clear.resize(top);
          return false;
        }
        seen[v] = 1;
        minimize_stack.push_back(ls[k]);
        to_clear.push_back(ls[k]);
      }
    }
    return true;
  }

  void analyze(ClauseRef confl, std::vector<int>& learnt, int& bt_level, int& lbd) {
    learnt.clear();
    learnt.push_back(0);  // slot for the asserting literal
    int path = 0;
    int p = -1;
    size_t idx = trail.size();
    do {
      if (ca.learnt(confl)) bump_clause(confl);
      const int* ls = ca.lits(confl);
      int n = ca.size(confl);
      for (int k = (p == -1 ? 0 : 1); k < n; ++k) {
        int q = ls[k];
        int v = ivar(q);
        if (!seen[v] && level[v] > 0) {
          seen[v] = 1;
          bump_var(v);
          if (level[v] >= decision_level())
            ++path;
          else
            learnt.push_back(q);
        }
      }
      do {
        p = trail[--idx];
      } while (!seen[ivar(p)]);
      seen[ivar(p)] = 0;
      confl = reason[ivar(p)];
      --path;
    } while (path > 0);
    learnt[0] = ineg(p);

    // Remove literals implied by the rest of the clause.
    to_clear.assign(learnt.begin(), learnt.end());
    uint32_t levels = 0;
    for (size_t i = 1; i < learnt.size(); ++i) levels |= abstract_level(ivar(learnt[i]));
    size_t j = 1;
    for (size_t i = 1; i < learnt.size(); ++i) {
      int v = ivar(learnt[i]);
      if (reason[v] < 0 || !lit_redundant(learnt[i], levels)) learnt[j++] = learnt[i];
    }
    learnt.resize(j);

    if (learnt.size() == 1) {
      bt_level = 0;
    } else {
      size_t max_i = 1;
      for (size_t i = 2; i < learnt.size(); ++i)
        if (level[ivar(learnt[i])] > level[ivar(learnt[max_i])]) max_i = i;
      std::swap(learnt[1], learnt[max_i]);
      bt_level = level[ivar(learnt[1])];
    }
    lbd = compute_lbd(learnt);
    for (int l : to_clear) seen[ivar(l)] = 0;
    to_clear.clear();
  }

  void backtrack(int lvl) {
    if (decision_level() <= lvl) return;
    for (size_t i = trail.size(); i > (size_t)trail_lim[lvl];) {
      --i;
      int v = ivar(trail[i]);
      polarity[v] = assigns[v];
      assigns[v] = -1;
      reason[v] = -1;
      heap.insert(v);
    }
    trail.resize(trail_lim[lvl]);
    trail_lim.resize(lvl);
    qhead = trail.size();
  }

  // Drops the worst half of the removable learnts: high LBD first, then low
  // activity. Glue clauses (LBD <= 2), binaries, and reasons stay.
  void reduce_db() {
    std::vector<ClauseRef> cand;
    {
      std::vector<ClauseRef> reasons;
      for (int l : trail) {
        ClauseRef r = reason[ivar(l)];
        if (r >= 0) reasons.push_back(r);
      }
      std::sort(reasons.begin(), reasons.end());
      for (ClauseRef r : learnts) {
        if (ca.deleted(r) || ca.size(r) <= 2 || ca.lbd(r) <= 2) continue;
        if (std::binary_search(reasons.begin(), reasons.end(), r)) continue;
        cand.push_back(r);
      }
    }
    std::sort(cand.begin(), cand.end(), [&](ClauseRef a, ClauseRef b) {
      if (ca.lbd(a) != ca.lbd(b)) return ca.lbd(a) > ca.lbd(b);
      if (ca.act(a) != ca.act(b)) return ca.act(a) < ca.act(b);
      return a < b;
    });
    for (size_t i = 0; i < cand.size() / 2; ++i) ca.mark_deleted(cand[i]);
    garbage_collect();
  }

  // Rebuilds the arena without deleted clauses, remapping watches, reasons,
  // and the learnt list.
  void garbage_collect() {
    Arena na;
    na.slots.reserve(ca.slots.size());
    std::vector<int> remap;
    for (ClauseRef r = 0; r < (int)ca.slots.size(); r += kHeader + ca.size(r)) {
      if (ca.deleted(r)) continue;
      remap.push_back(r);
      ClauseRef nr = na.slots.size();
      na.slots.insert(na.slots.end(), ca.slots.begin() + r,
                      ca.slots.begin() + r + kHeader + ca.size(r));
      remap.push_back(nr);
    }
    auto lookup = [&](ClauseRef r) {
      size_t lo = 0, hi = remap.size() / 2;
      while (lo < hi) {
        size_t mid = (lo + hi) / 2;
        if (remap[2 * mid] < r)
          lo = mid + 1;
        else
          hi = mid;
      }
      return remap[2 * lo + 1];
    };
    for (int v = 0; v < nvars; ++v)
      if (reason[v] >= 0) reason[v] = lookup(reason[v]);
    size_t j = 0;
    for (ClauseRef r : learnts)
      if (!ca.deleted(r)) learnts[j++] = lookup(r);
    learnts.resize(j);
    ca.slots = std::move(na.slots);
    for (auto& ws : watches) ws.clear();
    for (ClauseRef r = 0; r < (int)ca.slots.size(); r += kHeader + ca.size(r)) attach(r);
  }

  SatResult run(uint64_t seed, uint64_t conflict_limit) {
    SatResult res;
    // Seeded initial phases; everything after is deterministic.
    uint64_t x = seed * 0x9e3779b97f4a7c15ull + 0x853c49e6748fea9bull;
    for (int v = 0; v < nvars; ++v) {
      x ^= x << 13;
      x ^= x >> 7;
      x ^= x << 17;
      polarity[v] = x & 1;
    }

    if (unsat_at_load) {
      res.status = SatStatus::Unsat;
      return res;
    }

    uint64_t restart_count = 0;
    uint64_t restart_budget = 64 * luby(restart_count);
    uint64_t conflicts_at_restart = 0;
    uint64_t next_reduce = 4000;
    uint64_t reduce_count = 0;

    std::vector<int> learnt;
    for (;;) {
      ClauseRef confl = propagate();
      if (confl >= 0) {
        ++conflicts;
        if (decision_level() == 0) {
          res.status = SatStatus::Unsat;
          break;
        }
        if (conflict_limit && conflicts > conflict_limit) {
          res.status = SatStatus::Budget;
          break;
        }
        int bt = 0, lbd = 0;
        analyze(confl, learnt, bt, lbd);
        backtrack(bt);
        if (learnt.size() == 1) {
          enqueue(learnt[0], -1);
        } else {
          ClauseRef r = ca.alloc(learnt, true, lbd);
          ca.set_act(r, (float)cla_inc);
          learnts.push_back(r);
          attach(r);
          enqueue(learnt[0], r);
        }
        var_inc /= 0.95;
        cla_inc /= 0.999;
      } else {
        if (conflicts - conflicts_at_restart >= restart_budget) {
          conflicts_at_restart = conflicts;
          ++restart_count;
          restart_budget = 64 * luby(restart_count);
          backtrack(0);
        }
        if (conflicts >= next_reduce) {
          ++reduce_count;
          next_reduce = conflicts + 4000 + 1000 * reduce_count;
          reduce_db();
        }
        int next = -1;
        while (!heap.empty()) {
          int v = heap.pop();
          if (assigns[v] < 0) {
            next = v;
            break;
          }
        }
        if (next < 0) {
          res.status = SatStatus::Sat;
          res.model.assign(nvars + 1, 0);
          for (int v = 0; v < nvars; ++v) res.model[v + 1] = assigns[v] == 1 ? 1 : 0;
          break;
        }
        ++decisions;
        trail_lim.push_back(trail.size());
        enqueue((next << 1) | (polarity[next] ? 0 : 1), -1);
      }
    }
    res.conflicts = conflicts;
    res.decisions = decisions;
    res.propagations = propagations;
    return res;
  }
};

}  // namespace

SatResult sat_solve(const Cnf& cnf, uint64_t seed, uint64_t conflict_limit) {
  Solver s(cnf.num_vars);
  for (const auto& cl : cnf.clauses) {
    if (cl.empty()) {
      s.unsat_at_load = true;
      break;
    }
    if (!s.add_problem_clause(cl)) {
      s.unsat_at_load = true;
      break;
    }
  }
  return s.run(seed, conflict_limit);
}

bool model_satisfies(const Cnf& cnf, const std::vector<uint8_t>& model) {
  for (const auto& cl : cnf.clauses) {
    bool sat = false;
    for (int l : cl) {
      int v = l < 0 ? -l : l;
      if (v >= (int)model.size()) return false;
      if ((model[v] == 1) == (l > 0)) {
        sat = true;
        break;
      }
    }
    if (!sat) return false;
  }
  return true;
}

}  // namespace sqed
