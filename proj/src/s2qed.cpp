#include "sqed/s2qed.hpp"

#include <algorithm>

#include "core_common.hpp"
#include "sqed/errors.hpp"
#include "sqed/eval.hpp"

namespace sqed {

namespace {

using detail::decode_instr;
using detail::op_is;
using detail::uses_rs2;

std::vector<uint32_t> normalize_mapping(std::vector<uint32_t> m, uint32_t n) {
  if (m.empty()) {
    m.resize(n);
    for (uint32_t i = 0; i < n; ++i) m[i] = i;
    return m;
  }
  if (m.size() != n) throw BadMapping("mapping must cover all " + std::to_string(n) + " registers");
  std::vector<bool> seen(n, false);
  for (uint32_t t : m) {
    if (t >= n || seen[t]) throw BadMapping("mapping is not a bijection");
    seen[t] = true;
  }
  return m;
}

Expr map_field(Expr f, const std::vector<uint32_t>& m) {
  Expr out = bv_const(m.back(), 3);
  for (size_t i = m.size() - 1; i-- > 0;)
    out = bv_ite(bv_eq_const(f, i), bv_const(m[i], 3), out);
  return out;
}

// The IUV with register fields pushed through the mapping; NOP stays NOP and
// immediate forms keep their low six bits.
Expr remap_instr(Expr word, const std::vector<uint32_t>& m) {
  Expr op = bv_extract(word, 15, 12);
  Expr rd = bv_extract(word, 11, 9);
  Expr rs1 = bv_extract(word, 8, 6);
  Expr rs2 = bv_extract(word, 2, 0);
  Expr low6 = bv_extract(word, 5, 0);
  Expr mapped_low = bv_ite(uses_rs2(op), bv_concat(bv_const(0, 3), map_field(rs2, m)), low6);
  Expr mapped =
      bv_concat(bv_concat(op, map_field(rd, m)), bv_concat(map_field(rs1, m), mapped_low));
  return bv_ite(op_is(op, Opcode::NOP), bv_const(0, 16), mapped);
}

// Rebind a pre-compose core expression into the composed system.
struct InstanceEnv {
  std::unordered_map<std::string, Expr> vars;
  Expr operator()(Expr e) const { return substitute_vars(e, vars); }
};

InstanceEnv instance_env(const TransitionSystem& composed, const Core& inst,
                         const std::string& prefix,
                         const std::vector<std::pair<std::string, Expr>>& inputs) {
  InstanceEnv env;
  for (const auto& sv : inst.ts.state_vars) env.vars[sv.name] = composed.state(prefix + sv.name);
  for (const auto& [name, e] : inputs) env.vars[name] = e;
  return env;
}

}  // namespace

S2qedSystem build_s2qed(const S2qedConfig& cfg) {
  Core cpu1 = build_core_ioc5(cfg.params);
  Core cpu2 = build_core_ioc5(cfg.params);
  if (cfg.trojan) {
    cpu1 = inject(cpu1, *cfg.trojan).core;
    cpu2 = inject(cpu2, *cfg.trojan).core;
  }
  if (cfg.cpu2_probe) cpu2 = inject_always(cpu2, BugEffect::OpcodeCorrupt).core;

  uint32_t n = cfg.params.num_regs;
  auto mapping = normalize_mapping(cfg.mapping, n);

  S2qedSystem sys;
  sys.num_regs = n;
  sys.mapping = mapping;

  TransitionSystem base;
  Expr iuv = base.add_input("iuv", 16);
  Expr started = base.add_state("s2.started", 1, 0);
  base.set_next("s2.started", bv_const(1, 1));
  Expr at_start = bv_not(started);

  auto fetch_inputs = [&](const Core& c, Expr instr) {
    std::vector<std::pair<std::string, Expr>> in;
    in.emplace_back(c.in_instr, bv_ite(at_start, instr, bv_const(0, 16)));
    in.emplace_back(c.in_valid, bv_const(1, 1));
    in.emplace_back(c.in_dup_mem, bv_const(0, 1));
    in.emplace_back(c.in_test_enable, bv_const(0, 1));
    in.emplace_back(c.in_test_addr, bv_const(0, c.reg_bits()));
    in.emplace_back(c.in_test_data, bv_const(0, c.params.width));
    return in;
  };
  auto conn = [](const std::vector<std::pair<std::string, Expr>>& in) {
    return std::unordered_map<std::string, Expr>(in.begin(), in.end());
  };

  auto in1 = fetch_inputs(cpu1, iuv);
  auto in2 = fetch_inputs(cpu2, remap_instr(iuv, mapping));
  TransitionSystem ts = compose(base, cpu1.ts, conn(in1), "cpu1.");
  ts = compose(ts, cpu2.ts, conn(in2), "cpu2.");

  // Pipelines start concretely empty; registers and memory stay symbolic,
  // related only by the mapped-consistency assumptions. Watcher state, if
  // any, stays free in both instances.
  auto pin_non_arch = [&](const Core& c, const std::string& prefix) {
    std::vector<std::string> arch;
    for (uint32_t i = 0; i < n; ++i) arch.push_back(c.reg(i).var_name());
    for (uint32_t i = 0; i < c.params.mem_words; ++i) arch.push_back(c.mem(i).var_name());
    auto reset = c.ts.reset_assignment();
    for (const auto& sv : c.ts.state_vars) {
      if (sv.name.rfind("inj.", 0) == 0) continue;
      if (std::find(arch.begin(), arch.end(), sv.name) != arch.end()) continue;
      ts.init_assumes.push_back(bv_eq_const(ts.state(prefix + sv.name), reset.at(sv.name)));
    }
  };
  pin_non_arch(cpu1, "cpu1.");
  pin_non_arch(cpu2, "cpu2.");

  for (uint32_t i = 0; i < n; ++i)
    ts.init_assumes.push_back(bv_eq(ts.state("cpu1." + cpu1.reg(i).var_name()),
                                    ts.state("cpu2." + cpu2.reg(mapping[i]).var_name())));
  for (uint32_t i = 0; i < cfg.params.mem_words; ++i)
    ts.init_assumes.push_back(bv_eq(ts.state("cpu1." + cpu1.mem(i).var_name()),
                                    ts.state("cpu2." + cpu2.mem(i).var_name())));

  // The instruction under verification decodes, and its register fields fall
  // inside the mapped range.
  {
    auto dc = decode_instr(iuv, cfg.params.width);
    std::vector<Expr> ok;
    ok.push_back(dc.valid);
    if (n < 8) {
      Expr nb = bv_const(n, 3);
      ok.push_back(bv_implies(bv_not(op_is(dc.op, Opcode::NOP)),
                              bv_and(bv_ult(dc.rd, nb), bv_ult(dc.rs1, nb))));
      ok.push_back(bv_implies(uses_rs2(dc.op), bv_ult(dc.rs2, nb)));
    }
    ts.step_assumes.push_back(bv_implies(at_start, bv_and_many(ok)));
  }

  // Compare the register files the cycle after CPU-1 commits the IUV, when
  // both writebacks have landed.
  InstanceEnv env1 = instance_env(ts, cpu1, "cpu1.", in1);
  std::vector<Expr> commit_valids;
  for (const auto& p : cpu1.commits) commit_valids.push_back(env1(p.valid));
  Expr pend = ts.add_state("s2.pend", 1, 0);
  ts.set_next("s2.pend", bv_or_many(commit_valids));

  std::vector<Expr> pairs;
  for (uint32_t i = 0; i < n; ++i)
    pairs.push_back(bv_eq(ts.state("cpu1." + cpu1.reg(i).var_name()),
                          ts.state("cpu2." + cpu2.reg(mapping[i]).var_name())));
  sys.property_name = "s2qed_consistency";
  ts.asserts.push_back({sys.property_name, bv_implies(pend, bv_and_many(pairs))});

  sys.ts = std::move(ts);
  return sys;
}

CheckResult s2qed_check(const S2qedSystem& sys, int k_max, const CheckOptions& opt) {
  CheckOptions o = opt;
  o.k_max = k_max;
  return check(sys.ts, InitMode::symbolic(), o);
}

}  // namespace sqed
