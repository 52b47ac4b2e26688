#include "sqed/bmc.hpp"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "sqed/bitblast.hpp"
#include "sqed/isa.hpp"
#include "sqed/sim.hpp"

namespace sqed {

const char* verdict_name(Verdict v) {
  switch (v) {
    case Verdict::Cex: return "Cex";
    case Verdict::NoCex: return "NoCex";
    case Verdict::Budget: return "Budget";
  }
  return "?";
}

namespace {

std::string timed(const std::string& name, int t) { return name + "@" + std::to_string(t); }

struct Unroller {
  const TransitionSystem& ts;
  // per step: rename map var -> timed var
  std::vector<std::unordered_map<std::string, Expr>> maps;
  // transition equalities, built once per step and reused across depths
  std::vector<std::vector<Expr>> trans;
  std::vector<std::vector<Expr>> assumes_at;

  explicit Unroller(const TransitionSystem& t) : ts(t) {}

  const std::unordered_map<std::string, Expr>& map_at(int t) {
    while ((int)maps.size() <= t) {
      int step = maps.size();
      std::unordered_map<std::string, Expr> m;
      for (const StateVar& sv : ts.state_vars)
        m.emplace(sv.name, bv_var(timed(sv.name, step), sv.width));
      for (const InputVar& iv : ts.inputs)
        m.emplace(iv.name, bv_var(timed(iv.name, step), iv.width));
      maps.push_back(std::move(m));
    }
    return maps[t];
  }

  Expr at(Expr e, int t) { return substitute_vars(e, map_at(t)); }

  const std::vector<Expr>& transition(int t) {
    while ((int)trans.size() <= t) {
      int step = trans.size();
      std::vector<Expr> eqs;
      const auto& now = map_at(step);
      const auto& nxt = map_at(step + 1);
      for (const StateVar& sv : ts.state_vars)
        eqs.push_back(bv_eq(nxt.at(sv.name), at(ts.next.at(sv.name), step)));
      (void)now;
      trans.push_back(std::move(eqs));
    }
    return trans[t];
  }

  const std::vector<Expr>& step_assumes(int t) {
    while ((int)assumes_at.size() <= t) {
      int step = assumes_at.size();
      std::vector<Expr> as;
      for (const Expr& e : ts.step_assumes) as.push_back(at(e, step));
      assumes_at.push_back(std::move(as));
    }
    return assumes_at[t];
  }
};

std::vector<Expr> step0_base(Unroller& un, const TransitionSystem& ts, const InitMode& mode) {
  std::vector<Expr> base;
  if (mode.kind == InitMode::ConcreteReset) {
    for (const StateVar& sv : ts.state_vars) {
      auto it = mode.reset.find(sv.name);
      if (it == mode.reset.end()) throw BadParams("reset assignment missing " + sv.name);
      base.push_back(bv_eq(un.map_at(0).at(sv.name), bv_const(it->second, sv.width)));
    }
  } else {
    for (const StateVar& sv : ts.state_vars)
      if (sv.init)
        base.push_back(bv_eq(un.map_at(0).at(sv.name), bv_const(*sv.init, sv.width)));
  }
  for (const Expr& e : ts.init_assumes) base.push_back(un.at(e, 0));
  return base;
}

std::vector<Expr> query_at_depth(Unroller& un, const TransitionSystem& ts,
                                 const std::vector<Expr>& base, int k) {
  std::vector<Expr> formulas = base;
  for (int t = 0; t < k; ++t)
    for (const Expr& e : un.transition(t)) formulas.push_back(e);
  for (int t = 0; t <= k; ++t)
    for (const Expr& e : un.step_assumes(t)) formulas.push_back(e);
  // Asserts hold strictly before the final step and some assert fails at it.
  for (int t = 0; t < k; ++t)
    for (const NamedAssert& na : ts.asserts) formulas.push_back(un.at(na.expr, t));
  std::vector<Expr> broken;
  for (const NamedAssert& na : ts.asserts) broken.push_back(bv_not(un.at(na.expr, k)));
  formulas.push_back(bv_or_many(broken));
  return formulas;
}

}  // namespace

CheckResult check(const TransitionSystem& ts, const InitMode& mode, const CheckOptions& opt) {
  auto t0 = std::chrono::steady_clock::now();
  CheckResult result;
  if (ts.asserts.empty()) throw BadParams("check: no asserts");

  Unroller un(ts);
  std::vector<Expr> base = step0_base(un, ts, mode);

  for (int k = 0; k <= opt.k_max; ++k) {
    std::vector<Expr> formulas = query_at_depth(un, ts, base, k);

    Blasted bl = bitblast(formulas);
    SatResult sat = opt.external_solver.empty()
                        ? sat_solve(bl.cnf, opt.seed, opt.conflict_limit)
                        : run_external_solver(bl.cnf, opt.external_solver);
    result.conflicts += sat.conflicts;

    if (sat.status == SatStatus::Budget) {
      result.verdict = Verdict::Budget;
      break;
    }
    if (sat.status == SatStatus::Unsat) continue;

    // Decode the witness.
    CounterExample cex;
    cex.depth = k;
    auto value_of = [&](const std::string& name, uint32_t width, int t) -> uint64_t {
      Expr tv = bv_var(timed(name, t), width);
      auto it = bl.var_map.find(tv.node());
      if (it == bl.var_map.end()) return 0;  // unconstrained, any value works
      uint64_t v = 0;
      for (uint32_t b = 0; b < width; ++b)
        if (sat.model[it->second[b]]) v |= 1ull << b;
      return v;
    };
    for (int t = 0; t <= k; ++t) {
      CexStep step;
      for (const StateVar& sv : ts.state_vars)
        step.state[sv.name] = value_of(sv.name, sv.width, t);
      for (const InputVar& iv : ts.inputs)
        step.inputs[iv.name] = value_of(iv.name, iv.width, t);
      cex.steps.push_back(std::move(step));
    }
    cex.initial_state = cex.steps[0].state;

    // Name the assert that broke at the final step.
    Env env;
    for (const auto& [n, v] : cex.steps[k].state) {
      const StateVar* sv = ts.find_state(n);
      env.set(n, sv->width, v);
    }
    for (const auto& [n, v] : cex.steps[k].inputs) {
      const InputVar* iv = ts.find_input(n);
      env.set(n, iv->width, v);
    }
    for (const NamedAssert& na : ts.asserts) {
      if (eval(na.expr, env) == 0) {
        cex.failing_assert = na.name;
        break;
      }
    }

    result.verdict = Verdict::Cex;
    result.cex = std::move(cex);
    break;
  }

  result.ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - t0)
                  .count();
  return result;
}

Cnf unroll_to_cnf(const TransitionSystem& ts, const InitMode& mode, int k) {
  if (ts.asserts.empty()) throw BadParams("unroll_to_cnf: no asserts");
  if (k < 0) throw BadParams("unroll_to_cnf: negative depth");
  Unroller un(ts);
  std::vector<Expr> base = step0_base(un, ts, mode);
  return bitblast(query_at_depth(un, ts, base, k)).cnf;
}

ReplayResult replay(const TransitionSystem& ts, const InitMode& mode,
                    const CounterExample& cex) {
  auto spurious = [](int step, const std::string& detail) {
    return ReplayResult{false, step, detail};
  };
  if ((int)cex.steps.size() != cex.depth + 1) return spurious(-1, "step count mismatch");

  // Step-0 obligations.
  for (const StateVar& sv : ts.state_vars) {
    auto it = cex.initial_state.find(sv.name);
    if (it == cex.initial_state.end()) return spurious(0, "initial state missing " + sv.name);
    if (mode.kind == InitMode::ConcreteReset) {
      auto r = mode.reset.find(sv.name);
      if (r == mode.reset.end() || r->second != it->second)
        return spurious(0, "initial state of " + sv.name + " differs from reset");
    } else if (sv.init && *sv.init != it->second) {
      return spurious(0, "initialized state " + sv.name + " not at its init value");
    }
  }

  Simulator sim(ts, {cex.initial_state.begin(), cex.initial_state.end()});
  Env init_env = sim.state();
  for (const Expr& e : ts.init_assumes)
    if (eval(e, init_env) != 1) return spurious(0, "init assume fails");

  for (int t = 0; t <= cex.depth; ++t) {
    const CexStep& st = cex.steps[t];
    // State recorded at t must match simulation.
    for (const StateVar& sv : ts.state_vars) {
      auto it = st.state.find(sv.name);
      if (it == st.state.end()) return spurious(t, "state missing " + sv.name);
      if (sim.get(sv.name) != it->second) return spurious(t, "signal " + sv.name + " diverges");
    }
    Env inputs;
    for (const InputVar& iv : ts.inputs) {
      auto it = st.inputs.find(iv.name);
      inputs.set(iv.name, iv.width, it == st.inputs.end() ? 0 : it->second);
    }
    Env env = sim.full_env(inputs);
    for (const Expr& e : ts.step_assumes)
      if (eval(e, env) != 1) return spurious(t, "step assume fails");
    for (const NamedAssert& na : ts.asserts) {
      uint64_t v = eval(na.expr, env);
      if (t < cex.depth && v != 1)
        return spurious(t, "assert " + na.name + " fails before final step");
      if (t == cex.depth && na.name == cex.failing_assert && v != 0)
        return spurious(t, "assert " + na.name + " does not fail at final step");
    }
    if (t < cex.depth) sim.step(inputs);
  }
  if (cex.failing_assert.empty()) return spurious(cex.depth, "no failing assert named");
  return ReplayResult{true, -1, ""};
}

DecodedTrace decode_trace(const CounterExample& cex, const TransitionSystem& ts,
                          const TraceDecode& dec) {
  DecodedTrace out;
  out.cycles = cex.depth + 1;
  for (int t = 0; t <= cex.depth; ++t) {
    Env env;
    for (const auto& [n, v] : cex.steps[t].state) {
      const StateVar* sv = ts.find_state(n);
      if (sv) env.set(n, sv->width, v);
    }
    for (const auto& [n, v] : cex.steps[t].inputs) {
      const InputVar* iv = ts.find_input(n);
      if (iv) env.set(n, iv->width, v);
    }
    std::ostringstream line;
    line << "cycle " << t << ":";
    bool fire = eval(dec.fetch_fire, env) == 1;
    bool valid = eval(dec.fetch_valid, env) == 1;
    if (fire && valid) {
      uint16_t enc = eval(dec.fetch_instr, env);
      bool orig = eval(dec.fetch_original, env) == 1;
      ++out.instructions;
      line << " fetch " << (orig ? "original " : "duplicate ") << disassemble(enc);
    } else if (fire) {
      line << " fetch bubble";
    }
    int commits = 0;
    for (const Expr& cv : dec.commit_valids)
      if (eval(cv, env) == 1) ++commits;
    if (commits) line << " commit x" << commits;
    if (eval(dec.sif_complete, env) == 1) {
      if (out.t_c < 0) {
        out.t_c = t;
        line << " [in-flight drained]";
      }
    }
    out.lines.push_back(line.str());
  }
  return out;
}

SatResult run_external_solver(const Cnf& cnf, const std::string& path) {
  char tmpl[] = "/tmp/sqed_dimacs_XXXXXX";
  int fd = mkstemp(tmpl);
  if (fd < 0) throw IoError("mkstemp failed");
  {
    std::string text = to_dimacs(cnf);
    FILE* f = fdopen(fd, "w");
    fwrite(text.data(), 1, text.size(), f);
    fclose(f);
  }
  std::string cmd = path + " " + tmpl + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) {
    std::remove(tmpl);
    throw IoError("cannot run external solver: " + path);
  }
  std::string output;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) output.append(buf, n);
  pclose(pipe);
  std::remove(tmpl);

  SatResult res;
  res.status = SatStatus::Budget;
  std::istringstream is(output);
  std::string line;
  std::vector<uint8_t> model(cnf.num_vars + 1, 0);
  bool have_model = false;
  while (std::getline(is, line)) {
    if (line.rfind("s ", 0) == 0) {
      if (line.find("UNSATISFIABLE") != std::string::npos)
        res.status = SatStatus::Unsat;
      else if (line.find("SATISFIABLE") != std::string::npos)
        res.status = SatStatus::Sat;
    } else if (line.rfind("v ", 0) == 0) {
      std::istringstream ls(line.substr(2));
      long lit;
      while (ls >> lit) {
        if (lit == 0) continue;
        long v = lit < 0 ? -lit : lit;
        if (v <= cnf.num_vars) model[v] = lit > 0 ? 1 : 0;
      }
      have_model = true;
    }
  }
  if (res.status == SatStatus::Sat) {
    if (!have_model) throw IoError("external solver reported SAT without a model");
    res.model = std::move(model);
    if (!model_satisfies(cnf, res.model))
      throw IoError("external solver model does not satisfy the formula");
  }
  if (res.status == SatStatus::Budget && output.empty())
    throw IoError("external solver produced no output");
  return res;
}

}  // namespace sqed
