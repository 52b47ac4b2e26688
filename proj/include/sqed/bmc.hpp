#pragma once

#include <map>
#include <optional>
#include <string>

#include "sqed/solver.hpp"
#include "sqed/ts.hpp"

namespace sqed {

// SymbolicStart leaves every state var without a declared init free at step
// 0; ConcreteReset pins the full state to `reset` (typically
// ts.reset_assignment(), possibly edited).
struct InitMode {
  enum Kind { SymbolicStart, ConcreteReset } kind = SymbolicStart;
  std::map<std::string, uint64_t> reset;

  static InitMode symbolic() { return {SymbolicStart, {}}; }
  static InitMode concrete(const TransitionSystem& ts) {
    return {ConcreteReset, ts.reset_assignment()};
  }
};

enum class Verdict { Cex, NoCex, Budget };
const char* verdict_name(Verdict v);

struct CexStep {
  std::map<std::string, uint64_t> state;
  std::map<std::string, uint64_t> inputs;
};

struct CounterExample {
  int depth = 0;
  std::map<std::string, uint64_t> initial_state;
  std::vector<CexStep> steps;  // steps[0..depth]
  std::string failing_assert;
  std::vector<std::string> decoded;
};

struct CheckOptions {
  int k_max = 10;
  uint64_t seed = 0;
  uint64_t conflict_limit = 0;     // per solver call; 0 = unlimited
  std::string external_solver;     // path to a DIMACS solver binary, optional
};

struct CheckResult {
  Verdict verdict = Verdict::NoCex;
  std::optional<CounterExample> cex;
  uint64_t conflicts = 0;  // summed over all depths
  uint64_t ms = 0;
};

// Bounded search for a minimal-depth assertion failure: depths are tried in
// increasing order and asserts are pinned true at every step before the
// final one, so a returned trace fails first at its last step.
CheckResult check(const TransitionSystem& ts, const InitMode& mode, const CheckOptions& opt);

struct ReplayResult {
  bool confirmed = false;
  int step = -1;
  std::string detail;
};

// Concrete re-execution of a counterexample against the transition relation,
// assumptions and assert schedule. Any disagreement is reported as spurious.
ReplayResult replay(const TransitionSystem& ts, const InitMode& mode, const CounterExample& cex);

// Signals a decoder needs to narrate a trace of an instruction-fed design.
struct TraceDecode {
  Expr fetch_fire;      // width 1, instruction accepted this cycle
  Expr fetch_instr;     // width 16, the accepted encoding
  Expr fetch_original;  // width 1
  Expr fetch_valid;     // width 1, 0 means a pipeline bubble was injected
  Expr sif_complete;    // width 1
  std::vector<Expr> commit_valids;  // one per commit port
};

struct DecodedTrace {
  std::vector<std::string> lines;  // one per step
  int instructions = 0;            // valid accepted fetches
  int cycles = 0;                  // depth + 1
  int t_c = -1;                    // first step with sif_complete, -1 if none
};

DecodedTrace decode_trace(const CounterExample& cex, const TransitionSystem& ts,
                          const TraceDecode& dec);

// Runs `path` on the DIMACS form of `cnf` and parses its s/v output lines.
SatResult run_external_solver(const Cnf& cnf, const std::string& path);

// The depth-k query of `check` (asserts pinned before the final step, some
// assert negated at it) as plain CNF, for external debugging.
Cnf unroll_to_cnf(const TransitionSystem& ts, const InitMode& mode, int k);

}  // namespace sqed
