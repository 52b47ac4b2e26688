#pragma once

#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "sqed/eval.hpp"
#include "sqed/expr.hpp"

namespace sqed {

// init == nullopt marks state that bounded checks may leave symbolic at step
// 0; a concrete init pins the variable in every mode. Reset assignments use
// the init value when present, otherwise 0.
struct StateVar {
  std::string name;
  uint32_t width = 1;
  std::optional<uint64_t> init;
};

struct InputVar {
  std::string name;
  uint32_t width = 1;
};

struct NamedAssert {
  std::string name;
  Expr expr;
};

struct TransitionSystem {
  std::vector<StateVar> state_vars;
  std::vector<InputVar> inputs;
  std::unordered_map<std::string, Expr> next;
  std::vector<Expr> init_assumes;  // over state vars, hold at step 0
  std::vector<Expr> step_assumes;  // hold at every step
  std::vector<NamedAssert> asserts;

  Expr add_state(const std::string& name, uint32_t width,
                 std::optional<uint64_t> init = std::nullopt);
  Expr add_input(const std::string& name, uint32_t width);
  void set_next(const std::string& name, Expr e);

  Expr state(const std::string& name) const;  // var expr for a declared state
  Expr input(const std::string& name) const;
  const StateVar* find_state(const std::string& name) const;
  const InputVar* find_input(const std::string& name) const;
  bool has_var(const std::string& name) const;

  // Concrete step-0 assignment: declared init where present, else zero.
  std::map<std::string, uint64_t> reset_assignment() const;
};

// Structural well-formedness: total next map, declared-only references with
// matching widths, width-1 assumes and asserts. Empty result means valid.
std::vector<std::string> validate_ts(const TransitionSystem& ts);

// Graft `fragment` onto `base`. Fragment state vars (and assert names) are
// renamed with `prefix`; every fragment input must be wired by `connections`
// to an expression over the base system. Fragment assumes and asserts are
// carried over.
TransitionSystem compose(const TransitionSystem& base, const TransitionSystem& fragment,
                         const std::unordered_map<std::string, Expr>& connections,
                         const std::string& prefix);

// Deterministic one-line-per-item textual form.
std::string ts_dump(const TransitionSystem& ts);

// All variable names referenced by the expression.
std::vector<std::string> expr_support(Expr e);

}  // namespace sqed
