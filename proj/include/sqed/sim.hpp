#pragma once

#include <map>

#include "sqed/ts.hpp"

namespace sqed {

// Cycle-accurate concrete execution of a transition system. Assumes are not
// enforced here; callers that care check them against full_env().
class Simulator {
 public:
  // Missing entries of `init` fall back to the declared init value, else 0.
  explicit Simulator(const TransitionSystem& ts,
                     const std::map<std::string, uint64_t>& init = {});

  uint64_t get(const std::string& state_name) const { return state_.get(state_name); }
  const Env& state() const { return state_; }

  // State plus the given inputs, for evaluating combinational signals.
  Env full_env(const Env& inputs) const;
  uint64_t peek(Expr signal, const Env& inputs) const;

  void step(const Env& inputs);
  uint64_t cycle() const { return cycle_; }

 private:
  const TransitionSystem& ts_;
  Env state_;
  uint64_t cycle_ = 0;
};

// True iff every expression evaluates to 1 under env.
bool all_hold(const std::vector<Expr>& exprs, const Env& env);

}  // namespace sqed
