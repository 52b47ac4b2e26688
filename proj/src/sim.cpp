#include "sqed/sim.hpp"

namespace sqed {

Simulator::Simulator(const TransitionSystem& ts, const std::map<std::string, uint64_t>& init)
    : ts_(ts) {
  for (const StateVar& sv : ts.state_vars) {
    auto it = init.find(sv.name);
    uint64_t v = it != init.end() ? it->second : sv.init.value_or(0);
    state_.set(sv.name, sv.width, v);
  }
}

Env Simulator::full_env(const Env& inputs) const {
  Env env = state_;
  for (const InputVar& iv : ts_.inputs) {
    if (inputs.has(iv.name))
      env.set(iv.name, iv.width, inputs.get(iv.name));
    else
      env.set(iv.name, iv.width, 0);
  }
  return env;
}

uint64_t Simulator::peek(Expr signal, const Env& inputs) const {
  return eval(signal, full_env(inputs));
}

void Simulator::step(const Env& inputs) {
  Env env = full_env(inputs);
  EvalCache cache;
  Env next_state;
  for (const StateVar& sv : ts_.state_vars) {
    Expr nx = ts_.next.at(sv.name);
    next_state.set(sv.name, sv.width, eval_cached(nx, env, cache));
  }
  state_ = next_state;
  ++cycle_;
}

bool all_hold(const std::vector<Expr>& exprs, const Env& env) {
  for (const Expr& e : exprs)
    if (eval(e, env) != 1) return false;
  return true;
}

}  // namespace sqed
