#pragma once

#include <cstdint>
#include <unordered_map>

#include "sqed/expr.hpp"

namespace sqed {

// Variable environment for concrete evaluation. Values are stored masked to
// the width given at set time.
class Env {
 public:
  void set(const std::string& name, uint32_t width, uint64_t value) {
    vals_[name] = value & mask_width(width);
  }
  bool has(const std::string& name) const { return vals_.count(name) != 0; }
  uint64_t get(const std::string& name) const {
    auto it = vals_.find(name);
    if (it == vals_.end()) throw UnboundVar(name);
    return it->second;
  }
  const std::unordered_map<std::string, uint64_t>& values() const { return vals_; }

 private:
  std::unordered_map<std::string, uint64_t> vals_;
};

// Concrete semantics for one operator. Shared by constant folding and eval so
// the two cannot drift apart.
uint64_t apply_op_concrete(Op op, uint32_t width, const std::vector<uint64_t>& args,
                           const std::vector<uint32_t>& arg_widths, uint32_t hi, uint32_t lo);

uint64_t eval(Expr e, const Env& env);

// Evaluation cache shared across many eval calls against the same env.
// Invalidated by the caller when the env changes.
using EvalCache = std::unordered_map<NodeRef, uint64_t>;
uint64_t eval_cached(Expr e, const Env& env, EvalCache& cache);

// Rebuild `e` with every occurrence of a key node replaced by the mapped
// expression. Replacement widths must match the nodes they replace.
using NodeMap = std::unordered_map<NodeRef, Expr>;
Expr substitute(Expr e, const NodeMap& map);

// Convenience: replace variables by name.
Expr substitute_vars(Expr e, const std::unordered_map<std::string, Expr>& map);

}  // namespace sqed
