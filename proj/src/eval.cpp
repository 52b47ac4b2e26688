#include "sqed/eval.hpp"

#include <unordered_set>
#include <vector>

namespace sqed {

uint64_t apply_op_concrete(Op op, uint32_t width, const std::vector<uint64_t>& a,
                           const std::vector<uint32_t>& aw, uint32_t hi, uint32_t lo) {
  const uint64_t m = mask_width(width);
  switch (op) {
    case Op::Const:
    case Op::Var:
      throw BadParams("apply_op_concrete on leaf");
    case Op::Not: return ~a[0] & m;
    case Op::Neg: return (~a[0] + 1) & m;
    case Op::And: return a[0] & a[1];
    case Op::Or: return a[0] | a[1];
    case Op::Xor: return a[0] ^ a[1];
    case Op::Add: return (a[0] + a[1]) & m;
    case Op::Sub: return (a[0] - a[1]) & m;
    case Op::Mul: return (a[0] * a[1]) & m;
    case Op::Shl: return a[1] >= width ? 0 : (a[0] << a[1]) & m;
    case Op::LShr: return a[1] >= width ? 0 : a[0] >> a[1];
    case Op::Eq: return a[0] == a[1] ? 1 : 0;
    case Op::Ult: return a[0] < a[1] ? 1 : 0;
    case Op::Ite: return a[0] ? a[1] : a[2];
    case Op::Concat: return ((a[0] << aw[1]) | a[1]) & m;
    case Op::Extract: return (a[0] >> lo) & mask_width(hi - lo + 1);
  }
  throw BadParams("unknown op");
}

namespace {

uint64_t eval_node(NodeRef root, const Env& env, EvalCache& cache) {
  // Iterative post-order; combinational cones can nest deeply once composed.
  std::vector<NodeRef> stack{root};
  while (!stack.empty()) {
    NodeRef n = stack.back();
    if (cache.count(n)) {
      stack.pop_back();
      continue;
    }
    if (n->op == Op::Const) {
      cache[n] = n->cval;
      stack.pop_back();
      continue;
    }
    if (n->op == Op::Var) {
      cache[n] = env.get(n->name) & mask_width(n->width);
      stack.pop_back();
      continue;
    }
    bool ready = true;
    for (NodeRef c : n->args) {
      if (!cache.count(c)) {
        stack.push_back(c);
        ready = false;
      }
    }
    if (!ready) continue;
    std::vector<uint64_t> vals;
    std::vector<uint32_t> widths;
    vals.reserve(n->args.size());
    widths.reserve(n->args.size());
    for (NodeRef c : n->args) {
      vals.push_back(cache[c]);
      widths.push_back(c->width);
    }
    cache[n] = apply_op_concrete(n->op, n->width, vals, widths, n->hi, n->lo);
    stack.pop_back();
  }
  return cache[root];
}

}  // namespace

uint64_t eval(Expr e, const Env& env) {
  EvalCache cache;
  return eval_node(e.node(), env, cache);
}

uint64_t eval_cached(Expr e, const Env& env, EvalCache& cache) {
  return eval_node(e.node(), env, cache);
}

Expr substitute(Expr e, const NodeMap& map) {
  std::unordered_map<NodeRef, Expr> done;
  std::vector<NodeRef> stack{e.node()};
  while (!stack.empty()) {
    NodeRef n = stack.back();
    if (done.count(n)) {
      stack.pop_back();
      continue;
    }
    auto hit = map.find(n);
    if (hit != map.end()) {
      if (hit->second.width() != n->width) throw WidthMismatch("substitute replacement width");
      done.emplace(n, hit->second);
      stack.pop_back();
      continue;
    }
    if (n->op == Op::Const || n->op == Op::Var) {
      done.emplace(n, Expr(n));
      stack.pop_back();
      continue;
    }
    bool ready = true;
    for (NodeRef c : n->args) {
      if (!done.count(c)) {
        stack.push_back(c);
        ready = false;
      }
    }
    if (!ready) continue;
    bool changed = false;
    std::vector<Expr> args;
    args.reserve(n->args.size());
    for (NodeRef c : n->args) {
      Expr r = done.at(c);
      if (r.node() != c) changed = true;
      args.push_back(r);
    }
    Expr rebuilt(n);
    if (changed) {
      switch (n->op) {
        case Op::Extract: rebuilt = bv_extract(args[0], n->hi, n->lo); break;
        case Op::Concat: rebuilt = bv_concat(args[0], args[1]); break;
        case Op::Ite: rebuilt = bv_ite(args[0], args[1], args[2]); break;
        case Op::Not: rebuilt = bv_not(args[0]); break;
        case Op::Neg: rebuilt = bv_neg(args[0]); break;
        case Op::And: rebuilt = bv_and(args[0], args[1]); break;
        case Op::Or: rebuilt = bv_or(args[0], args[1]); break;
        case Op::Xor: rebuilt = bv_xor(args[0], args[1]); break;
        case Op::Add: rebuilt = bv_add(args[0], args[1]); break;
        case Op::Sub: rebuilt = bv_sub(args[0], args[1]); break;
        case Op::Mul: rebuilt = bv_mul(args[0], args[1]); break;
        case Op::Shl: rebuilt = bv_shl(args[0], args[1]); break;
        case Op::LShr: rebuilt = bv_lshr(args[0], args[1]); break;
        case Op::Eq: rebuilt = bv_eq(args[0], args[1]); break;
        case Op::Ult: rebuilt = bv_ult(args[0], args[1]); break;
        default: throw BadParams("substitute: unexpected op");
      }
    }
    done.emplace(n, rebuilt);
    stack.pop_back();
  }
  return done.at(e.node());
}

Expr substitute_vars(Expr e, const std::unordered_map<std::string, Expr>& map) {
  NodeMap nm;
  std::unordered_set<NodeRef> seen;
  std::vector<NodeRef> stack{e.node()};
  while (!stack.empty()) {
    NodeRef n = stack.back();
    stack.pop_back();
    if (!seen.insert(n).second) continue;
    if (n->op == Op::Var) {
      auto it = map.find(n->name);
      if (it != map.end()) nm.emplace(n, it->second);
    }
    for (NodeRef c : n->args) stack.push_back(c);
  }
  if (nm.empty()) return e;
  return substitute(e, nm);
}

}  // namespace sqed
