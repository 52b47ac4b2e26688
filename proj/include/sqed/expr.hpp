#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sqed/errors.hpp"

namespace sqed {

// Width-typed bit-vector expressions. Nodes are interned in a thread-local
// arena, so structural equality is pointer equality on the same thread.
// Widths are 1..64; words hold values in the low `width` bits.

enum class Op : uint8_t {
  Const,
  Var,
  Not,
  Neg,
  And,
  Or,
  Xor,
  Add,
  Sub,
  Mul,
  Shl,
  LShr,
  Eq,
  Ult,
  Ite,
  Concat,
  Extract,
};

const char* op_name(Op op);

constexpr uint32_t kMaxWidth = 64;

inline uint64_t mask_width(uint32_t width) {
  return width >= 64 ? ~0ull : ((1ull << width) - 1);
}

class Node;
using NodeRef = const Node*;

class Expr {
 public:
  Expr() : n_(nullptr) {}
  explicit Expr(NodeRef n) : n_(n) {}

  bool valid() const { return n_ != nullptr; }
  NodeRef node() const { return n_; }

  Op op() const;
  uint32_t width() const;
  size_t num_args() const;
  Expr arg(size_t i) const;

  bool is_const() const;
  uint64_t const_value() const;  // Const only
  const std::string& var_name() const;  // Var only
  uint32_t extract_hi() const;  // Extract only
  uint32_t extract_lo() const;  // Extract only

  bool operator==(const Expr& o) const { return n_ == o.n_; }
  bool operator!=(const Expr& o) const { return n_ != o.n_; }

 private:
  NodeRef n_;
};

class Node {
 public:
  Op op;
  uint32_t width;
  uint64_t cval = 0;        // Const payload
  uint32_t hi = 0, lo = 0;  // Extract payload
  std::string name;         // Var payload
  std::vector<NodeRef> args;
  uint64_t id = 0;  // creation order within the owning arena
  size_t hash = 0;
};

// Primary constructors. All of them fold constants.
Expr bv_const(uint64_t value, uint32_t width);
Expr bv_var(const std::string& name, uint32_t width);
Expr bv_not(Expr a);
Expr bv_neg(Expr a);
Expr bv_and(Expr a, Expr b);
Expr bv_or(Expr a, Expr b);
Expr bv_xor(Expr a, Expr b);
Expr bv_add(Expr a, Expr b);
Expr bv_sub(Expr a, Expr b);
Expr bv_mul(Expr a, Expr b);
Expr bv_shl(Expr a, Expr b);
Expr bv_lshr(Expr a, Expr b);
Expr bv_eq(Expr a, Expr b);
Expr bv_ult(Expr a, Expr b);
Expr bv_ite(Expr c, Expr t, Expr e);
Expr bv_concat(Expr hi, Expr lo);
Expr bv_extract(Expr a, uint32_t hi, uint32_t lo);

// Generic constructor for the payload-free kinds. Const/Var/Extract need
// their dedicated constructors.
Expr mk_node(Op op, const std::vector<Expr>& args, uint32_t width);

// Common derived forms.
Expr bv_ne(Expr a, Expr b);
Expr bv_implies(Expr a, Expr b);          // width-1 operands
Expr bv_and_many(const std::vector<Expr>& xs);  // empty -> const 1
Expr bv_or_many(const std::vector<Expr>& xs);   // empty -> const 0
Expr bv_eq_const(Expr a, uint64_t v);
Expr bv_zext(Expr a, uint32_t width);
Expr bv_sext(Expr a, uint32_t width);
Expr bv_bool(bool b);

// Number of distinct nodes reachable from `e`.
size_t expr_size(Expr e);

// Deterministic prefix rendering, e.g. (add (var a 8) (const 5 8)).
std::string expr_to_string(Expr e);

// Thread-local arena control. Clearing invalidates every Expr built on the
// calling thread since the previous clear; callers only do this between
// independent jobs.
size_t arena_node_count();
void arena_clear();

}  // namespace sqed
