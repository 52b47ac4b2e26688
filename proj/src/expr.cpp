#include "sqed/expr.hpp"

#include <memory>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "sqed/eval.hpp"

namespace sqed {

const char* op_name(Op op) {
  switch (op) {
    case Op::Const: return "const";
    case Op::Var: return "var";
    case Op::Not: return "not";
    case Op::Neg: return "neg";
    case Op::And: return "and";
    case Op::Or: return "or";
    case Op::Xor: return "xor";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Shl: return "shl";
    case Op::LShr: return "lshr";
    case Op::Eq: return "eq";
    case Op::Ult: return "ult";
    case Op::Ite: return "ite";
    case Op::Concat: return "concat";
    case Op::Extract: return "extract";
  }
  return "?";
}

Op Expr::op() const { return n_->op; }
uint32_t Expr::width() const { return n_->width; }
size_t Expr::num_args() const { return n_->args.size(); }
Expr Expr::arg(size_t i) const { return Expr(n_->args[i]); }
bool Expr::is_const() const { return n_->op == Op::Const; }
uint64_t Expr::const_value() const { return n_->cval; }
const std::string& Expr::var_name() const { return n_->name; }
uint32_t Expr::extract_hi() const { return n_->hi; }
uint32_t Expr::extract_lo() const { return n_->lo; }

namespace {

size_t node_hash(const Node& n) {
  size_t h = static_cast<size_t>(n.op) * 0x9e3779b97f4a7c15ull + n.width;
  h = h * 0x100000001b3ull ^ n.cval;
  h = h * 0x100000001b3ull ^ (static_cast<size_t>(n.hi) << 8 | n.lo);
  h = h * 0x100000001b3ull ^ std::hash<std::string>{}(n.name);
  for (NodeRef a : n.args) h = h * 0x100000001b3ull ^ reinterpret_cast<size_t>(a);
  return h;
}

bool node_equal(const Node& a, const Node& b) {
  return a.op == b.op && a.width == b.width && a.cval == b.cval && a.hi == b.hi &&
         a.lo == b.lo && a.name == b.name && a.args == b.args;
}

struct RefHash {
  size_t operator()(NodeRef n) const { return n->hash; }
};
struct RefEq {
  bool operator()(NodeRef a, NodeRef b) const { return node_equal(*a, *b); }
};

struct Arena {
  std::vector<std::unique_ptr<Node>> nodes;
  std::unordered_set<NodeRef, RefHash, RefEq> table;
  uint64_t next_id = 0;

  NodeRef intern(Node&& probe) {
    probe.hash = node_hash(probe);
    auto it = table.find(&probe);
    if (it != table.end()) return *it;
    auto owned = std::make_unique<Node>(std::move(probe));
    owned->id = next_id++;
    NodeRef ref = owned.get();
    nodes.push_back(std::move(owned));
    table.insert(ref);
    return ref;
  }
};

Arena& arena() {
  thread_local Arena a;
  return a;
}

Expr intern(Node&& n) { return Expr(arena().intern(std::move(n))); }

void check_width(uint32_t width, const char* what) {
  if (width < 1 || width > kMaxWidth)
    throw WidthMismatch(std::string(what) + " width " + std::to_string(width));
}

uint64_t const_of(Expr e) { return e.const_value(); }

bool all_const(const std::vector<Expr>& args) {
  for (const Expr& a : args)
    if (!a.is_const()) return false;
  return true;
}

Expr fold(Op op, const std::vector<Expr>& args, uint32_t width, uint32_t hi = 0,
          uint32_t lo = 0) {
  std::vector<uint64_t> vals;
  vals.reserve(args.size());
  for (const Expr& a : args) vals.push_back(const_of(a));
  std::vector<uint32_t> widths;
  for (const Expr& a : args) widths.push_back(a.width());
  return bv_const(apply_op_concrete(op, width, vals, widths, hi, lo), width);
}

Expr make(Op op, std::vector<Expr> args, uint32_t width, uint32_t hi = 0, uint32_t lo = 0) {
  if (all_const(args) && op != Op::Var) return fold(op, args, width, hi, lo);
  Node n;
  n.op = op;
  n.width = width;
  n.hi = hi;
  n.lo = lo;
  n.args.reserve(args.size());
  for (const Expr& a : args) n.args.push_back(a.node());
  return intern(std::move(n));
}

void require_same(Expr a, Expr b, const char* what) {
  if (a.width() != b.width())
    throw WidthMismatch(std::string(what) + ": " + std::to_string(a.width()) + " vs " +
                        std::to_string(b.width()));
}

bool is_const_val(Expr e, uint64_t v) { return e.is_const() && e.const_value() == v; }
bool is_ones(Expr e) { return e.is_const() && e.const_value() == mask_width(e.width()); }

}  // namespace

Expr bv_const(uint64_t value, uint32_t width) {
  check_width(width, "const");
  Node n;
  n.op = Op::Const;
  n.width = width;
  n.cval = value & mask_width(width);
  return intern(std::move(n));
}

Expr bv_var(const std::string& name, uint32_t width) {
  check_width(width, "var");
  if (name.empty()) throw BadParams("variable name empty");
  Node n;
  n.op = Op::Var;
  n.width = width;
  n.name = name;
  return intern(std::move(n));
}

Expr bv_not(Expr a) {
  if (a.op() == Op::Not) return a.arg(0);
  return make(Op::Not, {a}, a.width());
}

Expr bv_neg(Expr a) { return make(Op::Neg, {a}, a.width()); }

Expr bv_and(Expr a, Expr b) {
  require_same(a, b, "and");
  if (a == b) return a;
  if (is_const_val(a, 0) || is_const_val(b, 0)) return bv_const(0, a.width());
  if (is_ones(a)) return b;
  if (is_ones(b)) return a;
  return make(Op::And, {a, b}, a.width());
}

Expr bv_or(Expr a, Expr b) {
  require_same(a, b, "or");
  if (a == b) return a;
  if (is_ones(a) || is_ones(b)) return bv_const(mask_width(a.width()), a.width());
  if (is_const_val(a, 0)) return b;
  if (is_const_val(b, 0)) return a;
  return make(Op::Or, {a, b}, a.width());
}

Expr bv_xor(Expr a, Expr b) {
  require_same(a, b, "xor");
  if (a == b) return bv_const(0, a.width());
  if (is_const_val(a, 0)) return b;
  if (is_const_val(b, 0)) return a;
  return make(Op::Xor, {a, b}, a.width());
}

Expr bv_add(Expr a, Expr b) {
  require_same(a, b, "add");
  if (is_const_val(a, 0)) return b;
  if (is_const_val(b, 0)) return a;
  return make(Op::Add, {a, b}, a.width());
}

Expr bv_sub(Expr a, Expr b) {
  require_same(a, b, "sub");
  if (a == b) return bv_const(0, a.width());
  if (is_const_val(b, 0)) return a;
  return make(Op::Sub, {a, b}, a.width());
}

Expr bv_mul(Expr a, Expr b) {
  require_same(a, b, "mul");
  if (is_const_val(a, 0) || is_const_val(b, 0)) return bv_const(0, a.width());
  if (is_const_val(a, 1)) return b;
  if (is_const_val(b, 1)) return a;
  return make(Op::Mul, {a, b}, a.width());
}

Expr bv_shl(Expr a, Expr b) {
  require_same(a, b, "shl");
  if (is_const_val(b, 0)) return a;
  return make(Op::Shl, {a, b}, a.width());
}

Expr bv_lshr(Expr a, Expr b) {
  require_same(a, b, "lshr");
  if (is_const_val(b, 0)) return a;
  return make(Op::LShr, {a, b}, a.width());
}

Expr bv_eq(Expr a, Expr b) {
  require_same(a, b, "eq");
  if (a == b) return bv_const(1, 1);
  return make(Op::Eq, {a, b}, 1);
}

Expr bv_ult(Expr a, Expr b) {
  require_same(a, b, "ult");
  if (a == b) return bv_const(0, 1);
  return make(Op::Ult, {a, b}, 1);
}

Expr bv_ite(Expr c, Expr t, Expr e) {
  if (c.width() != 1) throw WidthMismatch("ite condition must be width 1");
  require_same(t, e, "ite");
  if (c.is_const()) return c.const_value() ? t : e;
  if (t == e) return t;
  return make(Op::Ite, {c, t, e}, t.width());
}

Expr bv_concat(Expr hi, Expr lo) {
  uint32_t w = hi.width() + lo.width();
  if (w > kMaxWidth) throw WidthMismatch("concat width " + std::to_string(w));
  return make(Op::Concat, {hi, lo}, w);
}

Expr bv_extract(Expr a, uint32_t hi, uint32_t lo) {
  if (hi < lo || hi >= a.width())
    throw BadExtract("[" + std::to_string(hi) + ":" + std::to_string(lo) + "] of width " +
                     std::to_string(a.width()));
  if (lo == 0 && hi == a.width() - 1) return a;
  return make(Op::Extract, {a}, hi - lo + 1, hi, lo);
}

Expr mk_node(Op op, const std::vector<Expr>& args, uint32_t width) {
  auto need = [&](size_t n) {
    if (args.size() != n)
      throw BadParams(std::string(op_name(op)) + " expects " + std::to_string(n) + " operands");
  };
  switch (op) {
    case Op::Const:
    case Op::Var:
    case Op::Extract:
      throw BadParams(std::string(op_name(op)) + " needs its dedicated constructor");
    case Op::Not: {
      need(1);
      Expr r = bv_not(args[0]);
      if (r.width() != width) throw WidthMismatch("not result width");
      return r;
    }
    case Op::Neg: {
      need(1);
      Expr r = bv_neg(args[0]);
      if (r.width() != width) throw WidthMismatch("neg result width");
      return r;
    }
    case Op::And: case Op::Or: case Op::Xor: case Op::Add: case Op::Sub:
    case Op::Mul: case Op::Shl: case Op::LShr: {
      need(2);
      Expr r = op == Op::And   ? bv_and(args[0], args[1])
               : op == Op::Or  ? bv_or(args[0], args[1])
               : op == Op::Xor ? bv_xor(args[0], args[1])
               : op == Op::Add ? bv_add(args[0], args[1])
               : op == Op::Sub ? bv_sub(args[0], args[1])
               : op == Op::Mul ? bv_mul(args[0], args[1])
               : op == Op::Shl ? bv_shl(args[0], args[1])
                               : bv_lshr(args[0], args[1]);
      if (r.width() != width) throw WidthMismatch("result width");
      return r;
    }
    case Op::Eq: case Op::Ult: {
      need(2);
      Expr r = op == Op::Eq ? bv_eq(args[0], args[1]) : bv_ult(args[0], args[1]);
      if (width != 1) throw WidthMismatch("comparison result is width 1");
      return r;
    }
    case Op::Ite: need(3); {
      Expr r = bv_ite(args[0], args[1], args[2]);
      if (r.width() != width) throw WidthMismatch("ite result width");
      return r;
    }
    case Op::Concat: need(2); {
      Expr r = bv_concat(args[0], args[1]);
      if (r.width() != width) throw WidthMismatch("concat result width");
      return r;
    }
  }
  throw BadParams("unknown op");
}

Expr bv_ne(Expr a, Expr b) { return bv_not(bv_eq(a, b)); }

Expr bv_implies(Expr a, Expr b) {
  if (a.width() != 1 || b.width() != 1) throw WidthMismatch("implies needs width-1 operands");
  return bv_or(bv_not(a), b);
}

Expr bv_and_many(const std::vector<Expr>& xs) {
  if (xs.empty()) return bv_const(1, 1);
  Expr r = xs[0];
  for (size_t i = 1; i < xs.size(); ++i) r = bv_and(r, xs[i]);
  return r;
}

Expr bv_or_many(const std::vector<Expr>& xs) {
  if (xs.empty()) return bv_const(0, 1);
  Expr r = xs[0];
  for (size_t i = 1; i < xs.size(); ++i) r = bv_or(r, xs[i]);
  return r;
}

Expr bv_eq_const(Expr a, uint64_t v) { return bv_eq(a, bv_const(v, a.width())); }

Expr bv_zext(Expr a, uint32_t width) {
  if (width < a.width()) throw WidthMismatch("zext narrows");
  if (width == a.width()) return a;
  return bv_concat(bv_const(0, width - a.width()), a);
}

Expr bv_sext(Expr a, uint32_t width) {
  if (width < a.width()) throw WidthMismatch("sext narrows");
  if (width == a.width()) return a;
  Expr sign = bv_extract(a, a.width() - 1, a.width() - 1);
  Expr ext = bv_ite(sign, bv_const(mask_width(width - a.width()), width - a.width()),
                    bv_const(0, width - a.width()));
  return bv_concat(ext, a);
}

Expr bv_bool(bool b) { return bv_const(b ? 1 : 0, 1); }

size_t expr_size(Expr e) {
  std::unordered_set<NodeRef> seen;
  std::vector<NodeRef> stack{e.node()};
  while (!stack.empty()) {
    NodeRef n = stack.back();
    stack.pop_back();
    if (!seen.insert(n).second) continue;
    for (NodeRef a : n->args) stack.push_back(a);
  }
  return seen.size();
}

namespace {
void print_rec(std::ostream& os, NodeRef n) {
  switch (n->op) {
    case Op::Const:
      os << "(const " << n->cval << " " << n->width << ")";
      return;
    case Op::Var:
      os << "(var " << n->name << " " << n->width << ")";
      return;
    case Op::Extract:
      os << "(extract " << n->hi << " " << n->lo << " ";
      print_rec(os, n->args[0]);
      os << ")";
      return;
    default:
      os << "(" << op_name(n->op);
      for (NodeRef a : n->args) {
        os << " ";
        print_rec(os, a);
      }
      os << ")";
  }
}
}  // namespace

std::string expr_to_string(Expr e) {
  std::ostringstream os;
  print_rec(os, e.node());
  return os.str();
}

size_t arena_node_count() { return arena().nodes.size(); }

void arena_clear() {
  Arena& a = arena();
  a.table.clear();
  a.nodes.clear();
  a.next_id = 0;
}

}  // namespace sqed
