#include "sqed/bitblast.hpp"

#include <vector>

namespace sqed {

namespace {

// Lowers each interned node once; node bits get fresh CNF variables, gate
// outputs (carries, mux stages) stay anonymous.
class Encoder {
 public:
  Blasted out;

  void assert_root(Expr e) {
    if (e.width() != 1) throw WidthMismatch("bitblast formula must be width 1");
    const std::vector<int>& bits = encode(e.node());
    out.cnf.add_clause({bits[0]});
  }

 private:
  int tvar_ = 0;

  int lt() {  // literal that is always true
    if (!tvar_) {
      tvar_ = out.cnf.new_var();
      out.cnf.add_clause({tvar_});
    }
    return tvar_;
  }
  int lf() { return -lt(); }
  bool is_t(int l) { return tvar_ != 0 && l == tvar_; }
  bool is_f(int l) { return tvar_ != 0 && l == -tvar_; }

  int g_and(int a, int b) {
    if (is_f(a) || is_f(b)) return lf();
    if (is_t(a)) return b;
    if (is_t(b)) return a;
    if (a == b) return a;
    if (a == -b) return lf();
    int g = out.cnf.new_var();
    out.cnf.add_clause({-g, a});
    out.cnf.add_clause({-g, b});
    out.cnf.add_clause({g, -a, -b});
    return g;
  }

  int g_or(int a, int b) { return -g_and(-a, -b); }

  int g_xor(int a, int b) {
    if (is_f(a)) return b;
    if (is_f(b)) return a;
    if (is_t(a)) return -b;
    if (is_t(b)) return -a;
    if (a == b) return lf();
    if (a == -b) return lt();
    int g = out.cnf.new_var();
    out.cnf.add_clause({-g, a, b});
    out.cnf.add_clause({-g, -a, -b});
    out.cnf.add_clause({g, -a, b});
    out.cnf.add_clause({g, a, -b});
    return g;
  }

  int g_mux(int c, int t, int e) {
    if (is_t(c)) return t;
    if (is_f(c)) return e;
    if (t == e) return t;
    if (is_t(t) && is_f(e)) return c;
    if (is_f(t) && is_t(e)) return -c;
    int g = out.cnf.new_var();
    out.cnf.add_clause({-g, -c, t});
    out.cnf.add_clause({-g, c, e});
    out.cnf.add_clause({g, -c, -t});
    out.cnf.add_clause({g, c, -e});
    return g;
  }

  // v <-> l for a fresh node variable v.
  void bind(int v, int l) {
    if (is_t(l)) {
      out.cnf.add_clause({v});
    } else if (is_f(l)) {
      out.cnf.add_clause({-v});
    } else {
      out.cnf.add_clause({-v, l});
      out.cnf.add_clause({v, -l});
    }
  }

  std::vector<int> ripple_add(const std::vector<int>& a, const std::vector<int>& b, int cin) {
    std::vector<int> sum(a.size());
    int carry = cin;
    for (size_t i = 0; i < a.size(); ++i) {
      int t = g_xor(a[i], b[i]);
      sum[i] = g_xor(t, carry);
      carry = g_or(g_and(a[i], b[i]), g_and(t, carry));
    }
    return sum;
  }

  std::vector<int> lower(NodeRef n) {
    const uint32_t w = n->width;
    std::vector<int> bits(w);
    auto child = [&](size_t i) -> const std::vector<int>& { return encode(n->args[i]); };
    switch (n->op) {
      case Op::Var:
      case Op::Const:
        throw BadParams("lower on leaf");
      case Op::Not: {
        const auto& a = child(0);
        for (uint32_t i = 0; i < w; ++i) bits[i] = -a[i];
        return bits;
      }
      case Op::Neg: {
        const auto& a = child(0);
        std::vector<int> na(w), zero(w, lf());
        for (uint32_t i = 0; i < w; ++i) na[i] = -a[i];
        return ripple_add(na, zero, lt());
      }
      case Op::And: {
        const auto& a = child(0);
        const auto& b = child(1);
        for (uint32_t i = 0; i < w; ++i) bits[i] = g_and(a[i], b[i]);
        return bits;
      }
      case Op::Or: {
        const auto& a = child(0);
        const auto& b = child(1);
        for (uint32_t i = 0; i < w; ++i) bits[i] = g_or(a[i], b[i]);
        return bits;
      }
      case Op::Xor: {
        const auto& a = child(0);
        const auto& b = child(1);
        for (uint32_t i = 0; i < w; ++i) bits[i] = g_xor(a[i], b[i]);
        return bits;
      }
      case Op::Add: return ripple_add(child(0), child(1), lf());
      case Op::Sub: {
        const auto& a = child(0);
        const auto& b = child(1);
        std::vector<int> nb(w);
        for (uint32_t i = 0; i < w; ++i) nb[i] = -b[i];
        return ripple_add(a, nb, lt());
      }
      case Op::Mul: {
        const auto& a = child(0);
        const auto& b = child(1);
        std::vector<int> acc(w, lf());
        for (uint32_t j = 0; j < w; ++j) {
          std::vector<int> pp(w, lf());
          for (uint32_t i = j; i < w; ++i) pp[i] = g_and(a[i - j], b[j]);
          acc = ripple_add(acc, pp, lf());
        }
        return acc;
      }
      case Op::Shl:
      case Op::LShr: {
        const auto& a = child(0);
        const auto& b = child(1);
        std::vector<int> r = a;
        int too_far = lf();  // any shift-amount bit that alone exceeds the width
        for (uint32_t j = 0; j < b.size(); ++j) {
          uint64_t s = 1ull << (j < 63 ? j : 63);
          if (j >= 63 || s >= w) {
            too_far = g_or(too_far, b[j]);
            continue;
          }
          std::vector<int> shifted(w);
          for (uint32_t i = 0; i < w; ++i) {
            if (n->op == Op::Shl)
              shifted[i] = i >= s ? r[i - s] : lf();
            else
              shifted[i] = i + s < w ? r[i + s] : lf();
          }
          for (uint32_t i = 0; i < w; ++i) r[i] = g_mux(b[j], shifted[i], r[i]);
        }
        for (uint32_t i = 0; i < w; ++i) r[i] = g_and(r[i], -too_far);
        return r;
      }
      case Op::Eq: {
        const auto& a = child(0);
        const auto& b = child(1);
        int acc = lt();
        for (size_t i = 0; i < a.size(); ++i) acc = g_and(acc, -g_xor(a[i], b[i]));
        return {acc};
      }
      case Op::Ult: {
        const auto& a = child(0);
        const auto& b = child(1);
        int borrow = lf();
        for (size_t i = 0; i < a.size(); ++i) {
          int lt_i = g_and(-a[i], b[i]);
          int eq_i = -g_xor(a[i], b[i]);
          borrow = g_or(lt_i, g_and(eq_i, borrow));
        }
        return {borrow};
      }
      case Op::Ite: {
        const auto& c = child(0);
        const auto& t = child(1);
        const auto& e = child(2);
        for (uint32_t i = 0; i < w; ++i) bits[i] = g_mux(c[0], t[i], e[i]);
        return bits;
      }
      case Op::Concat: {
        const auto& hi = child(0);
        const auto& lo = child(1);
        for (size_t i = 0; i < lo.size(); ++i) bits[i] = lo[i];
        for (size_t i = 0; i < hi.size(); ++i) bits[lo.size() + i] = hi[i];
        return bits;
      }
      case Op::Extract: {
        const auto& a = child(0);
        for (uint32_t i = 0; i < w; ++i) bits[i] = a[n->lo + i];
        return bits;
      }
    }
    throw BadParams("unknown op");
  }

  const std::vector<int>& encode(NodeRef n) {
    auto it = out.var_map.find(n);
    if (it != out.var_map.end()) return it->second;

    // Children first (iteratively, since cones can be deep).
    std::vector<NodeRef> stack{n};
    while (!stack.empty()) {
      NodeRef cur = stack.back();
      if (out.var_map.count(cur)) {
        stack.pop_back();
        continue;
      }
      bool ready = true;
      for (NodeRef c : cur->args) {
        if (!out.var_map.count(c)) {
          stack.push_back(c);
          ready = false;
        }
      }
      if (!ready) continue;
      stack.pop_back();

      std::vector<int> vars(cur->width);
      if (cur->op == Op::Var) {
        for (uint32_t i = 0; i < cur->width; ++i) vars[i] = out.cnf.new_var();
      } else if (cur->op == Op::Const) {
        for (uint32_t i = 0; i < cur->width; ++i) {
          vars[i] = out.cnf.new_var();
          out.cnf.add_clause({(cur->cval >> i) & 1 ? vars[i] : -vars[i]});
        }
      } else {
        std::vector<int> lits = lower(cur);
        for (uint32_t i = 0; i < cur->width; ++i) {
          vars[i] = out.cnf.new_var();
          bind(vars[i], lits[i]);
        }
      }
      out.var_map.emplace(cur, std::move(vars));
    }
    return out.var_map.at(n);
  }
};

}  // namespace

Blasted bitblast(const std::vector<Expr>& formulas) {
  Encoder enc;
  for (const Expr& f : formulas) enc.assert_root(f);
  return std::move(enc.out);
}

}  // namespace sqed
