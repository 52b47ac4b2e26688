#include "sqed/ts.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

namespace sqed {

Expr TransitionSystem::add_state(const std::string& name, uint32_t width,
                                 std::optional<uint64_t> init) {
  if (has_var(name)) throw NameCollision(name);
  StateVar sv;
  sv.name = name;
  sv.width = width;
  if (init) sv.init = *init & mask_width(width);
  state_vars.push_back(sv);
  return bv_var(name, width);
}

Expr TransitionSystem::add_input(const std::string& name, uint32_t width) {
  if (has_var(name)) throw NameCollision(name);
  inputs.push_back({name, width});
  return bv_var(name, width);
}

void TransitionSystem::set_next(const std::string& name, Expr e) {
  const StateVar* sv = find_state(name);
  if (!sv) throw PortMissing("set_next on undeclared state " + name);
  if (e.width() != sv->width) throw WidthMismatch("next of " + name);
  next[name] = e;
}

Expr TransitionSystem::state(const std::string& name) const {
  const StateVar* sv = find_state(name);
  if (!sv) throw PortMissing("state " + name);
  return bv_var(name, sv->width);
}

Expr TransitionSystem::input(const std::string& name) const {
  const InputVar* iv = find_input(name);
  if (!iv) throw PortMissing("input " + name);
  return bv_var(name, iv->width);
}

const StateVar* TransitionSystem::find_state(const std::string& name) const {
  for (const StateVar& sv : state_vars)
    if (sv.name == name) return &sv;
  return nullptr;
}

const InputVar* TransitionSystem::find_input(const std::string& name) const {
  for (const InputVar& iv : inputs)
    if (iv.name == name) return &iv;
  return nullptr;
}

bool TransitionSystem::has_var(const std::string& name) const {
  return find_state(name) != nullptr || find_input(name) != nullptr;
}

std::map<std::string, uint64_t> TransitionSystem::reset_assignment() const {
  std::map<std::string, uint64_t> out;
  for (const StateVar& sv : state_vars) out[sv.name] = sv.init.value_or(0);
  return out;
}

std::vector<std::string> expr_support(Expr e) {
  std::unordered_set<NodeRef> seen;
  std::unordered_set<std::string> names;
  std::vector<std::string> out;
  std::vector<NodeRef> stack{e.node()};
  while (!stack.empty()) {
    NodeRef n = stack.back();
    stack.pop_back();
    if (!seen.insert(n).second) continue;
    if (n->op == Op::Var && names.insert(n->name).second) out.push_back(n->name);
    for (NodeRef c : n->args) stack.push_back(c);
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

// Every Var node must match a declaration, including its width.
void check_refs(const TransitionSystem& ts, Expr e, const std::string& where,
                bool allow_inputs, std::vector<std::string>& errs) {
  std::unordered_set<NodeRef> seen;
  std::vector<NodeRef> stack{e.node()};
  while (!stack.empty()) {
    NodeRef n = stack.back();
    stack.pop_back();
    if (!seen.insert(n).second) continue;
    if (n->op == Op::Var) {
      const StateVar* sv = ts.find_state(n->name);
      const InputVar* iv = ts.find_input(n->name);
      if (sv) {
        if (sv->width != n->width)
          errs.push_back(where + ": state " + n->name + " used at width " +
                         std::to_string(n->width) + ", declared " + std::to_string(sv->width));
      } else if (iv) {
        if (!allow_inputs)
          errs.push_back(where + ": references input " + n->name);
        else if (iv->width != n->width)
          errs.push_back(where + ": input " + n->name + " used at width " +
                         std::to_string(n->width) + ", declared " + std::to_string(iv->width));
      } else {
        errs.push_back(where + ": undeclared variable " + n->name);
      }
    }
    for (NodeRef c : n->args) stack.push_back(c);
  }
}

}  // namespace

std::vector<std::string> validate_ts(const TransitionSystem& ts) {
  std::vector<std::string> errs;
  std::unordered_set<std::string> names;
  for (const StateVar& sv : ts.state_vars) {
    if (sv.name.empty()) errs.push_back("empty state name");
    if (sv.width < 1 || sv.width > kMaxWidth)
      errs.push_back("state " + sv.name + " has width " + std::to_string(sv.width));
    if (!names.insert(sv.name).second) errs.push_back("duplicate name " + sv.name);
  }
  for (const InputVar& iv : ts.inputs) {
    if (iv.name.empty()) errs.push_back("empty input name");
    if (iv.width < 1 || iv.width > kMaxWidth)
      errs.push_back("input " + iv.name + " has width " + std::to_string(iv.width));
    if (!names.insert(iv.name).second) errs.push_back("duplicate name " + iv.name);
  }
  for (const StateVar& sv : ts.state_vars) {
    auto it = ts.next.find(sv.name);
    if (it == ts.next.end()) {
      errs.push_back("state " + sv.name + " has no next function");
      continue;
    }
    if (it->second.width() != sv.width)
      errs.push_back("next(" + sv.name + ") has width " + std::to_string(it->second.width()));
    check_refs(ts, it->second, "next(" + sv.name + ")", true, errs);
  }
  for (const auto& [name, e] : ts.next) {
    (void)e;
    if (!ts.find_state(name)) errs.push_back("next for undeclared state " + name);
  }
  for (size_t i = 0; i < ts.init_assumes.size(); ++i) {
    const Expr& e = ts.init_assumes[i];
    if (e.width() != 1) errs.push_back("init assume " + std::to_string(i) + " not width 1");
    check_refs(ts, e, "init assume " + std::to_string(i), false, errs);
  }
  for (size_t i = 0; i < ts.step_assumes.size(); ++i) {
    const Expr& e = ts.step_assumes[i];
    if (e.width() != 1) errs.push_back("step assume " + std::to_string(i) + " not width 1");
    check_refs(ts, e, "step assume " + std::to_string(i), true, errs);
  }
  std::unordered_set<std::string> assert_names;
  for (const NamedAssert& na : ts.asserts) {
    if (na.name.empty()) errs.push_back("empty assert name");
    if (!assert_names.insert(na.name).second) errs.push_back("duplicate assert " + na.name);
    if (na.expr.width() != 1) errs.push_back("assert " + na.name + " not width 1");
    check_refs(ts, na.expr, "assert " + na.name, true, errs);
  }
  return errs;
}

TransitionSystem compose(const TransitionSystem& base, const TransitionSystem& fragment,
                         const std::unordered_map<std::string, Expr>& connections,
                         const std::string& prefix) {
  TransitionSystem out = base;

  // Rewrites applied to every fragment expression: inputs wired to base
  // expressions, state vars renamed under the prefix.
  std::unordered_map<std::string, Expr> rw;
  for (const InputVar& iv : fragment.inputs) {
    auto it = connections.find(iv.name);
    if (it == connections.end())
      throw PortMissing("fragment input " + iv.name + " not connected");
    if (it->second.width() != iv.width)
      throw WidthMismatch("connection for " + iv.name);
    rw[iv.name] = it->second;
  }
  for (const auto& [name, e] : connections) {
    (void)e;
    if (!fragment.find_input(name))
      throw PortMissing("connection names unknown fragment input " + name);
  }
  for (const StateVar& sv : fragment.state_vars) {
    std::string renamed = prefix + sv.name;
    if (out.has_var(renamed)) throw NameCollision(renamed);
    rw[sv.name] = bv_var(renamed, sv.width);
  }

  for (const StateVar& sv : fragment.state_vars)
    out.add_state(prefix + sv.name, sv.width, sv.init);
  for (const StateVar& sv : fragment.state_vars) {
    auto it = fragment.next.find(sv.name);
    if (it == fragment.next.end()) throw PortMissing("fragment next missing for " + sv.name);
    out.set_next(prefix + sv.name, substitute_vars(it->second, rw));
  }
  for (const Expr& e : fragment.init_assumes)
    out.init_assumes.push_back(substitute_vars(e, rw));
  for (const Expr& e : fragment.step_assumes)
    out.step_assumes.push_back(substitute_vars(e, rw));
  for (const NamedAssert& na : fragment.asserts)
    out.asserts.push_back({prefix + na.name, substitute_vars(na.expr, rw)});
  return out;
}

std::string ts_dump(const TransitionSystem& ts) {
  std::ostringstream os;
  for (const StateVar& sv : ts.state_vars) {
    os << "state " << sv.name << " " << sv.width << " ";
    if (sv.init)
      os << *sv.init;
    else
      os << "symbolic";
    auto it = ts.next.find(sv.name);
    os << " := " << (it == ts.next.end() ? "<missing>" : expr_to_string(it->second)) << "\n";
  }
  for (const InputVar& iv : ts.inputs) os << "input " << iv.name << " " << iv.width << "\n";
  for (const Expr& e : ts.init_assumes) os << "init-assume " << expr_to_string(e) << "\n";
  for (const Expr& e : ts.step_assumes) os << "step-assume " << expr_to_string(e) << "\n";
  for (const NamedAssert& na : ts.asserts)
    os << "assert " << na.name << " " << expr_to_string(na.expr) << "\n";
  return os.str();
}

}  // namespace sqed
