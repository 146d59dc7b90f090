#include "sct/rewrite.hpp"

#include <algorithm>
#include <deque>

namespace sct {

Term::~Term() {
  if (args.empty()) return;
  std::vector<Term> drain(std::move(args));
  while (!drain.empty()) {
    Term t = std::move(drain.back());
    drain.pop_back();
    for (Term& a : t.args)
      if (!a.args.empty()) drain.push_back(std::move(a));
    t.args.clear(); // remaining children are shallow
  }
}

Term num_term(std::uint64_t v) {
  Term t;
  t.value = v;
  return t;
}

Term make_call_term(const std::string& head, std::vector<Term> args) {
  Term t;
  t.head = head;
  t.args = std::move(args);
  return t;
}

Term make_call_term(const std::string& head, const std::vector<std::uint64_t>& args) {
  std::vector<Term> ts;
  ts.reserve(args.size());
  for (std::uint64_t a : args) ts.push_back(num_term(a));
  return make_call_term(head, std::move(ts));
}

std::string pretty_term(const Term& t, std::size_t max_width) {
  std::string out;
  std::function<bool(const Term&)> go = [&](const Term& u) -> bool {
    if (max_width && out.size() > max_width) return false;
    if (u.is_num()) {
      out += std::to_string(u.value);
      return true;
    }
    out += u.head;
    out += "(";
    for (std::size_t i = 0; i < u.args.size(); ++i) {
      if (i) out += ", ";
      if (!go(u.args[i])) return false;
    }
    out += ")";
    return true;
  };
  if (!go(t)) {
    out.resize(max_width);
    out += "...";
  }
  return out;
}

const Term& term_at(const Term& t, const Position& pos) {
  const Term* cur = &t;
  for (std::uint32_t step : pos) {
    if (cur->is_num() || step >= cur->args.size())
      throw InvalidPosition("term position out of range");
    cur = &cur->args[step];
  }
  return *cur;
}

namespace {

// iterative walk; terms can nest beyond comfortable recursion depth
template <typename Visit>
void visit_nodes(const Term& t, Visit&& visit) {
  std::vector<const Term*> work{&t};
  while (!work.empty()) {
    const Term* cur = work.back();
    work.pop_back();
    visit(*cur);
    for (const Term& a : cur->args) work.push_back(&a);
  }
}

} // namespace

std::size_t term_size(const Term& t) {
  std::size_t n = 0;
  visit_nodes(t, [&](const Term&) { ++n; });
  return n;
}

std::size_t term_applies(const Term& t) {
  std::size_t n = 0;
  visit_nodes(t, [&](const Term& u) { n += u.is_num() ? 0 : 1; });
  return n;
}

std::uint64_t OpInterp::apply(const std::string& name,
                              std::span<const std::uint64_t> args) const {
  auto it = fns.find(name);
  if (it == fns.end()) throw MissingOpInterpretation("no interpretation for operator " + name);
  return it->second(args);
}

OpInterp make_op_table(const Program& p,
                       const std::function<std::uint64_t(std::uint64_t)>& base) {
  OpInterp ops;
  for (const auto& [name, arity] : p.primitive_ops) {
    if ((name == "add" || name == "plus") && arity == 2) {
      ops.fns[name] = [](std::span<const std::uint64_t> a) { return a[0] + a[1]; };
    } else if (name == "sub" && arity == 2) {
      ops.fns[name] = [](std::span<const std::uint64_t> a) { return a[0] >= a[1] ? a[0] - a[1] : 0; };
    } else if (name == "mul" && arity == 2) {
      ops.fns[name] = [](std::span<const std::uint64_t> a) { return a[0] * a[1]; };
    } else if (name == "max" && arity == 2) {
      ops.fns[name] = [](std::span<const std::uint64_t> a) { return std::max(a[0], a[1]); };
    } else if (name == "min" && arity == 2) {
      ops.fns[name] = [](std::span<const std::uint64_t> a) { return std::min(a[0], a[1]); };
    } else if (name == "succ" && arity == 1) {
      ops.fns[name] = [](std::span<const std::uint64_t> a) { return a[0] + 1; };
    } else if (name == "pred" && arity == 1) {
      ops.fns[name] = [](std::span<const std::uint64_t> a) { return a[0] > 0 ? a[0] - 1 : 0; };
    } else if (arity == 1 && base) {
      ops.fns[name] = [base](std::span<const std::uint64_t> a) { return base(a[0]); };
    } else {
      throw MissingOpInterpretation("no interpretation available for primitive " + name + "/" +
                                    std::to_string(arity));
    }
  }
  return ops;
}

BoolAtomEval standard_bool_atoms() {
  return [](const BoolExpr& atom, const std::vector<std::string>& params,
            const std::vector<std::uint64_t>& u) { return eval_bool(atom, params, u); };
}

namespace {

bool eval_bool_with(const BoolExpr& b, const std::vector<std::string>& params,
                    const std::vector<std::uint64_t>& u, const BoolAtomEval& atoms) {
  if (b.is_atom()) return atoms(b, params, u);
  switch (b.kind) {
    case BoolExpr::Kind::And:
      return eval_bool_with(b.kids[0], params, u, atoms) &&
             eval_bool_with(b.kids[1], params, u, atoms);
    case BoolExpr::Kind::Or:
      return eval_bool_with(b.kids[0], params, u, atoms) ||
             eval_bool_with(b.kids[1], params, u, atoms);
    case BoolExpr::Kind::Not:
      return !eval_bool_with(b.kids[0], params, u, atoms);
    default:
      return false;
  }
}

std::uint64_t param_value(const std::vector<std::string>& params,
                          const std::vector<std::uint64_t>& u, const std::string& name) {
  for (std::size_t i = 0; i < params.size(); ++i)
    if (params[i] == name) return u[i];
  throw UnknownIdentifier("unknown parameter: " + name);
}

Term eval_rec(const Expr& e, const std::vector<std::string>& params,
              const std::vector<std::uint64_t>& u, const BoolAtomEval& atoms,
              std::vector<std::pair<Position, Position>>* applies, Position& expr_pos,
              Position& term_pos) {
  switch (e.kind) {
    case Expr::Kind::Param:
      return num_term(param_value(params, u, e.name));
    case Expr::Kind::ParamSucc:
      return num_term(param_value(params, u, e.name) + 1);
    case Expr::Kind::ParamPred: {
      std::uint64_t v = param_value(params, u, e.name);
      return num_term(v > 0 ? v - 1 : 0);
    }
    case Expr::Kind::Num:
      return num_term(e.value);
    case Expr::Kind::Apply: {
      if (applies) applies->emplace_back(term_pos, expr_pos);
      Term t;
      t.head = e.name;
      t.args.reserve(e.kids.size());
      for (std::uint32_t i = 0; i < e.kids.size(); ++i) {
        expr_pos.push_back(i);
        term_pos.push_back(i);
        t.args.push_back(eval_rec(e.kids[i], params, u, atoms, applies, expr_pos, term_pos));
        expr_pos.pop_back();
        term_pos.pop_back();
      }
      return t;
    }
    case Expr::Kind::If: {
      bool c = eval_bool_with(*e.cond, params, u, atoms);
      std::uint32_t branch = c ? 0 : 1;
      expr_pos.push_back(branch);
      Term t = eval_rec(e.kids[branch], params, u, atoms, applies, expr_pos, term_pos);
      expr_pos.pop_back();
      return t;
    }
  }
  throw Error("unreachable expression kind");
}

} // namespace

Term eval_expr(const Expr& e, const std::vector<std::string>& params,
               const std::vector<std::uint64_t>& u, const BoolAtomEval& atoms) {
  Position ep, tp;
  return eval_rec(e, params, u, atoms, nullptr, ep, tp);
}

Term eval_expr_traced(const Expr& e, const std::vector<std::string>& params,
                      const std::vector<std::uint64_t>& u,
                      std::vector<std::pair<Position, Position>>& apply_positions,
                      const BoolAtomEval& atoms) {
  Position ep, tp;
  return eval_rec(e, params, u, atoms, &apply_positions, ep, tp);
}

std::optional<Redex> find_redex(const Term& t, const Program& p) {
  // leftmost application with all-numeral arguments: descend into the first
  // non-numeral child until none is left
  if (t.is_num()) return std::nullopt;
  Position pos;
  const Term* cur = &t;
  for (;;) {
    const Term* next = nullptr;
    for (std::uint32_t i = 0; i < cur->args.size(); ++i) {
      if (!cur->args[i].is_num()) {
        pos.push_back(i);
        next = &cur->args[i];
        break;
      }
    }
    if (!next) break;
    cur = next;
  }
  Redex rx;
  rx.position = std::move(pos);
  rx.head = cur->head;
  for (const Term& a : cur->args) rx.args.push_back(a.value);
  rx.is_fun_call = p.is_fun(cur->head);
  return rx;
}

namespace {

Term instantiate(const Program& p, const OpInterp& ops, const Redex& rx) {
  if (rx.is_fun_call) {
    const FunctionDef& d = p.at(rx.head);
    if (rx.args.size() != d.params.size())
      throw ArityMismatch(rx.head + " applied to " + std::to_string(rx.args.size()) +
                          " arguments, declared arity " + std::to_string(d.params.size()));
    return eval_expr(d.body, d.params, rx.args);
  }
  if (!p.is_op(rx.head)) throw UnknownIdentifier("undeclared symbol in term: " + rx.head);
  return num_term(ops.apply(rx.head, rx.args));
}

Term* term_at_mut(Term& t, const Position& pos) {
  Term* cur = &t;
  for (std::uint32_t step : pos) cur = &cur->args[step];
  return cur;
}

} // namespace

std::optional<Term> one_step(const Term& t, const Program& p, const OpInterp& ops) {
  std::optional<Redex> rx = find_redex(t, p);
  if (!rx) return std::nullopt;
  Term out = t;
  *term_at_mut(out, rx->position) = instantiate(p, ops, *rx);
  return out;
}

namespace {

struct Frame {
  Term* node;
  std::uint32_t next_arg = 0;
};

// In-place leftmost reduction driver with an explicit cursor stack; reports
// each step through `on_step` (given the redex path and properness) before
// the redex is rewritten.
template <typename OnStep>
ReduceOutcome reduce_impl(const Term& t0, const Program& p, const OpInterp& ops,
                          std::uint64_t fuel, OnStep&& on_step) {
  Term root = t0;
  std::uint64_t steps = 0, proper = 0;
  std::size_t applies = term_applies(root);
  std::vector<Frame> stack;
  stack.push_back({&root});

  while (!stack.empty()) {
    Frame& f = stack.back();
    Term& node = *f.node;
    if (node.is_num()) {
      stack.pop_back();
      if (!stack.empty()) ++stack.back().next_arg;
      continue;
    }
    if (f.next_arg < node.args.size()) {
      Term& arg = node.args[f.next_arg];
      if (arg.is_num()) {
        ++f.next_arg;
      } else {
        stack.push_back({&arg});
      }
      continue;
    }
    // all arguments numeral: this node is the leftmost redex
    // more application nodes than remaining steps: cannot reach a numeral
    if (steps >= fuel || applies > fuel - steps) {
      ReduceOutOfFuel out;
      out.last = std::move(root);
      out.steps = steps;
      out.proper_steps = proper;
      return out;
    }
    Redex rx;
    rx.head = node.head;
    for (const Term& a : node.args) rx.args.push_back(a.value);
    rx.is_fun_call = p.is_fun(node.head);
    on_step(stack, rx);
    applies -= 1;
    Term replacement = instantiate(p, ops, rx);
    applies += term_applies(replacement);
    node = std::move(replacement);
    ++steps;
    if (rx.is_fun_call) ++proper;
    f.next_arg = 0; // rescan this position
  }

  ReduceValue out;
  out.value = root.value;
  out.steps = steps;
  out.proper_steps = proper;
  return out;
}

Position stack_position(const std::vector<Frame>& stack) {
  Position pos;
  for (std::size_t i = 0; i + 1 < stack.size(); ++i) pos.push_back(stack[i].next_arg);
  return pos;
}

} // namespace

ReduceOutcome reduce(const Term& t, const Program& p, const OpInterp& ops, std::uint64_t fuel) {
  return reduce_impl(t, p, ops, fuel, [](const std::vector<Frame>&, const Redex&) {});
}

ReduceOutcome reduce_traced(const Term& t, const Program& p, const OpInterp& ops,
                            std::uint64_t fuel, std::vector<StepLine>& trace,
                            std::size_t term_width) {
  std::uint64_t idx = 0;
  std::vector<std::pair<Position, bool>> pending;
  ReduceOutcome out = reduce_impl(t, p, ops, fuel,
                                  [&](const std::vector<Frame>& stack, const Redex& rx) {
                                    pending.emplace_back(stack_position(stack), rx.is_fun_call);
                                  });
  // replay to capture resulting terms (runs are small when tracing)
  Term cur = t;
  for (const auto& [pos, prop] : pending) {
    std::optional<Term> next = one_step(cur, p, ops);
    if (!next) break;
    cur = std::move(*next);
    StepLine line;
    line.index = idx++;
    line.proper = prop;
    line.position = pos;
    line.term = pretty_term(cur, term_width);
    trace.push_back(std::move(line));
  }
  return out;
}

std::vector<StateTransition> state_transitions(const std::string& f,
                                               const std::vector<std::uint64_t>& u,
                                               const Program& p, const OpInterp& ops,
                                               std::uint64_t fuel) {
  std::uint64_t consumed = 0;
  return state_transitions_metered(f, u, p, ops, fuel, consumed);
}

std::vector<StateTransition> state_transitions_metered(const std::string& f,
                                                       const std::vector<std::uint64_t>& u,
                                                       const Program& p, const OpInterp& ops,
                                                       std::uint64_t fuel,
                                                       std::uint64_t& consumed) {
  const FunctionDef& d = p.at(f);
  if (u.size() != d.params.size())
    throw ArityMismatch(f + " expects " + std::to_string(d.params.size()) + " arguments, got " +
                        std::to_string(u.size()));
  std::vector<StateTransition> out;
  std::uint64_t remaining = fuel;
  for (const Call& c : calls_of(p)) {
    if (c.source != f) continue;
    if (!path_selected(d, c.pos, u)) continue;
    const Expr& site = subexpr_at(d.body, c.pos);
    StateTransition tr;
    tr.source_fn = f;
    tr.source_args = u;
    tr.call = c;
    tr.target_fn = c.target;
    tr.resolved = true;
    for (const Expr& arg : site.kids) {
      Term s = eval_expr(arg, d.params, u);
      ReduceOutcome r = reduce(s, p, ops, remaining);
      if (const auto* v = std::get_if<ReduceValue>(&r)) {
        remaining -= std::min<std::uint64_t>(remaining, v->steps);
        tr.target_args.push_back(v->value);
        tr.target_terms.push_back(num_term(v->value));
      } else {
        const auto& oof = std::get<ReduceOutOfFuel>(r);
        remaining -= std::min<std::uint64_t>(remaining, oof.steps);
        tr.resolved = false;
        tr.target_terms.push_back(oof.last);
      }
    }
    if (!tr.resolved) tr.target_args.clear();
    out.push_back(std::move(tr));
  }
  consumed = fuel - remaining;
  return out;
}

bool ActivationTree::fully_exhausted() const {
  for (const auto& n : nodes)
    if (n.label != ActivationNode::Label::Exhausted &&
        n.label != ActivationNode::Label::Expanded)
      return false;
  return true;
}

ActivationTree activation_tree(const std::string& f, const std::vector<std::uint64_t>& u,
                               const Program& p, const OpInterp& ops, std::size_t depth,
                               std::uint64_t fuel) {
  ActivationTree tree;
  tree.nodes.push_back(ActivationNode{f, u, std::nullopt, {}, ActivationNode::Label::Exhausted});
  std::deque<std::pair<std::size_t, std::size_t>> frontier; // node index, depth
  frontier.emplace_back(0, 0);
  std::uint64_t remaining = fuel;
  while (!frontier.empty()) {
    auto [idx, d] = frontier.front();
    frontier.pop_front();
    if (d >= depth) {
      tree.nodes[idx].label = ActivationNode::Label::DepthCut;
      continue;
    }
    std::uint64_t spent = 0;
    std::vector<StateTransition> trs = state_transitions_metered(
        tree.nodes[idx].fn, tree.nodes[idx].args, p, ops, remaining, spent);
    remaining -= std::min(remaining, spent);
    bool all_resolved = true;
    for (const auto& tr : trs)
      if (!tr.resolved) all_resolved = false;
    if (!all_resolved) {
      tree.nodes[idx].label = ActivationNode::Label::FuelCut;
    } else if (trs.empty()) {
      tree.nodes[idx].label = ActivationNode::Label::Exhausted;
    } else {
      tree.nodes[idx].label = ActivationNode::Label::Expanded;
    }
    for (const auto& tr : trs) {
      if (!tr.resolved) continue;
      ActivationNode child;
      child.fn = tr.target_fn;
      child.args = tr.target_args;
      child.via = tr.call;
      child.label = ActivationNode::Label::Exhausted;
      tree.nodes.push_back(std::move(child));
      std::size_t ci = tree.nodes.size() - 1;
      tree.nodes[idx].children.push_back(ci);
      frontier.emplace_back(ci, d + 1);
    }
  }
  return tree;
}

TerminationVerdict terminates_on(const Program& p, const OpInterp& ops,
                                 const std::vector<std::uint64_t>& u, std::uint64_t fuel) {
  Term t = make_call_term(p.entry().name, u);
  ReduceOutcome r = reduce(t, p, ops, fuel);
  if (const auto* v = std::get_if<ReduceValue>(&r))
    return Terminates{v->value, v->steps, v->proper_steps};
  return Unknown{};
}

} // namespace sct
