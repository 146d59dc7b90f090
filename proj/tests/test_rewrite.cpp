#include "doctest.h"

#include <map>
#include <random>

#include "helpers.hpp"
#include "sct/rewrite.hpp"

using namespace sct;

namespace {

// Independent oracle: the classical Peter-Ackermann recursion, memoized.
std::uint64_t ack_oracle(std::uint64_t x, std::uint64_t y) {
  static std::map<std::pair<std::uint64_t, std::uint64_t>, std::uint64_t> memo;
  auto it = memo.find({x, y});
  if (it != memo.end()) return it->second;
  std::uint64_t r;
  if (x == 0) r = y + 1;
  else if (y == 0) r = ack_oracle(x - 1, 1);
  else r = ack_oracle(x - 1, ack_oracle(x, y - 1));
  memo[{x, y}] = r;
  return r;
}

std::uint64_t pow_oracle(std::uint64_t x, std::uint64_t y) {
  std::uint64_t r = 1;
  while (y--) r *= x;
  return r;
}

// Reference evaluator with a different (innermost, recursive) strategy.
std::optional<std::uint64_t> eval_innermost(const Term& t, const Program& p, const OpInterp& ops,
                                            std::uint64_t& fuel) {
  if (t.is_num()) return t.value;
  std::vector<std::uint64_t> args;
  for (const Term& a : t.args) {
    auto v = eval_innermost(a, p, ops, fuel);
    if (!v) return std::nullopt;
    args.push_back(*v);
  }
  if (fuel == 0) return std::nullopt;
  --fuel;
  if (p.is_fun(t.head)) {
    const FunctionDef& d = p.at(t.head);
    return eval_innermost(eval_expr(d.body, d.params, args), p, ops, fuel);
  }
  return ops.apply(t.head, args);
}

Term ack_term(std::uint64_t x, std::uint64_t y) {
  return make_call_term("A", std::vector<std::uint64_t>{x, y});
}

} // namespace

TEST_CASE("eval_expr resolves conditionals and substitutes") {
  Program p = load_corpus("ackermann.fun");
  const FunctionDef& a = p.defs[0];

  CHECK(eval_expr(a.body, a.params, {0, 3}) == num_term(4));

  Term t = eval_expr(a.body, a.params, {2, 3});
  Term expect = make_call_term("A", {num_term(1), ack_term(2, 2)});
  CHECK(t == expect);

  Program id = parse_program("f(x) = x - 1");
  CHECK(eval_expr(id.defs[0].body, {"x"}, {0}) == num_term(0)); // truncated at zero
}

TEST_CASE("eval_expr_traced reports application positions") {
  Program p = load_corpus("ackermann.fun");
  const FunctionDef& a = p.defs[0];
  std::vector<std::pair<Position, Position>> applies;
  Term t = eval_expr_traced(a.body, a.params, {2, 3}, applies);
  REQUIRE(t == make_call_term("A", {num_term(1), ack_term(2, 2)}));
  REQUIRE(applies.size() == 2);
  CHECK(applies[0] == std::make_pair(Position{}, Position{1, 1}));
  CHECK(applies[1] == std::make_pair(Position{1}, Position{1, 1, 1}));
}

TEST_CASE("find_redex picks the leftmost saturated application") {
  Program p = load_corpus("ackermann.fun");

  Term t = make_call_term("A", {num_term(1), ack_term(2, 2)});
  std::optional<Redex> r = find_redex(t, p);
  REQUIRE(r);
  CHECK(r->position == Position{1});
  CHECK(r->args == std::vector<std::uint64_t>{2, 2});

  CHECK(!find_redex(num_term(7), p));

  std::optional<Redex> root = find_redex(ack_term(2, 3), p);
  REQUIRE(root);
  CHECK(root->position.empty());
  CHECK(root->args == std::vector<std::uint64_t>{2, 3});
}

TEST_CASE("one_step follows the reduction relation") {
  Program p = load_corpus("ackermann.fun");
  OpInterp ops;

  std::optional<Term> t1 = one_step(ack_term(2, 3), p, ops);
  REQUIRE(t1);
  CHECK(*t1 == make_call_term("A", {num_term(1), ack_term(2, 2)}));

  std::optional<Term> t2 = one_step(*t1, p, ops);
  REQUIRE(t2);
  CHECK(*t2 ==
        make_call_term("A", {num_term(1), make_call_term("A", {num_term(1), ack_term(2, 1)})}));

  CHECK(!one_step(num_term(5), p, ops));
}

TEST_CASE("reduce computes values and counts steps") {
  Program p = load_corpus("ackermann.fun");
  OpInterp ops;

  ReduceOutcome r = reduce(ack_term(2, 3), p, ops, 10000);
  auto* v = std::get_if<ReduceValue>(&r);
  REQUIRE(v);
  CHECK(v->value == 9);
  CHECK(v->value == ack_oracle(2, 3));
  CHECK(v->steps == v->proper_steps); // no primitive operators in this program

  ReduceOutcome r2 = reduce(ack_term(0, 5), p, ops, 10);
  auto* v2 = std::get_if<ReduceValue>(&r2);
  REQUIRE(v2);
  CHECK(v2->value == 6);
  CHECK(v2->steps == 1);

  Program swap = load_corpus("swap.fun");
  ReduceOutcome r3 = reduce(make_call_term("swap", {num_term(1), num_term(2)}), swap, ops, 100);
  auto* oof = std::get_if<ReduceOutOfFuel>(&r3);
  REQUIRE(oof);
  CHECK(oof->steps == 100);
}

TEST_CASE("reduce agrees with iterated one_step") {
  Program p = load_corpus("ackermann.fun");
  OpInterp ops;
  for (std::uint64_t x = 0; x <= 2; ++x)
    for (std::uint64_t y = 0; y <= 3; ++y) {
      Term t = ack_term(x, y);
      std::uint64_t steps = 0;
      while (auto next = one_step(t, p, ops)) {
        t = std::move(*next);
        ++steps;
      }
      ReduceOutcome r = reduce(ack_term(x, y), p, ops, 1u << 20);
      auto* v = std::get_if<ReduceValue>(&r);
      REQUIRE(v);
      CHECK(v->steps == steps);
      CHECK(num_term(v->value) == t);
    }
}

TEST_CASE("reduce agrees with an innermost-order reference evaluator") {
  OpInterp ops;
  Program ack = load_corpus("ackermann.fun");
  for (std::uint64_t x = 0; x <= 2; ++x)
    for (std::uint64_t y = 0; y <= 3; ++y) {
      std::uint64_t fuel = 1u << 22;
      auto ref = eval_innermost(ack_term(x, y), ack, ops, fuel);
      ReduceOutcome r = reduce(ack_term(x, y), ack, ops, 1u << 22);
      auto* v = std::get_if<ReduceValue>(&r);
      REQUIRE(v);
      REQUIRE(ref);
      CHECK(*ref == v->value);
      CHECK(*ref == ack_oracle(x, y));
    }

  Program toy = load_corpus("toy.fun");
  OpInterp toy_ops = make_op_table(toy, nullptr);
  for (std::uint64_t x = 0; x <= 3; ++x)
    for (std::uint64_t y = 0; y <= 3; ++y) {
      Term t = make_call_term("f", std::vector<std::uint64_t>{x, y, 0, 1, 0});
      std::uint64_t fuel = 1u << 22;
      auto ref = eval_innermost(t, toy, toy_ops, fuel);
      ReduceOutcome r = reduce(t, toy, toy_ops, 1u << 22);
      auto* v = std::get_if<ReduceValue>(&r);
      REQUIRE(v);
      REQUIRE(ref);
      CHECK(*ref == v->value);
      CHECK(v->value == pow_oracle(x, y));
    }
}

TEST_CASE("wrong entry arity fails loudly") {
  Program p = load_corpus("ackermann.fun");
  OpInterp ops;
  CHECK_THROWS_AS(reduce(make_call_term("A", std::vector<std::uint64_t>{2}), p, ops, 100),
                  ArityMismatch);
  CHECK_THROWS_AS(state_transitions("A", {1, 2, 3}, p, ops, 100), ArityMismatch);
}

TEST_CASE("missing operator interpretations fail loudly") {
  Program p = parse_program("primitive blob/2\nf(x) = blob(x, x)");
  CHECK_THROWS_AS(make_op_table(p, nullptr), MissingOpInterpretation);
  OpInterp empty;
  Term t = make_call_term("blob", std::vector<std::uint64_t>{1, 1});
  CHECK_THROWS_AS(one_step(t, p, empty), MissingOpInterpretation);
}

TEST_CASE("state transitions on Ackermann states") {
  Program p = load_corpus("ackermann.fun");
  OpInterp ops;

  // (A,(2,3)): the else-else branch is active; targets consistent with reduce
  std::vector<StateTransition> trs = state_transitions("A", {2, 3}, p, ops, 100000);
  REQUIRE(trs.size() == 2);
  CHECK(trs[0].call.pos == Position{1, 1});
  REQUIRE(trs[0].resolved);
  CHECK(trs[0].target_args == std::vector<std::uint64_t>{1, ack_oracle(2, 2)});
  CHECK(trs[1].call.pos == Position{1, 1, 1});
  REQUIRE(trs[1].resolved);
  CHECK(trs[1].target_args == std::vector<std::uint64_t>{2, 2});

  // base branch has no calls
  CHECK(state_transitions("A", {0, 5}, p, ops, 1000).empty());

  // (A,(1,0)): the y=0 branch
  std::vector<StateTransition> t2 = state_transitions("A", {1, 0}, p, ops, 1000);
  REQUIRE(t2.size() == 1);
  CHECK(t2[0].call.pos == Position{1, 0});
  CHECK(t2[0].target_args == std::vector<std::uint64_t>{0, 1});

  // starved of fuel, the nested argument stays unresolved
  std::vector<StateTransition> t3 = state_transitions("A", {2, 3}, p, ops, 0);
  REQUIRE(t3.size() == 2);
  CHECK(!t3[0].resolved);
  CHECK(t3[0].target_args.empty());
  REQUIRE(t3[0].target_terms.size() == 2);
}

TEST_CASE("activation trees") {
  Program p = load_corpus("ackermann.fun");
  OpInterp ops;

  ActivationTree t1 = activation_tree("A", {0, 5}, p, ops, 3, 1000);
  REQUIRE(t1.nodes.size() == 1);
  CHECK(t1.nodes[0].label == ActivationNode::Label::Exhausted);
  CHECK(t1.fully_exhausted());

  ActivationTree t2 = activation_tree("A", {1, 1}, p, ops, 10, 100000);
  CHECK(t2.fully_exhausted());
  ReduceOutcome r = reduce(ack_term(1, 1), p, ops, 100000);
  CHECK(std::holds_alternative<ReduceValue>(r));

  Program swap = load_corpus("swap.fun");
  ActivationTree t3 = activation_tree("swap", {1, 2}, swap, ops, 5, 1000);
  REQUIRE(t3.nodes.size() == 6); // a path of length 5
  CHECK(!t3.fully_exhausted());
  CHECK(t3.nodes.back().label == ActivationNode::Label::DepthCut);
  for (std::size_t i = 0; i + 1 < t3.nodes.size(); ++i)
    CHECK(t3.nodes[i].children.size() == 1);
}

TEST_CASE("activation tree finiteness matches termination on the corpus") {
  OpInterp ops;
  Program ack = load_corpus("ackermann.fun");
  for (std::uint64_t x = 0; x <= 2; ++x)
    for (std::uint64_t y = 0; y <= 2; ++y) {
      TerminationVerdict v = terminates_on(ack, ops, {x, y}, 1u << 20);
      REQUIRE(std::holds_alternative<Terminates>(v));
      ActivationTree t = activation_tree("A", {x, y}, ack, ops, 64, 1u << 20);
      CHECK(t.fully_exhausted());
    }
  // and conversely: a non-terminating run never exhausts its tree
  Program swap = load_corpus("swap.fun");
  REQUIRE(std::holds_alternative<Unknown>(terminates_on(swap, ops, {1, 2}, 10000)));
  CHECK(!activation_tree("swap", {1, 2}, swap, ops, 64, 10000).fully_exhausted());
}

TEST_CASE("terminates_on") {
  OpInterp ops;
  Program ack = load_corpus("ackermann.fun");
  TerminationVerdict v = terminates_on(ack, ops, {2, 3}, 100000);
  auto* t = std::get_if<Terminates>(&v);
  REQUIRE(t);
  CHECK(t->value == 9);

  Program toy = load_corpus("toy.fun");
  OpInterp toy_ops = make_op_table(toy, nullptr);
  TerminationVerdict v2 = terminates_on(toy, toy_ops, {2, 3, 0, 1, 0}, 100000);
  auto* t2 = std::get_if<Terminates>(&v2);
  REQUIRE(t2);
  CHECK(t2->value == 8);

  Program swap = load_corpus("swap.fun");
  CHECK(std::holds_alternative<Unknown>(terminates_on(swap, ops, {1, 2}, 10000)));
}

TEST_CASE("improper stretches between proper steps stay bounded") {
  // runs of operator reductions between two proper steps are bounded by
  // (op nodes in the largest body) * (current term size)
  Program p = load_corpus("toy.fun");
  OpInterp ops = make_op_table(p, nullptr);
  std::size_t max_op_nodes = 0;
  for (const auto& d : p.defs) {
    std::size_t n = 0;
    for (const Position& pos : enumerate_positions(d.body)) {
      const Expr& e = subexpr_at(d.body, pos);
      if (e.kind == Expr::Kind::Apply && p.is_op(e.name)) ++n;
    }
    max_op_nodes = std::max(max_op_nodes, n);
  }
  REQUIRE(max_op_nodes == 2);

  Term t = make_call_term("f", std::vector<std::uint64_t>{3, 3, 0, 1, 0});
  std::uint64_t improper_run = 0;
  for (int i = 0; i < 100000; ++i) {
    std::optional<Redex> rx = find_redex(t, p);
    if (!rx) break;
    if (rx->is_fun_call) {
      improper_run = 0;
    } else {
      ++improper_run;
      CHECK(improper_run <= max_op_nodes * term_size(t));
    }
    auto next = one_step(t, p, ops);
    REQUIRE(next);
    t = std::move(*next);
  }
  CHECK(t.is_num());
}

TEST_CASE("traced reduction emits one line per step") {
  Program p = load_corpus("ackermann.fun");
  OpInterp ops;
  std::vector<StepLine> lines;
  ReduceOutcome r = reduce_traced(ack_term(1, 1), p, ops, 1000, lines, 0);
  auto* v = std::get_if<ReduceValue>(&r);
  REQUIRE(v);
  CHECK(v->value == 3);
  REQUIRE(lines.size() == v->steps);
  CHECK(lines[0].index == 0);
  CHECK(lines[0].proper);
  // final line shows the numeral
  CHECK(lines.back().term == "3");
}
