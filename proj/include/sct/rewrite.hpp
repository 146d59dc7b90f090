#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "sct/lang.hpp"

namespace sct {

struct MissingOpInterpretation : Error { using Error::Error; };

// Ground rewrite terms: a natural number or an application of a function
// symbol (defined function or primitive operator) to terms. Terms can nest
// very deeply under long reductions, so destruction drains the children
// iteratively instead of recursing.
struct Term {
  std::string head; // empty = numeral
  std::uint64_t value = 0;
  std::vector<Term> args;

  Term() = default;
  Term(const Term&) = default;
  Term(Term&&) = default;
  Term& operator=(const Term&) = default;
  Term& operator=(Term&&) = default;
  ~Term();

  bool is_num() const { return head.empty(); }
  bool operator==(const Term&) const = default;
};

Term num_term(std::uint64_t v);
Term make_call_term(const std::string& head, std::vector<Term> args);
Term make_call_term(const std::string& head, const std::vector<std::uint64_t>& args);

std::string pretty_term(const Term& t, std::size_t max_width = 0);
const Term& term_at(const Term& t, const Position& pos);
std::size_t term_size(const Term& t);   // number of nodes
std::size_t term_applies(const Term& t); // number of application nodes

// Interpretations for primitive operators.
struct OpInterp {
  std::map<std::string, std::function<std::uint64_t(std::span<const std::uint64_t>)>> fns;

  bool has(const std::string& name) const { return fns.count(name) > 0; }
  std::uint64_t apply(const std::string& name, std::span<const std::uint64_t> args) const;
};

// Built-in operator table (add/plus/sub/mul/succ/pred/max/min); declared
// primitives not in the table fall back to `base` when unary.
OpInterp make_op_table(const Program& p,
                       const std::function<std::uint64_t(std::uint64_t)>& base);

// Standard interpretation of boolean atoms; an alternative evaluator can be
// supplied to eval_expr for experimentation.
using BoolAtomEval =
    std::function<bool(const BoolExpr& atom, const std::vector<std::string>& params,
                       const std::vector<std::uint64_t>& u)>;
BoolAtomEval standard_bool_atoms();

// The evaluation map e(u): resolves every conditional using the boolean
// interpretation and substitutes values; x-1 uses truncated subtraction.
Term eval_expr(const Expr& e, const std::vector<std::string>& params,
               const std::vector<std::uint64_t>& u,
               const BoolAtomEval& atoms = standard_bool_atoms());
// Same, also reporting for every application node of the result its position
// in the source expression (term position -> expression position).
Term eval_expr_traced(const Expr& e, const std::vector<std::string>& params,
                      const std::vector<std::uint64_t>& u,
                      std::vector<std::pair<Position, Position>>& apply_positions,
                      const BoolAtomEval& atoms = standard_bool_atoms());

struct Redex {
  Position position;
  std::string head;
  std::vector<std::uint64_t> args;
  bool is_fun_call = false; // else primitive operator
};

// Leftmost (lexicographically least position) application whose arguments are
// all numerals; none iff the term is a numeral.
std::optional<Redex> find_redex(const Term& t, const Program& p);

// One-step reduction; nullopt when no redex exists. Deterministic.
std::optional<Term> one_step(const Term& t, const Program& p, const OpInterp& ops);

struct ReduceValue {
  std::uint64_t value = 0;
  std::uint64_t steps = 0;
  std::uint64_t proper_steps = 0;
};
struct ReduceOutOfFuel {
  Term last;
  std::uint64_t steps = 0;
  std::uint64_t proper_steps = 0;
};
using ReduceOutcome = std::variant<ReduceValue, ReduceOutOfFuel>;

// Iterates one_step at most `fuel` times, counting total and proper steps.
// Returns OutOfFuel early when the remaining budget provably cannot reach a
// numeral (more application nodes left than steps remaining).
ReduceOutcome reduce(const Term& t, const Program& p, const OpInterp& ops, std::uint64_t fuel);

struct StateTransition {
  std::string source_fn;
  std::vector<std::uint64_t> source_args;
  Call call;
  std::string target_fn;
  std::vector<std::uint64_t> target_args; // when resolved
  std::vector<Term> target_terms;         // when not resolved within fuel
  bool resolved = false;
};

// For each call of f whose branch path is selected under u, evaluates the
// call's arguments and normalizes them against a shared fuel budget.
std::vector<StateTransition> state_transitions(const std::string& f,
                                               const std::vector<std::uint64_t>& u,
                                               const Program& p, const OpInterp& ops,
                                               std::uint64_t fuel);
// Same, reporting how much of the budget was consumed.
std::vector<StateTransition> state_transitions_metered(const std::string& f,
                                                       const std::vector<std::uint64_t>& u,
                                                       const Program& p, const OpInterp& ops,
                                                       std::uint64_t fuel,
                                                       std::uint64_t& consumed);

struct ActivationNode {
  std::string fn;
  std::vector<std::uint64_t> args;
  std::optional<Call> via;
  std::vector<std::size_t> children;
  enum class Label { Expanded, Exhausted, DepthCut, FuelCut } label = Label::Exhausted;
};

// All finite state transition sequences from (f, u), materialized
// breadth-first as a tree up to `depth`.
struct ActivationTree {
  std::vector<ActivationNode> nodes; // nodes[0] is the root
  bool fully_exhausted() const;
};

ActivationTree activation_tree(const std::string& f, const std::vector<std::uint64_t>& u,
                               const Program& p, const OpInterp& ops, std::size_t depth,
                               std::uint64_t fuel);

struct Terminates {
  std::uint64_t value = 0;
  std::uint64_t steps = 0;
  std::uint64_t proper_steps = 0;
};
struct Unknown {};
using TerminationVerdict = std::variant<Terminates, Unknown>;

TerminationVerdict terminates_on(const Program& p, const OpInterp& ops,
                                 const std::vector<std::uint64_t>& u, std::uint64_t fuel);

// One reduction trace line: step index, P/O flag, redex position, result.
struct StepLine {
  std::uint64_t index = 0;
  bool proper = false;
  Position position;
  std::string term;
};

// Bounded run that records a trace line per step (for small runs).
ReduceOutcome reduce_traced(const Term& t, const Program& p, const OpInterp& ops,
                            std::uint64_t fuel, std::vector<StepLine>& trace,
                            std::size_t term_width = 0);

} // namespace sct
