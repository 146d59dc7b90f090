#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "sct/lang.hpp"
#include "sct/ordinal.hpp"
#include "sct/rewrite.hpp"

namespace sct {

// Total base functions are named built-ins so runs stay replayable.
struct BaseFunction {
  std::string name;
  std::function<std::uint64_t(std::uint64_t)> fn;
};

BaseFunction base_succ();
BaseFunction base_affine(std::uint64_t a, std::uint64_t b); // x -> a*x + b
// small-domain lookup; arguments past the end clamp to the last entry
BaseFunction base_table(std::vector<std::uint64_t> values);
// "succ", "affine:a,b" or "table:v0,v1,..."
BaseFunction parse_base_spec(const std::string& spec);

// A stack of ordinal notations together with the current value; the stack
// encodes the term F_{a0}(...(F_{an}(x))...), empty stack = halted.
struct FghState {
  std::vector<Ordinal> stack;
  std::uint64_t value = 0;
  bool operator==(const FghState&) const = default;
};

// One computation step: pop-and-apply on 0, push x+1 copies of the
// predecessor on a successor, fundamental-sequence substitution on a limit.
// Identity on the empty stack.
FghState k_step(const BaseFunction& f, FghState s);

// h(a0...an, x) = w^a0 + ... + w^an; strictly decreasing while positive.
Ordinal fgh_measure(const FghState& s);

struct FghTraceEntry {
  std::uint64_t step = 0;
  FghState state;
  Ordinal h_value;
};

struct FghValue {
  std::uint64_t value = 0;
  std::uint64_t steps = 0;
};
struct FghBudget {
  FghState state;
  std::uint64_t steps = 0;
  bool value_overflow = false; // the base function left the representable range
};
using FghOutcome = std::variant<FghValue, FghBudget>;

// Iterates k_step from (<alpha>, x) until the stack empties or the budget is
// exhausted. Bails out early (as Budget) when the stack is already larger
// than the remaining budget, since each entry costs at least one step, and
// when the base function overflows 64 bits. The h-trace is recorded when a
// trace vector is supplied.
FghOutcome compute_F(const BaseFunction& f, const Ordinal& alpha, std::uint64_t x,
                     std::uint64_t step_budget, std::vector<FghTraceEntry>* trace = nullptr);

// alpha(x) = w^(n-1) x_1 + ... + x_n
Ordinal alpha_of(const std::vector<std::uint64_t>& xs);

// Source text of the generalized Ackermann program A^n_f with parameters
// x1..xn, y and a declared unary primitive f.
std::string gen_ackermann_source(unsigned n);
Program gen_ackermann_program(unsigned n);

// Cross-check of the rewrite interpreter on A^n_f against the K-machine on
// (alpha(x), y) over a small grid. Step counts are reported as a metric, not
// asserted: the exact step correspondence holds only up to slack.
struct FaEntry {
  std::vector<std::uint64_t> xs;
  std::uint64_t y = 0;
  std::optional<std::uint64_t> interp_value; // nullopt: out of fuel
  std::optional<std::uint64_t> k_value;      // nullopt: out of budget
  std::uint64_t interp_steps = 0;
  std::uint64_t interp_proper_steps = 0;
  std::uint64_t k_steps = 0;
  bool agree() const {
    return !interp_value || !k_value || *interp_value == *k_value;
  }
  bool both_complete() const { return interp_value && k_value; }
};

struct FaReport {
  std::vector<FaEntry> entries;
  std::uint64_t disagreements = 0;
  std::uint64_t budget_tuples = 0; // tuples where at least one side gave up
  std::uint64_t step_matches = 0;  // proper interpreter steps == K steps
};

FaReport check_fa_equivalence(unsigned n, const BaseFunction& f,
                              const std::vector<std::uint64_t>& x_bounds, std::uint64_t y_bound,
                              std::uint64_t fuel, std::uint64_t step_budget);

struct Descending {};
struct DescentViolation {
  std::size_t index = 0; // first i with !(trace[i] > trace[i+1])
};
using DescentVerdict = std::variant<Descending, DescentViolation>;

// Valid when each consecutive compare is Greater until a zero is reached.
DescentVerdict descending_witness(const std::vector<Ordinal>& alpha_seq);

} // namespace sct
