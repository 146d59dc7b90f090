#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sct/fgh.hpp"
#include "sct/lang.hpp"
#include "sct/ordinal.hpp"
#include "sct/rewrite.hpp"
#include "sct/scg.hpp"

namespace sct {

struct StemNotFound : Error { using Error::Error; };
struct MutualRecursion : Error { using Error::Error; };
struct NotTailRecursive : Error {
  std::string function;
  Position position;
  NotTailRecursive(const std::string& fn, Position pos)
      : Error("not tail-recursive: " + fn + " has a nested self-call at " +
              position_to_string(pos)),
        function(fn), position(std::move(pos)) {}
};
struct ShapeError : Error { using Error::Error; };

enum class StemCase { Disjoint, StrictlyAbove, Equal };

// The unique position sigma in t with t|_sigma fun-headed that a fun-headed
// subterm of the successor term (at s_pos) descends from, for a reduction
// with redex at rho.
std::pair<Position, StemCase> stem_of(const Term& t, const Position& rho, const Position& s_pos,
                                      const Program& p);

struct TracerParams {
  std::uint64_t closure_size = 0;
  std::uint64_t m = 0;     // fold trigger: bound on non-foldable multipath length
  std::uint32_t r = 1;     // max arity over defined functions
  std::uint64_t p_len = 0; // (m+1) * r
  std::uint64_t a = 1;     // max application-node count over bodies, floored at 1
};

TracerParams tracer_params(const Program& p, const Description& d);

// Per-subterm bookkeeping of the ordinal assignment: a multipath in the
// closure of length < m and the tuple sequence of a witnessing transition
// chain, flattened to < p_len entries for gamma_p.
struct SubtermTag {
  std::vector<std::string> fns;                   // f_0 .. f_l
  std::vector<std::vector<std::uint64_t>> tuples; // u_0 .. u_l
  std::vector<SizeChangeGraph> path;              // G_0 .. G_{l-1}
  std::optional<Call> pending;                    // set iff not proper
  bool proper = false;
  Ordinal gamma;                                  // gamma_p of the flattened tuples
};

struct TraceStep {
  std::uint64_t index = 0;
  std::optional<Position> rho; // reduction producing this state; none for step 0
  bool proper = false;
  Ordinal alpha;
  std::vector<std::pair<Position, Ordinal>> subterm_ordinals;
  std::vector<std::string> fold_events;
};

struct TraceResult {
  enum class Fail { None, Unsafe, Monotonicity, FoldFailure };
  TracerParams params;
  std::vector<TraceStep> steps;
  bool terminated = false;
  std::optional<std::uint64_t> value;
  std::uint64_t fold_count = 0;
  Fail fail = Fail::None;
  std::string detail;
  bool ok() const { return fail == Fail::None; }
};

// Ordinal-assignment tracer over the live reduction sequence: every step must
// weakly descend and every proper step strictly descend, with all ordinals
// below w^(w^w). Requires an ISCT description (folding needs the strict self
// arc); observed transitions are checked against it.
TraceResult trace_ordinals(const Program& p, const Description& d, const OpInterp& ops,
                           const std::vector<std::uint64_t>& entry_args, std::uint64_t fuel);

// The illustrative two-argument Ackermann assignment w^(w*u+v) * (2 if proper
// else 1), reproducing the direct example prefix; `steps` bounds the number
// of ordinals returned.
std::vector<Ordinal> ackermann_example_ordinals(std::uint64_t x, std::uint64_t y,
                                                std::size_t steps);

struct TailOrder {
  std::vector<std::string> order; // g_0 .. g_{k-1}; callees precede callers
  std::size_t entry_index = 0;

  std::size_t index_of(const std::string& fn) const;
};

// Orders functions so that later functions never occur in earlier bodies and
// verifies that every self-call is the root of its branch (no nesting inside
// another application) -- at most one per branch.
TailOrder tail_order(const Program& p);

// Tail-recursive variant: per-subterm ordinal w^(q*j) * (w * gamma_p(u) + 1)
// for proper subterms (without the +1 otherwise), where j is the head's index
// in the tail order and q = p_len + 2 is the level scale (w * gamma_p has
// exponent width p_len + 1, so adjacent levels need that much room). All
// ordinals stay below w^(q*(i+1)) for entry index i.
TraceResult trace_tail_ordinals(const Program& p, const Description& d, const OpInterp& ops,
                                const std::vector<std::uint64_t>& entry_args,
                                std::uint64_t fuel);

struct TailLengthBound {
  std::uint64_t ordinal_index = 0; // q*i + 2 for the level scale q
  std::optional<std::uint64_t> bound_value; // F_{p*i+2,f}(0) when it fits the budget
  std::uint64_t bound_steps = 0;
  std::uint64_t observed_proper_steps = 0;
  bool observed_terminated = false;
  std::optional<bool> holds; // observed < bound, when both sides are known
  std::string base_name;
};

// Length bound for tail-recursive runs: F_{p*i+2,f}(0) with
// f(x) = 2x + 2 + max{entry args, p}; reported symbolically when the
// step budget trips.
TailLengthBound tail_length_bound(const Program& p, const Description& d, const OpInterp& ops,
                                  const std::vector<std::uint64_t>& entry_args,
                                  std::uint64_t fuel, std::uint64_t step_budget);

} // namespace sct
