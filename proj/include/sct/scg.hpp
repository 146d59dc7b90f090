#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "sct/lang.hpp"
#include "sct/rewrite.hpp"

namespace sct {

struct CompositionMismatch : Error { using Error::Error; };
struct RamseyOverflow : Error { using Error::Error; };

// A constraint between a source and a target parameter: strict (>) or
// non-strict (>=). Indices are parameter positions.
struct Arc {
  std::uint32_t from = 0, to = 0;
  bool strict = false;
  auto operator<=>(const Arc&) const = default;
};

// Bipartite constraint graph between the parameters of `source` and `target`.
// At most one arc per (from, to) pair; a strict arc shadows a non-strict one.
// Arcs are kept sorted, so equality is set equality.
struct SizeChangeGraph {
  std::string source, target;
  std::uint32_t source_arity = 0, target_arity = 0;
  std::vector<Arc> arcs;

  bool has_strict_self_arc() const;
  auto operator<=>(const SizeChangeGraph&) const = default;
};

SizeChangeGraph make_graph(std::string source, std::uint32_t source_arity, std::string target,
                           std::uint32_t target_arity, std::vector<Arc> arcs);

std::string graph_to_string(const SizeChangeGraph& g);

// Composition G0;G1: an arc x->z is strict iff some intermediate path carries
// a strict edge; non-strict iff a path exists and none is strict.
SizeChangeGraph compose(const SizeChangeGraph& g0, const SizeChangeGraph& g1);

// Least set containing gs and closed under composition of composable pairs,
// in canonical (source, target, arcs) order.
std::vector<SizeChangeGraph> closure(const std::vector<SizeChangeGraph>& gs);

bool is_idempotent(const SizeChangeGraph& g);

struct Isct {};
struct NotIsct {
  SizeChangeGraph witness;
};
using IsctVerdict = std::variant<Isct, NotIsct>;

// One size-change graph per call of the program.
struct Description {
  std::vector<std::pair<Call, SizeChangeGraph>> graphs; // in calls_of order

  const SizeChangeGraph* graph_for(const Call& c) const;
  std::vector<SizeChangeGraph> range() const;
};

// Every idempotent graph in the closure must carry a strict self arc; returns
// the first (canonical order) counterexample otherwise.
IsctVerdict check_isct(const Description& d);
bool is_isct(const Description& d);

// Syntactic safe-arc inference: a plain parameter argument yields a non-strict
// arc, x-1 yields a strict arc when the branch path entails x > 0, everything
// else yields no arc.
Description extract_description(const Program& p);

// True iff every arc of the graph bound to t.call holds on the observed
// numeral transition.
bool check_safety_runtime(const Description& d, const StateTransition& t);

// Upper bound on R(3;c): least length at which a multipath over a closure of
// size c is guaranteed foldable. 1 + sum_{k<=c} c!/k! (= floor(c!*e) + 1).
// Guarded: c <= 8.
std::uint64_t ramsey_bound(std::uint64_t c);

struct Multipath {
  std::vector<SizeChangeGraph> graphs; // consecutive graphs compose
};

Multipath make_multipath(std::vector<SizeChangeGraph> graphs);
SizeChangeGraph compose_segment(const Multipath& m, std::size_t begin, std::size_t end);

// A decomposition A B C (with an optional preserved remainder D) such that
// compose(B) = compose(C) = compose(BC) = H; H is then idempotent.
// B = graphs[i..j), C = graphs[j..k). A plain fold has k = length (C runs to
// the end); when no such split exists a monochromatic-triangle fold with
// k < length is returned instead.
struct Folding {
  std::size_t i = 0, j = 0, k = 0;
  SizeChangeGraph h;
  bool exact_cover() const { return k_is_end; }
  bool k_is_end = false;
};

std::optional<Folding> find_folding(const Multipath& m);

// The generalized Ackermann description: graphs A_1..A_{n+1} over parameters
// x_1..x_{n+1}, bound to the program's calls.
std::pair<Program, Description> ackermann_description(unsigned n);

// Maximal-strict-count thread through consecutive graphs, spanning some
// suffix of the multipath.
struct DescentThread {
  std::size_t start = 0;                // first graph index covered
  std::vector<std::uint32_t> params;    // length: len - start + 1
  std::uint64_t strict_count = 0;
};

std::optional<DescentThread> descent_search(const Multipath& m);

// Description file format:
//   graph <id> : <f> -> <g>
//   x<i> ->> x<j>        strict
//   x<i> -> x<j>         non-strict
//   call <pos> <f> <g> uses <id>
std::string description_to_text(const Description& d);
Description description_from_text(const std::string& text, const Program& p);

} // namespace sct
