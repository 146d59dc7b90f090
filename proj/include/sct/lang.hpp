#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sct/ordinal.hpp" // Error

namespace sct {

struct SyntaxError : Error {
  int line = 0, col = 0;
  SyntaxError(const std::string& msg, int l, int c)
      : Error("line " + std::to_string(l) + ", col " + std::to_string(c) + ": " + msg),
        line(l), col(c) {}
};
struct ArityMismatch : Error { using Error::Error; };
struct DuplicateDefinition : Error { using Error::Error; };
struct UnknownIdentifier : Error { using Error::Error; };
struct InvalidPosition : Error { using Error::Error; };

// Position of a subexpression / subterm: a path of child indices. For
// if-then-else nodes index 0 is the then branch and 1 the else branch;
// the condition is not addressable.
using Position = std::vector<std::uint32_t>;

std::string position_to_string(const Position& p); // "e" for the root
Position parse_position(const std::string& s);
// Lexicographic path order (matches depth-first left-to-right traversal).
bool position_lex_less(const Position& a, const Position& b);
bool position_is_prefix(const Position& prefix, const Position& of);

struct BoolExpr {
  enum class Kind { EqZero, EqOne, Lt, Le, And, Or, Not };
  Kind kind = Kind::EqZero;
  std::string lhs, rhs;        // atom operands (parameters)
  std::vector<BoolExpr> kids;  // And/Or: 2, Not: 1

  bool is_atom() const {
    return kind == Kind::EqZero || kind == Kind::EqOne || kind == Kind::Lt || kind == Kind::Le;
  }
  bool operator==(const BoolExpr&) const = default;
};

struct Expr {
  enum class Kind { Param, ParamSucc, ParamPred, Num, Apply, If };
  Kind kind = Kind::Num;
  std::string name;             // Param*/Apply
  std::uint64_t value = 0;      // Num
  std::optional<BoolExpr> cond; // If
  std::vector<Expr> kids;       // Apply args; If: {then, else}

  bool operator==(const Expr&) const = default;
};

struct FunctionDef {
  std::string name;
  std::vector<std::string> params;
  Expr body;
  bool operator==(const FunctionDef&) const = default;
};

struct Program {
  std::vector<FunctionDef> defs;                 // defs[0] is the entry function
  std::map<std::string, std::uint32_t> primitive_ops; // declared name -> arity

  const FunctionDef* find(const std::string& name) const;
  const FunctionDef& at(const std::string& name) const;
  bool is_fun(const std::string& name) const { return find(name) != nullptr; }
  bool is_op(const std::string& name) const { return primitive_ops.count(name) > 0; }
  const FunctionDef& entry() const { return defs.front(); }
  bool operator==(const Program&) const = default;
};

struct Call {
  Position pos; // within the body of source
  std::string source, target;
  bool operator==(const Call&) const = default;
};

struct PathCondition {
  // Branch literals on the path from the body root to a position: the atom
  // together with its polarity (true = then branch). Compound conditions are
  // decomposed where sound (positive conjunctions, negated disjunctions);
  // non-decomposable parts contribute nothing.
  std::vector<std::pair<BoolExpr, bool>> literals;
};

struct ParseOptions {
  // Rejects conditionals nested inside application arguments.
  bool strict_grammar = true;
};

Program parse_program(const std::string& text, const ParseOptions& opts = {});
std::string pretty_program(const Program& p);
std::string pretty_expr(const Expr& e);
std::string pretty_bool(const BoolExpr& b);

// All positions of e in depth-first (lexicographic) order, root first.
std::vector<Position> enumerate_positions(const Expr& e);
const Expr& subexpr_at(const Expr& e, const Position& tau);

std::vector<Call> calls_of(const Program& p);

PathCondition path_condition(const FunctionDef& f, const Position& tau);
// True when the literals entail x > 0 (sound, incomplete: direct facts plus
// transitive closure over <= / < chains among atoms).
bool entails_positive(const PathCondition& c, const std::string& x);
// True when the branch path to tau is selected under the valuation u.
bool path_selected(const FunctionDef& f, const Position& tau,
                   const std::vector<std::uint64_t>& u);

bool eval_bool(const BoolExpr& b, const std::vector<std::string>& params,
               const std::vector<std::uint64_t>& u);

} // namespace sct
