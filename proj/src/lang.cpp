#include "sct/lang.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

namespace sct {

std::string position_to_string(const Position& p) {
  if (p.empty()) return "e";
  std::string out;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (i) out += ".";
    out += std::to_string(p[i]);
  }
  return out;
}

Position parse_position(const std::string& s) {
  if (s == "e" || s.empty()) return {};
  Position p;
  std::size_t i = 0;
  while (i < s.size()) {
    if (!std::isdigit(static_cast<unsigned char>(s[i])))
      throw Error("bad position: " + s);
    std::uint32_t n = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])))
      n = n * 10 + static_cast<std::uint32_t>(s[i++] - '0');
    p.push_back(n);
    if (i < s.size()) {
      if (s[i] != '.') throw Error("bad position: " + s);
      ++i;
    }
  }
  return p;
}

bool position_lex_less(const Position& a, const Position& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

bool position_is_prefix(const Position& prefix, const Position& of) {
  if (prefix.size() > of.size()) return false;
  return std::equal(prefix.begin(), prefix.end(), of.begin());
}

const FunctionDef* Program::find(const std::string& name) const {
  for (const auto& d : defs)
    if (d.name == name) return &d;
  return nullptr;
}

const FunctionDef& Program::at(const std::string& name) const {
  const FunctionDef* d = find(name);
  if (!d) throw UnknownIdentifier("unknown function: " + name);
  return *d;
}

// ---------------------------------------------------------------------------
// Lexer / parser
// ---------------------------------------------------------------------------

namespace {

struct Token {
  enum class Kind {
    Ident, Number, LParen, RParen, Comma, Equals, Plus, Minus, Lt, Le,
    AndAnd, OrOr, Bang, Star, Slash, KwIf, KwThen, KwElse, KwPrimitive, End
  };
  Kind kind;
  std::string text;
  std::uint64_t num = 0;
  int line = 1, col = 1;
};

struct Lexer {
  const std::string& src;
  std::size_t i = 0;
  int line = 1, col = 1;

  explicit Lexer(const std::string& s) : src(s) {}

  void advance() {
    if (src[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
    ++i;
  }

  Token next() {
    while (i < src.size()) {
      char c = src[i];
      if (c == '#') {
        while (i < src.size() && src[i] != '\n') advance();
        continue;
      }
      if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
        continue;
      }
      break;
    }
    Token t;
    t.line = line;
    t.col = col;
    if (i >= src.size()) {
      t.kind = Token::Kind::End;
      return t;
    }
    char c = src[i];
    auto one = [&](Token::Kind k) {
      t.kind = k;
      t.text = std::string(1, c);
      advance();
      return t;
    };
    if (std::isdigit(static_cast<unsigned char>(c))) {
      t.kind = Token::Kind::Number;
      std::uint64_t n = 0;
      while (i < src.size() && std::isdigit(static_cast<unsigned char>(src[i]))) {
        n = n * 10 + static_cast<std::uint64_t>(src[i] - '0');
        t.text += src[i];
        advance();
      }
      t.num = n;
      return t;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (i < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_' || src[i] == '\'')) {
        t.text += src[i];
        advance();
      }
      if (t.text == "if") t.kind = Token::Kind::KwIf;
      else if (t.text == "then") t.kind = Token::Kind::KwThen;
      else if (t.text == "else") t.kind = Token::Kind::KwElse;
      else if (t.text == "primitive") t.kind = Token::Kind::KwPrimitive;
      else t.kind = Token::Kind::Ident;
      return t;
    }
    switch (c) {
      case '(': return one(Token::Kind::LParen);
      case ')': return one(Token::Kind::RParen);
      case ',': return one(Token::Kind::Comma);
      case '=': return one(Token::Kind::Equals);
      case '+': return one(Token::Kind::Plus);
      case '-': return one(Token::Kind::Minus);
      case '*': return one(Token::Kind::Star);
      case '/': return one(Token::Kind::Slash);
      case '!': return one(Token::Kind::Bang);
      case '<': {
        advance();
        if (i < src.size() && src[i] == '=') {
          advance();
          t.kind = Token::Kind::Le;
          t.text = "<=";
        } else {
          t.kind = Token::Kind::Lt;
          t.text = "<";
        }
        return t;
      }
      case '&': {
        advance();
        if (i < src.size() && src[i] == '&') {
          advance();
          t.kind = Token::Kind::AndAnd;
          t.text = "&&";
          return t;
        }
        throw SyntaxError("expected '&&'", t.line, t.col);
      }
      case '|': {
        advance();
        if (i < src.size() && src[i] == '|') {
          advance();
          t.kind = Token::Kind::OrOr;
          t.text = "||";
          return t;
        }
        throw SyntaxError("expected '||'", t.line, t.col);
      }
      default:
        throw SyntaxError(std::string("unexpected character '") + c + "'", t.line, t.col);
    }
  }
};

struct Parser {
  static constexpr int kMaxDepth = 5000;
  std::vector<Token> toks;
  std::size_t pos = 0;
  int depth = 0;
  ParseOptions opts;

  struct DepthGuard {
    Parser& p;
    explicit DepthGuard(Parser& parser) : p(parser) {
      if (++p.depth > kMaxDepth) {
        const Token& t = p.peek();
        throw SyntaxError("expression nesting too deep", t.line, t.col);
      }
    }
    ~DepthGuard() { --p.depth; }
  };

  const Token& peek(std::size_t k = 0) const {
    return toks[std::min(pos + k, toks.size() - 1)];
  }
  const Token& get() { return toks[std::min(pos++, toks.size() - 1)]; }

  [[noreturn]] void fail(const std::string& expected) {
    const Token& t = peek();
    std::string got = t.kind == Token::Kind::End ? "end of input" : "'" + t.text + "'";
    throw SyntaxError("expected " + expected + ", got " + got, t.line, t.col);
  }

  void expect(Token::Kind k, const std::string& what) {
    if (peek().kind != k) fail(what);
    ++pos;
  }

  bool accept(Token::Kind k) {
    if (peek().kind == k) {
      ++pos;
      return true;
    }
    return false;
  }

  std::string ident() {
    if (peek().kind != Token::Kind::Ident) fail("identifier");
    return get().text;
  }

  // atom := ident ('=' (0|1) | '<' ident | '<=' ident)
  BoolExpr batom() {
    BoolExpr b;
    b.lhs = ident();
    switch (peek().kind) {
      case Token::Kind::Equals: {
        ++pos;
        if (peek().kind != Token::Kind::Number || (peek().num != 0 && peek().num != 1))
          fail("0 or 1 after '='");
        b.kind = get().num == 0 ? BoolExpr::Kind::EqZero : BoolExpr::Kind::EqOne;
        return b;
      }
      case Token::Kind::Lt:
        ++pos;
        b.kind = BoolExpr::Kind::Lt;
        b.rhs = ident();
        return b;
      case Token::Kind::Le:
        ++pos;
        b.kind = BoolExpr::Kind::Le;
        b.rhs = ident();
        return b;
      default:
        fail("'=', '<' or '<='");
    }
  }

  BoolExpr bfactor() {
    DepthGuard guard(*this);
    if (accept(Token::Kind::Bang)) {
      BoolExpr b;
      b.kind = BoolExpr::Kind::Not;
      b.kids.push_back(bfactor());
      return b;
    }
    if (accept(Token::Kind::LParen)) {
      BoolExpr b = bexpr();
      expect(Token::Kind::RParen, "')'");
      return b;
    }
    return batom();
  }

  BoolExpr bconj() {
    BoolExpr b = bfactor();
    while (accept(Token::Kind::AndAnd)) {
      BoolExpr r;
      r.kind = BoolExpr::Kind::And;
      r.kids.push_back(std::move(b));
      r.kids.push_back(bfactor());
      b = std::move(r);
    }
    return b;
  }

  BoolExpr bexpr() {
    BoolExpr b = bconj();
    while (accept(Token::Kind::OrOr)) {
      BoolExpr r;
      r.kind = BoolExpr::Kind::Or;
      r.kids.push_back(std::move(b));
      r.kids.push_back(bconj());
      b = std::move(r);
    }
    return b;
  }

  Expr expr(bool inside_apply) {
    DepthGuard guard(*this);
    if (peek().kind == Token::Kind::KwIf) {
      if (inside_apply && opts.strict_grammar) {
        const Token& t = peek();
        throw SyntaxError("conditional inside an application argument (strict grammar)",
                          t.line, t.col);
      }
      ++pos;
      Expr e;
      e.kind = Expr::Kind::If;
      e.cond = bexpr();
      expect(Token::Kind::KwThen, "'then'");
      e.kids.push_back(expr(inside_apply));
      expect(Token::Kind::KwElse, "'else'");
      e.kids.push_back(expr(inside_apply));
      return e;
    }
    return aexpr();
  }

  Expr aexpr() {
    Expr e;
    if (peek().kind == Token::Kind::Number) {
      e.kind = Expr::Kind::Num;
      e.value = get().num;
      return e;
    }
    if (peek().kind == Token::Kind::Star) { // wildcard: any fixed value works; 0 is canonical
      ++pos;
      e.kind = Expr::Kind::Num;
      e.value = 0;
      return e;
    }
    if (peek().kind != Token::Kind::Ident) fail("expression");
    std::string name = get().text;
    if (accept(Token::Kind::LParen)) {
      e.kind = Expr::Kind::Apply;
      e.name = name;
      if (!accept(Token::Kind::RParen)) {
        do {
          e.kids.push_back(expr(true));
        } while (accept(Token::Kind::Comma));
        expect(Token::Kind::RParen, "')'");
      }
      return e;
    }
    if (peek().kind == Token::Kind::Plus || peek().kind == Token::Kind::Minus) {
      bool plus = get().kind == Token::Kind::Plus;
      if (peek().kind != Token::Kind::Number || peek().num != 1)
        fail("'1' (only x+1 and x-1 are in the grammar)");
      ++pos;
      e.kind = plus ? Expr::Kind::ParamSucc : Expr::Kind::ParamPred;
      e.name = name;
      return e;
    }
    e.kind = Expr::Kind::Param;
    e.name = name;
    return e;
  }

  Program program() {
    Program p;
    while (peek().kind != Token::Kind::End) {
      if (peek().kind == Token::Kind::KwPrimitive) {
        ++pos;
        std::string name = ident();
        expect(Token::Kind::Slash, "'/'");
        if (peek().kind != Token::Kind::Number) fail("arity");
        std::uint64_t a = get().num;
        if (p.primitive_ops.count(name))
          throw DuplicateDefinition("duplicate primitive: " + name);
        p.primitive_ops[name] = static_cast<std::uint32_t>(a);
        continue;
      }
      FunctionDef d;
      d.name = ident();
      expect(Token::Kind::LParen, "'('");
      if (!accept(Token::Kind::RParen)) {
        do {
          d.params.push_back(ident());
        } while (accept(Token::Kind::Comma));
        expect(Token::Kind::RParen, "')'");
      }
      expect(Token::Kind::Equals, "'='");
      d.body = expr(false);
      p.defs.push_back(std::move(d));
    }
    if (p.defs.empty()) throw Error("empty program");
    return p;
  }
};

void check_expr(const Program& p, const FunctionDef& d, const Expr& e) {
  auto known_param = [&](const std::string& x) {
    return std::find(d.params.begin(), d.params.end(), x) != d.params.end();
  };
  switch (e.kind) {
    case Expr::Kind::Param:
    case Expr::Kind::ParamSucc:
    case Expr::Kind::ParamPred:
      if (!known_param(e.name))
        throw UnknownIdentifier("unknown parameter '" + e.name + "' in " + d.name);
      return;
    case Expr::Kind::Num:
      return;
    case Expr::Kind::Apply: {
      std::size_t arity;
      if (const FunctionDef* f = p.find(e.name)) {
        arity = f->params.size();
      } else if (auto it = p.primitive_ops.find(e.name); it != p.primitive_ops.end()) {
        arity = it->second;
      } else {
        throw UnknownIdentifier("unknown identifier '" + e.name + "' applied in " + d.name);
      }
      if (e.kids.size() != arity)
        throw ArityMismatch(e.name + " applied to " + std::to_string(e.kids.size()) +
                            " arguments, declared arity " + std::to_string(arity));
      for (const Expr& k : e.kids) check_expr(p, d, k);
      return;
    }
    case Expr::Kind::If: {
      // atoms reference declared parameters only
      std::function<void(const BoolExpr&)> chk = [&](const BoolExpr& b) {
        if (b.is_atom()) {
          if (!known_param(b.lhs))
            throw UnknownIdentifier("unknown parameter '" + b.lhs + "' in guard of " + d.name);
          if ((b.kind == BoolExpr::Kind::Lt || b.kind == BoolExpr::Kind::Le) && !known_param(b.rhs))
            throw UnknownIdentifier("unknown parameter '" + b.rhs + "' in guard of " + d.name);
          return;
        }
        for (const BoolExpr& k : b.kids) chk(k);
      };
      chk(*e.cond);
      for (const Expr& k : e.kids) check_expr(p, d, k);
      return;
    }
  }
}

void validate(const Program& p) {
  std::set<std::string> names;
  for (const auto& d : p.defs) {
    if (!names.insert(d.name).second)
      throw DuplicateDefinition("duplicate definition: " + d.name);
    if (p.primitive_ops.count(d.name))
      throw DuplicateDefinition("'" + d.name + "' is both defined and declared primitive");
    std::set<std::string> ps(d.params.begin(), d.params.end());
    if (ps.size() != d.params.size())
      throw DuplicateDefinition("duplicate parameter in " + d.name);
  }
  for (const auto& d : p.defs) check_expr(p, d, d.body);
}

} // namespace

Program parse_program(const std::string& text, const ParseOptions& opts) {
  Lexer lx(text);
  Parser ps;
  ps.opts = opts;
  for (;;) {
    Token t = lx.next();
    bool end = t.kind == Token::Kind::End;
    ps.toks.push_back(std::move(t));
    if (end) break;
  }
  Program p = ps.program();
  validate(p);
  return p;
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

std::string pretty_bool(const BoolExpr& b) {
  switch (b.kind) {
    case BoolExpr::Kind::EqZero: return b.lhs + " = 0";
    case BoolExpr::Kind::EqOne: return b.lhs + " = 1";
    case BoolExpr::Kind::Lt: return b.lhs + " < " + b.rhs;
    case BoolExpr::Kind::Le: return b.lhs + " <= " + b.rhs;
    case BoolExpr::Kind::Not:
      return "!(" + pretty_bool(b.kids[0]) + ")";
    case BoolExpr::Kind::And: {
      auto side = [](const BoolExpr& k) {
        return k.kind == BoolExpr::Kind::Or ? "(" + pretty_bool(k) + ")" : pretty_bool(k);
      };
      return side(b.kids[0]) + " && " + side(b.kids[1]);
    }
    case BoolExpr::Kind::Or:
      return pretty_bool(b.kids[0]) + " || " + pretty_bool(b.kids[1]);
  }
  return "?";
}

std::string pretty_expr(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Param: return e.name;
    case Expr::Kind::ParamSucc: return e.name + " + 1";
    case Expr::Kind::ParamPred: return e.name + " - 1";
    case Expr::Kind::Num: return std::to_string(e.value);
    case Expr::Kind::Apply: {
      std::string out = e.name + "(";
      for (std::size_t i = 0; i < e.kids.size(); ++i) {
        if (i) out += ", ";
        out += pretty_expr(e.kids[i]);
      }
      return out + ")";
    }
    case Expr::Kind::If:
      return "if " + pretty_bool(*e.cond) + " then " + pretty_expr(e.kids[0]) + " else " +
             pretty_expr(e.kids[1]);
  }
  return "?";
}

std::string pretty_program(const Program& p) {
  std::ostringstream out;
  for (const auto& [name, arity] : p.primitive_ops)
    out << "primitive " << name << "/" << arity << "\n";
  for (const auto& d : p.defs) {
    out << d.name << "(";
    for (std::size_t i = 0; i < d.params.size(); ++i) {
      if (i) out << ", ";
      out << d.params[i];
    }
    out << ") =";
    // one line per branch of the top-level conditional cascade
    const Expr* e = &d.body;
    std::string indent = "  ";
    out << "\n" << indent;
    while (e->kind == Expr::Kind::If) {
      out << "if " << pretty_bool(*e->cond) << " then " << pretty_expr(e->kids[0]) << "\n"
          << indent << "else ";
      e = &e->kids[1];
    }
    out << pretty_expr(*e) << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Positions, calls, path conditions
// ---------------------------------------------------------------------------

namespace {

void walk_positions(const Expr& e, Position& here, std::vector<Position>& out) {
  out.push_back(here);
  const std::vector<Expr>* kids = nullptr;
  if (e.kind == Expr::Kind::Apply || e.kind == Expr::Kind::If) kids = &e.kids;
  if (!kids) return;
  for (std::uint32_t i = 0; i < kids->size(); ++i) {
    here.push_back(i);
    walk_positions((*kids)[i], here, out);
    here.pop_back();
  }
}

} // namespace

std::vector<Position> enumerate_positions(const Expr& e) {
  std::vector<Position> out;
  Position here;
  walk_positions(e, here, out);
  return out;
}

const Expr& subexpr_at(const Expr& e, const Position& tau) {
  const Expr* cur = &e;
  for (std::uint32_t step : tau) {
    if (cur->kind != Expr::Kind::Apply && cur->kind != Expr::Kind::If)
      throw InvalidPosition("position descends into a leaf");
    if (step >= cur->kids.size())
      throw InvalidPosition("position index out of range");
    cur = &cur->kids[step];
  }
  return *cur;
}

std::vector<Call> calls_of(const Program& p) {
  std::vector<Call> out;
  for (const auto& d : p.defs) {
    for (const Position& tau : enumerate_positions(d.body)) {
      const Expr& e = subexpr_at(d.body, tau);
      if (e.kind == Expr::Kind::Apply && p.is_fun(e.name))
        out.push_back(Call{tau, d.name, e.name});
    }
  }
  return out;
}

namespace {

// Decompose a branch decision into atom literals where sound.
void collect_literals(const BoolExpr& b, bool polarity,
                      std::vector<std::pair<BoolExpr, bool>>& out) {
  if (b.is_atom()) {
    out.emplace_back(b, polarity);
    return;
  }
  switch (b.kind) {
    case BoolExpr::Kind::Not:
      collect_literals(b.kids[0], !polarity, out);
      return;
    case BoolExpr::Kind::And:
      if (polarity)
        for (const auto& k : b.kids) collect_literals(k, true, out);
      return; // negated conjunction: nothing sound to extract
    case BoolExpr::Kind::Or:
      if (!polarity)
        for (const auto& k : b.kids) collect_literals(k, false, out);
      return;
    default:
      return;
  }
}

} // namespace

PathCondition path_condition(const FunctionDef& f, const Position& tau) {
  PathCondition c;
  const Expr* cur = &f.body;
  for (std::uint32_t step : tau) {
    if (cur->kind == Expr::Kind::If) {
      collect_literals(*cur->cond, step == 0, c.literals);
    } else if (cur->kind != Expr::Kind::Apply) {
      throw InvalidPosition("position descends into a leaf");
    }
    if (step >= cur->kids.size()) throw InvalidPosition("position index out of range");
    cur = &cur->kids[step];
  }
  return c;
}

bool entails_positive(const PathCondition& c, const std::string& x) {
  // Lower bounds by fixpoint over the literal facts:
  //   x=1        -> lb(x) >= 1
  //   !(x=0)     -> lb(x) >= 1
  //   a<b        -> lb(b) >= lb(a)+1
  //   a<=b       -> lb(b) >= lb(a)
  //   !(a<b)     -> lb(a) >= lb(b)
  //   !(a<=b)    -> lb(a) >= lb(b)+1
  std::map<std::string, std::uint64_t> lb;
  struct Edge { std::string from, to; std::uint64_t delta; };
  std::vector<Edge> edges;
  for (const auto& [atom, pol] : c.literals) {
    switch (atom.kind) {
      case BoolExpr::Kind::EqZero:
        if (!pol) lb[atom.lhs] = std::max<std::uint64_t>(lb[atom.lhs], 1);
        break;
      case BoolExpr::Kind::EqOne:
        if (pol) lb[atom.lhs] = std::max<std::uint64_t>(lb[atom.lhs], 1);
        break;
      case BoolExpr::Kind::Lt:
        if (pol) edges.push_back({atom.lhs, atom.rhs, 1});
        else edges.push_back({atom.rhs, atom.lhs, 0});
        break;
      case BoolExpr::Kind::Le:
        if (pol) edges.push_back({atom.lhs, atom.rhs, 0});
        else edges.push_back({atom.rhs, atom.lhs, 1});
        break;
      default:
        break;
    }
  }
  for (const Edge& e : edges) {
    lb.try_emplace(e.from, 0);
    lb.try_emplace(e.to, 0);
  }
  bool changed = true;
  std::size_t rounds = 0;
  while (changed && rounds++ <= edges.size() + 1) {
    changed = false;
    for (const Edge& e : edges) {
      std::uint64_t v = lb[e.from] + e.delta;
      if (v > lb[e.to]) {
        lb[e.to] = v;
        changed = true;
      }
    }
  }
  auto it = lb.find(x);
  return it != lb.end() && it->second >= 1;
}

bool eval_bool(const BoolExpr& b, const std::vector<std::string>& params,
               const std::vector<std::uint64_t>& u) {
  auto val = [&](const std::string& x) -> std::uint64_t {
    for (std::size_t i = 0; i < params.size(); ++i)
      if (params[i] == x) return u[i];
    throw UnknownIdentifier("unknown parameter in guard: " + x);
  };
  switch (b.kind) {
    case BoolExpr::Kind::EqZero: return val(b.lhs) == 0;
    case BoolExpr::Kind::EqOne: return val(b.lhs) == 1;
    case BoolExpr::Kind::Lt: return val(b.lhs) < val(b.rhs);
    case BoolExpr::Kind::Le: return val(b.lhs) <= val(b.rhs);
    case BoolExpr::Kind::And: return eval_bool(b.kids[0], params, u) && eval_bool(b.kids[1], params, u);
    case BoolExpr::Kind::Or: return eval_bool(b.kids[0], params, u) || eval_bool(b.kids[1], params, u);
    case BoolExpr::Kind::Not: return !eval_bool(b.kids[0], params, u);
  }
  return false;
}

bool path_selected(const FunctionDef& f, const Position& tau,
                   const std::vector<std::uint64_t>& u) {
  const Expr* cur = &f.body;
  for (std::uint32_t step : tau) {
    if (cur->kind == Expr::Kind::If) {
      bool cond = eval_bool(*cur->cond, f.params, u);
      if (cond != (step == 0)) return false;
    }
    if (step >= cur->kids.size()) throw InvalidPosition("position index out of range");
    cur = &cur->kids[step];
  }
  return true;
}

} // namespace sct
