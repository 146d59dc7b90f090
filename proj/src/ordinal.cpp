#include "sct/ordinal.hpp"

#include <algorithm>
#include <cctype>

namespace sct {

namespace {

const std::vector<OrdTerm> kEmptyTerms;

std::shared_ptr<const std::vector<OrdTerm>> share(std::vector<OrdTerm> v) {
  if (v.empty()) return nullptr;
  return std::make_shared<const std::vector<OrdTerm>>(std::move(v));
}

} // namespace

Ordinal Ordinal::from_nat(std::uint64_t n) {
  if (n == 0) return Ordinal();
  return make({OrdTerm{Ordinal(), n}});
}

Ordinal Ordinal::omega() { return make({OrdTerm{from_nat(1), 1}}); }

Ordinal Ordinal::make(std::vector<OrdTerm> terms) {
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (terms[i].coeff == 0) throw Error("ordinal term with zero coefficient");
    if (i + 1 < terms.size() && compare(terms[i].exp, terms[i + 1].exp) != Ord3::Greater)
      throw Error("ordinal terms not strictly decreasing");
  }
  Ordinal r;
  r.terms_ = share(std::move(terms));
  return r;
}

bool Ordinal::is_zero() const { return !terms_ || terms_->empty(); }

bool Ordinal::is_nat() const {
  if (is_zero()) return true;
  return terms_->size() == 1 && terms_->front().exp.is_zero();
}

std::uint64_t Ordinal::nat_value() const {
  if (is_zero()) return 0;
  return terms_->front().coeff;
}

bool Ordinal::is_successor() const {
  return !is_zero() && terms_->back().exp.is_zero();
}

bool Ordinal::is_limit() const { return !is_zero() && !is_successor(); }

const std::vector<OrdTerm>& Ordinal::terms() const {
  return terms_ ? *terms_ : kEmptyTerms;
}

std::size_t Ordinal::term_count() const { return terms().size(); }

std::size_t Ordinal::depth() const {
  std::size_t d = 0;
  for (const auto& t : terms()) d = std::max(d, t.exp.depth() + 1);
  return d;
}

bool Ordinal::operator==(const Ordinal& other) const {
  return compare(*this, other) == Ord3::Equal;
}

Ord3 compare(const Ordinal& a, const Ordinal& b) {
  const auto& ta = a.terms();
  const auto& tb = b.terms();
  if (&ta == &tb) return Ord3::Equal;
  std::size_t n = std::min(ta.size(), tb.size());
  for (std::size_t i = 0; i < n; ++i) {
    // shared-structure shortcut: identical term vectors in exponents
    if (!(&ta[i].exp.terms() == &tb[i].exp.terms())) {
      Ord3 c = compare(ta[i].exp, tb[i].exp);
      if (c != Ord3::Equal) return c;
    }
    if (ta[i].coeff != tb[i].coeff)
      return ta[i].coeff < tb[i].coeff ? Ord3::Less : Ord3::Greater;
  }
  if (ta.size() == tb.size()) return Ord3::Equal;
  return ta.size() < tb.size() ? Ord3::Less : Ord3::Greater;
}

bool ord_less(const Ordinal& a, const Ordinal& b) { return compare(a, b) == Ord3::Less; }
bool ord_leq(const Ordinal& a, const Ordinal& b) { return compare(a, b) != Ord3::Greater; }

Ordinal add(const Ordinal& a, const Ordinal& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  const auto& ta = a.terms();
  const auto& tb = b.terms();
  const Ordinal& blead = tb.front().exp;
  // keep the terms of a with exponent >= lead(b); merge at equality
  std::vector<OrdTerm> out;
  out.reserve(ta.size() + tb.size());
  std::size_t i = 0;
  while (i < ta.size() && compare(ta[i].exp, blead) == Ord3::Greater) out.push_back(ta[i++]);
  if (i < ta.size() && compare(ta[i].exp, blead) == Ord3::Equal) {
    out.push_back(OrdTerm{blead, ta[i].coeff + tb.front().coeff});
    out.insert(out.end(), tb.begin() + 1, tb.end());
  } else {
    out.insert(out.end(), tb.begin(), tb.end());
  }
  return Ordinal::make(std::move(out));
}

Ordinal nat_sum(const Ordinal& a, const Ordinal& b) {
  if (a.is_zero()) return b;
  if (b.is_zero()) return a;
  const auto& ta = a.terms();
  const auto& tb = b.terms();
  std::vector<OrdTerm> out;
  out.reserve(ta.size() + tb.size());
  std::size_t i = 0, j = 0;
  while (i < ta.size() && j < tb.size()) {
    Ord3 c = compare(ta[i].exp, tb[j].exp);
    if (c == Ord3::Greater) {
      out.push_back(ta[i++]);
    } else if (c == Ord3::Less) {
      out.push_back(tb[j++]);
    } else {
      out.push_back(OrdTerm{ta[i].exp, ta[i].coeff + tb[j].coeff});
      ++i;
      ++j;
    }
  }
  while (i < ta.size()) out.push_back(ta[i++]);
  while (j < tb.size()) out.push_back(tb[j++]);
  return Ordinal::make(std::move(out));
}

Ordinal mul_nat(const Ordinal& a, std::uint64_t k) {
  if (k == 0 || a.is_zero()) return Ordinal();
  if (k == 1) return a;
  std::vector<OrdTerm> out = a.terms();
  out.front().coeff *= k;
  return Ordinal::make(std::move(out));
}

Ordinal omega_pow(const Ordinal& a) { return Ordinal::make({OrdTerm{a, 1}}); }

Ordinal mul(const Ordinal& a, const Ordinal& b) {
  if (a.is_zero() || b.is_zero()) return Ordinal();
  const Ordinal& alead = a.terms().front().exp;
  Ordinal acc; // built in decreasing exponent order
  std::vector<OrdTerm> out;
  for (const auto& tb : b.terms()) {
    if (tb.exp.is_zero()) {
      // a * finite: multiply the leading coefficient, keep the tail
      std::vector<OrdTerm> t = a.terms();
      t.front().coeff *= tb.coeff;
      for (auto& term : t) out.push_back(std::move(term));
    } else {
      out.push_back(OrdTerm{add(alead, tb.exp), tb.coeff});
    }
  }
  return Ordinal::make(std::move(out));
}

Ordinal fund_seq(const Ordinal& a, std::uint64_t x) {
  if (a.is_zero()) return Ordinal();
  std::vector<OrdTerm> t = a.terms();
  OrdTerm last = t.back();
  t.pop_back();
  if (last.exp.is_zero()) {
    // successor: drop one
    if (last.coeff > 1) t.push_back(OrdTerm{Ordinal(), last.coeff - 1});
    return Ordinal::make(std::move(t));
  }
  if (last.coeff > 1) t.push_back(OrdTerm{last.exp, last.coeff - 1});
  if (last.exp.is_successor()) {
    Ordinal beta = fund_seq(last.exp, 0); // predecessor of the exponent
    if (x > 0) t.push_back(OrdTerm{beta, x});
  } else {
    t.push_back(OrdTerm{fund_seq(last.exp, x), 1});
  }
  return Ordinal::make(std::move(t));
}

std::uint64_t mc(const Ordinal& a) {
  std::uint64_t m = 0;
  for (const auto& t : a.terms()) {
    m = std::max(m, t.coeff);
    m = std::max(m, mc(t.exp));
  }
  return m;
}

Ordinal omega_tower(unsigned d) {
  if (d > 4) throw Error("omega_tower depth guard: d <= 4");
  Ordinal r = Ordinal::from_nat(1);
  for (unsigned i = 0; i < d; ++i) r = omega_pow(r);
  return r;
}

PaddedSeq pad_sequence(const std::vector<std::uint64_t>& u, std::size_t p) {
  if (u.size() > p) throw LengthError("sequence length must be at most p");
  PaddedSeq s;
  s.entries.reserve(p);
  for (std::uint64_t v : u) s.entries.push_back({false, v});
  while (s.entries.size() < p) s.entries.push_back({true, 0});
  return s;
}

Ordinal gamma_p(const std::vector<std::uint64_t>& u, std::size_t p) {
  if (u.size() > p) throw LengthError("gamma_p: sequence length must be at most p");
  // entries i < len(u): omega^(p-1-i) * 2u_i; padded entries contribute
  // omega^(p-1-i) * 2w = omega^(p-i). Exponents decrease along i except at
  // the padding boundary, where the last entry term and the first padding
  // term share an exponent and their coefficients merge.
  std::vector<OrdTerm> out;
  out.reserve(p);
  auto push = [&out](Ordinal exp, std::uint64_t coeff) {
    if (!out.empty() && out.back().exp == exp) out.back().coeff += coeff;
    else out.push_back(OrdTerm{std::move(exp), coeff});
  };
  for (std::size_t i = 0; i < p; ++i) {
    if (i < u.size()) {
      if (u[i] == 0) continue;
      push(Ordinal::from_nat(p - 1 - i), 2 * u[i]);
    } else {
      push(Ordinal::from_nat(p - i), 1);
    }
  }
  return Ordinal::make(std::move(out));
}

bool is_above(const std::vector<std::uint64_t>& u, const std::vector<std::uint64_t>& v,
              std::size_t p) {
  PaddedSeq pu = pad_sequence(u, p);
  PaddedSeq pv = pad_sequence(v, p);
  for (std::size_t i = 0; i < p; ++i) {
    const auto& a = pu.entries[i];
    const auto& b = pv.entries[i];
    if (a.is_omega && b.is_omega) continue;
    if (a.is_omega) return true;  // omega > n
    if (b.is_omega) return false; // n < omega
    if (a.value != b.value) return a.value > b.value;
  }
  return false;
}

std::vector<Ordinal> repetition_form(const Ordinal& a) {
  std::vector<Ordinal> out;
  for (const OrdTerm& t : a.terms())
    for (std::uint64_t i = 0; i < t.coeff; ++i) out.push_back(t.exp);
  return out;
}

Ordinal from_repetition_form(const std::vector<Ordinal>& exponents) {
  Ordinal acc;
  for (const Ordinal& e : exponents) acc = add(acc, omega_pow(e));
  return acc;
}

std::string to_string(const Ordinal& a) {
  if (a.is_zero()) return "0";
  std::string out;
  bool first = true;
  for (const auto& t : a.terms()) {
    if (!first) out += "+";
    first = false;
    if (t.exp.is_zero()) {
      out += std::to_string(t.coeff);
      continue;
    }
    if (t.exp.is_nat() && t.exp.nat_value() == 1) {
      out += "w";
    } else {
      out += "w^(" + to_string(t.exp) + ")";
    }
    if (t.coeff > 1) out += "*" + std::to_string(t.coeff);
  }
  return out;
}

namespace {

struct OrdParser {
  const std::string& s;
  std::size_t i = 0;
  int depth = 0;

  explicit OrdParser(const std::string& text) : s(text) {}

  void skip_ws() {
    while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i;
  }

  [[noreturn]] void fail(const std::string& what) {
    throw Error("ordinal notation: " + what + " at offset " + std::to_string(i));
  }

  bool eat(char c) {
    skip_ws();
    if (i < s.size() && s[i] == c) {
      ++i;
      return true;
    }
    return false;
  }

  std::uint64_t number() {
    skip_ws();
    if (i >= s.size() || !std::isdigit(static_cast<unsigned char>(s[i]))) fail("expected number");
    std::uint64_t n = 0;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
      n = n * 10 + static_cast<std::uint64_t>(s[i] - '0');
      ++i;
    }
    return n;
  }

  // term := 'w' ['^' '(' ordinal ')'] ['*' nat] | nat
  Ordinal term() {
    skip_ws();
    if (i < s.size() && s[i] == 'w') {
      ++i;
      Ordinal e = Ordinal::from_nat(1);
      if (eat('^')) {
        if (!eat('(')) fail("expected '(' after '^'");
        if (++depth > 32) fail("nesting depth guard (<= 32)");
        e = ordinal();
        --depth;
        if (!eat(')')) fail("expected ')'");
      }
      std::uint64_t c = 1;
      if (eat('*')) c = number();
      if (c == 0) return Ordinal();
      return Ordinal::make({OrdTerm{e, c}});
    }
    return Ordinal::from_nat(number());
  }

  Ordinal ordinal() {
    Ordinal acc = term();
    while (eat('+')) acc = add(acc, term());
    return acc;
  }
};

} // namespace

Ordinal parse_ordinal(const std::string& text) {
  OrdParser p(text);
  Ordinal r = p.ordinal();
  p.skip_ws();
  if (p.i != text.size()) p.fail("trailing input");
  return r;
}

} // namespace sct
