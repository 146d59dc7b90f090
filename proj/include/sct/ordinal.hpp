#pragma once

#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace sct {

struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct LengthError : Error {
  using Error::Error;
};

struct OrdTerm;

// Ordinal notation below epsilon_0 in Cantor normal form with coefficients:
// a list of (exponent, coefficient) pairs with strictly decreasing exponents
// and coefficients >= 1. The empty list is 0. Term storage is immutable and
// shared, so copies are cheap and large notations (gamma_p paddings) can be
// passed around freely.
class Ordinal {
public:
  Ordinal() = default;

  static Ordinal zero() { return Ordinal(); }
  static Ordinal from_nat(std::uint64_t n);
  static Ordinal omega();
  // omega^exp * coeff + rest-of-terms; validates CNF ordering.
  static Ordinal make(std::vector<OrdTerm> terms);

  bool is_zero() const;
  bool is_nat() const;             // 0 or a finite ordinal
  std::uint64_t nat_value() const; // pre: is_nat()
  bool is_successor() const;
  bool is_limit() const; // nonzero and not a successor

  const std::vector<OrdTerm>& terms() const;
  std::size_t term_count() const;
  std::size_t depth() const;

  bool operator==(const Ordinal& other) const;
  bool operator!=(const Ordinal& other) const { return !(*this == other); }

private:
  std::shared_ptr<const std::vector<OrdTerm>> terms_;
};

struct OrdTerm {
  Ordinal exp;
  std::uint64_t coeff = 1;
  bool operator==(const OrdTerm& o) const { return coeff == o.coeff && exp == o.exp; }
};

enum class Ord3 { Less, Equal, Greater };

Ord3 compare(const Ordinal& a, const Ordinal& b);
bool ord_less(const Ordinal& a, const Ordinal& b);
bool ord_leq(const Ordinal& a, const Ordinal& b);

// Ordinary (non-commutative) ordinal addition.
Ordinal add(const Ordinal& a, const Ordinal& b);
// Natural (Hessenberg) sum: termwise merge, commutative and strictly monotone.
Ordinal nat_sum(const Ordinal& a, const Ordinal& b);
// Ordinal multiplication on normal forms.
Ordinal mul(const Ordinal& a, const Ordinal& b);
// a * k for a natural k.
Ordinal mul_nat(const Ordinal& a, std::uint64_t k);
// omega^a
Ordinal omega_pow(const Ordinal& a);

// Fundamental sequence: 0[x] = 0, (a+1)[x] = a, and the two limit clauses.
Ordinal fund_seq(const Ordinal& a, std::uint64_t x);

// Maximal coefficient appearing anywhere in the notation.
std::uint64_t mc(const Ordinal& a);

// Finite omega-tower: 1, w, w^w, w^(w^w), ... Guarded at d <= 4.
Ordinal omega_tower(unsigned d);

// A finite sequence over N extended with omega entries, padded to length p;
// once an omega appears every later entry is omega.
struct PaddedSeq {
  struct Entry {
    bool is_omega = false;
    std::uint64_t value = 0;
  };
  std::vector<Entry> entries;
};

PaddedSeq pad_sequence(const std::vector<std::uint64_t>& u, std::size_t p);

// gamma_p(u) = natural sum over i < p of omega^(p-1-i) * (2 * u_p(i)),
// where a padded omega entry contributes omega^(p-i).
Ordinal gamma_p(const std::vector<std::uint64_t>& u, std::size_t p);

// Lexicographic comparison of the padded sequences, with n < omega for all n.
bool is_above(const std::vector<std::uint64_t>& u, const std::vector<std::uint64_t>& v,
              std::size_t p);

// Conversion between the coefficient normal form and the repetition form
// w^a0 + ... + w^an with non-increasing exponents.
std::vector<Ordinal> repetition_form(const Ordinal& a);
Ordinal from_repetition_form(const std::vector<Ordinal>& exponents);

// Textual notation: 0, w, w^(<ord>)*<k>, terms joined by '+', e.g. "w^(w*2+3)*2".
std::string to_string(const Ordinal& a);
Ordinal parse_ordinal(const std::string& text);

} // namespace sct
