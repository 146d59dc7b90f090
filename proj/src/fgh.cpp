#include "sct/fgh.hpp"

#include <sstream>

namespace sct {

BaseFunction base_succ() {
  return BaseFunction{"succ", [](std::uint64_t x) { return x + 1; }};
}

BaseFunction base_affine(std::uint64_t a, std::uint64_t b) {
  std::string name = "affine:" + std::to_string(a) + "," + std::to_string(b);
  return BaseFunction{name, [a, b](std::uint64_t x) {
                        unsigned __int128 v = static_cast<unsigned __int128>(a) * x + b;
                        if (v > UINT64_MAX) throw Error("base function value overflow");
                        return static_cast<std::uint64_t>(v);
                      }};
}

BaseFunction base_table(std::vector<std::uint64_t> values) {
  if (values.empty()) throw Error("table base function needs at least one value");
  std::string name = "table:";
  for (std::size_t i = 0; i < values.size(); ++i)
    name += (i ? "," : "") + std::to_string(values[i]);
  return BaseFunction{name, [values = std::move(values)](std::uint64_t x) {
                        return values[std::min<std::size_t>(x, values.size() - 1)];
                      }};
}

BaseFunction parse_base_spec(const std::string& spec) {
  if (spec == "succ") return base_succ();
  if (spec.rfind("affine:", 0) == 0) {
    std::string rest = spec.substr(7);
    auto comma = rest.find(',');
    if (comma == std::string::npos) throw Error("base spec: expected affine:a,b");
    return base_affine(std::stoull(rest.substr(0, comma)), std::stoull(rest.substr(comma + 1)));
  }
  if (spec.rfind("table:", 0) == 0) {
    std::vector<std::uint64_t> values;
    std::istringstream in(spec.substr(6));
    std::string item;
    while (std::getline(in, item, ',')) values.push_back(std::stoull(item));
    return base_table(std::move(values));
  }
  throw Error("unknown base function spec: " + spec + " (use succ, affine:a,b or table:v0,...)");
}

FghState k_step(const BaseFunction& f, FghState s) {
  if (s.stack.empty()) return s;
  Ordinal top = s.stack.back();
  s.stack.pop_back();
  if (top.is_zero()) {
    s.value = f.fn(s.value);
  } else if (top.is_successor()) {
    Ordinal beta = fund_seq(top, 0); // predecessor
    std::uint64_t copies = s.value + 1;
    for (std::uint64_t i = 0; i < copies; ++i) s.stack.push_back(beta);
    s.value = 1;
  } else {
    s.stack.push_back(fund_seq(top, s.value));
  }
  return s;
}

Ordinal fgh_measure(const FghState& s) {
  // reachable stacks are non-increasing, so grouping adjacent runs yields the
  // normal form in one pass; arbitrary stacks fall back to ordinary addition
  std::vector<OrdTerm> terms;
  for (const Ordinal& a : s.stack) {
    if (terms.empty()) {
      terms.push_back({a, 1});
      continue;
    }
    Ord3 c = compare(terms.back().exp, a);
    if (c == Ord3::Equal) {
      ++terms.back().coeff;
    } else if (c == Ord3::Greater) {
      terms.push_back({a, 1});
    } else {
      Ordinal acc = Ordinal::make(std::move(terms));
      acc = add(acc, omega_pow(a));
      terms = acc.terms();
    }
  }
  return Ordinal::make(std::move(terms));
}

FghOutcome compute_F(const BaseFunction& f, const Ordinal& alpha, std::uint64_t x,
                     std::uint64_t step_budget, std::vector<FghTraceEntry>* trace) {
  FghState s;
  s.stack.push_back(alpha);
  s.value = x;
  std::uint64_t steps = 0;
  if (trace) trace->push_back(FghTraceEntry{0, s, fgh_measure(s)});
  while (!s.stack.empty()) {
    // every stack entry needs at least one step to clear, so bail before a
    // push that the remaining budget could never consume
    std::uint64_t remaining = steps < step_budget ? step_budget - steps : 0;
    bool room = s.stack.size() <= remaining;
    if (room && s.stack.back().is_successor())
      room = s.value < remaining && s.stack.size() - 1 + s.value + 1 <= remaining;
    if (!room) return FghBudget{std::move(s), steps, false};
    try {
      s = k_step(f, std::move(s));
    } catch (const Error&) {
      return FghBudget{FghState{}, steps, true};
    }
    ++steps;
    if (trace) trace->push_back(FghTraceEntry{steps, s, fgh_measure(s)});
  }
  return FghValue{s.value, steps};
}

Ordinal alpha_of(const std::vector<std::uint64_t>& xs) {
  if (xs.empty()) throw Error("alpha_of requires n >= 1");
  std::size_t n = xs.size();
  std::vector<OrdTerm> terms;
  for (std::size_t i = 0; i < n; ++i)
    if (xs[i] > 0) terms.push_back(OrdTerm{Ordinal::from_nat(n - 1 - i), xs[i]});
  return Ordinal::make(std::move(terms));
}

std::string gen_ackermann_source(unsigned n) {
  if (n < 1) throw Error("gen_ackermann_source requires n >= 1");
  std::ostringstream out;
  auto xi = [](unsigned i) { return "x" + std::to_string(i); };
  out << "primitive f/1\n";
  out << "A(";
  for (unsigned i = 1; i <= n; ++i) out << xi(i) << ", ";
  out << "y) =\n";
  // all-zero base case
  out << "  if ";
  for (unsigned i = 1; i <= n; ++i) {
    if (i > 1) out << " && ";
    out << xi(i) << " = 0";
  }
  out << " then f(y)\n";
  // branches tau_1 .. tau_{n-1}: x_i > 0, x_{i+1} = ... = x_n = 0
  for (unsigned i = 1; i < n; ++i) {
    out << "  else if !(" << xi(i) << " = 0)";
    for (unsigned k = i + 1; k <= n; ++k) out << " && " << xi(k) << " = 0";
    out << " then A(";
    for (unsigned k = 1; k < i; ++k) out << xi(k) << ", ";
    out << xi(i) << " - 1, y";
    for (unsigned k = i + 2; k <= n; ++k) out << ", " << xi(k);
    out << ", y)\n";
  }
  // tau_n: x_n > 0 and y = 0
  out << "  else if !(" << xi(n) << " = 0) && y = 0 then A(";
  for (unsigned k = 1; k < n; ++k) out << xi(k) << ", ";
  out << xi(n) << " - 1, 1)\n";
  // tau_0 with the nested inner call
  out << "  else A(";
  for (unsigned k = 1; k < n; ++k) out << xi(k) << ", ";
  out << xi(n) << " - 1, A(";
  for (unsigned k = 1; k <= n; ++k) out << xi(k) << ", ";
  out << "y - 1))\n";
  return out.str();
}

Program gen_ackermann_program(unsigned n) { return parse_program(gen_ackermann_source(n)); }

FaReport check_fa_equivalence(unsigned n, const BaseFunction& f,
                              const std::vector<std::uint64_t>& x_bounds, std::uint64_t y_bound,
                              std::uint64_t fuel, std::uint64_t step_budget) {
  if (x_bounds.size() != n) throw Error("check_fa_equivalence: need one bound per argument");
  Program p = gen_ackermann_program(n);
  OpInterp ops = make_op_table(p, f.fn);
  FaReport report;
  std::vector<std::uint64_t> xs(n, 0);
  for (;;) {
    for (std::uint64_t y = 0; y <= y_bound; ++y) {
      FaEntry e;
      e.xs = xs;
      e.y = y;
      std::vector<std::uint64_t> args = xs;
      args.push_back(y);
      ReduceOutcome r = reduce(make_call_term("A", args), p, ops, fuel);
      if (const auto* v = std::get_if<ReduceValue>(&r)) {
        e.interp_value = v->value;
        e.interp_steps = v->steps;
        e.interp_proper_steps = v->proper_steps;
      } else {
        const auto& oof = std::get<ReduceOutOfFuel>(r);
        e.interp_steps = oof.steps;
        e.interp_proper_steps = oof.proper_steps;
      }
      FghOutcome k = compute_F(f, alpha_of(xs), y, step_budget);
      if (const auto* v = std::get_if<FghValue>(&k)) {
        e.k_value = v->value;
        e.k_steps = v->steps;
      } else {
        e.k_steps = std::get<FghBudget>(k).steps;
      }
      if (!e.agree()) ++report.disagreements;
      if (!e.both_complete()) ++report.budget_tuples;
      if (e.both_complete() && e.interp_proper_steps == e.k_steps) ++report.step_matches;
      report.entries.push_back(std::move(e));
    }
    // next tuple within bounds
    std::size_t i = n;
    while (i-- > 0) {
      if (xs[i] < x_bounds[i]) {
        ++xs[i];
        std::fill(xs.begin() + static_cast<std::ptrdiff_t>(i) + 1, xs.end(), 0);
        break;
      }
      if (i == 0) return report;
    }
  }
}

DescentVerdict descending_witness(const std::vector<Ordinal>& alpha_seq) {
  for (std::size_t i = 0; i < alpha_seq.size(); ++i) {
    if (alpha_seq[i].is_zero()) break;
    if (i + 1 == alpha_seq.size()) break; // positive prefix may end mid-flight
    if (compare(alpha_seq[i], alpha_seq[i + 1]) != Ord3::Greater) return DescentViolation{i};
  }
  return Descending{};
}

} // namespace sct
