#include "sct/bounds.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

namespace sct {

namespace {

Term* term_at_mut(Term& t, const Position& pos) {
  Term* cur = &t;
  for (std::uint32_t step : pos) cur = &cur->args[step];
  return cur;
}

void fun_positions_rec(const Term& t, const Program& p, Position& here,
                       std::vector<Position>& out) {
  if (t.is_num()) return;
  if (p.is_fun(t.head)) out.push_back(here);
  for (std::uint32_t i = 0; i < t.args.size(); ++i) {
    here.push_back(i);
    fun_positions_rec(t.args[i], p, here, out);
    here.pop_back();
  }
}

std::vector<Position> fun_positions(const Term& t, const Program& p) {
  std::vector<Position> out;
  Position here;
  fun_positions_rec(t, p, here, out);
  return out;
}

bool term_is_proper(const Term& t) {
  for (const Term& a : t.args)
    if (!a.is_num()) return false;
  return true;
}

std::vector<std::uint64_t> numeral_args(const Term& t) {
  std::vector<std::uint64_t> out;
  out.reserve(t.args.size());
  for (const Term& a : t.args) out.push_back(a.value);
  return out;
}

std::vector<std::uint64_t> flatten(const std::vector<std::vector<std::uint64_t>>& tuples) {
  std::vector<std::uint64_t> out;
  for (const auto& t : tuples) out.insert(out.end(), t.begin(), t.end());
  return out;
}

} // namespace

std::pair<Position, StemCase> stem_of(const Term& t, const Position& rho, const Position& s_pos,
                                      const Program& p) {
  auto fun_headed = [&](const Position& pos) {
    const Term& sub = term_at(t, pos);
    return !sub.is_num() && p.is_fun(sub.head);
  };
  if (position_is_prefix(rho, s_pos)) {
    if (!fun_headed(rho))
      throw StemNotFound("redex at " + position_to_string(rho) + " is not a defined-function call");
    return {rho, StemCase::Equal};
  }
  if (position_is_prefix(s_pos, rho)) {
    if (!fun_headed(s_pos))
      throw StemNotFound("no fun-headed subterm at " + position_to_string(s_pos));
    return {s_pos, StemCase::StrictlyAbove};
  }
  if (!fun_headed(s_pos))
    throw StemNotFound("no fun-headed subterm at " + position_to_string(s_pos));
  return {s_pos, StemCase::Disjoint};
}

TracerParams tracer_params(const Program& p, const Description& d) {
  TracerParams tp;
  std::vector<SizeChangeGraph> cl = closure(d.range());
  tp.closure_size = cl.size();
  // call-free programs have an empty closure; any positive bound works then
  tp.m = ramsey_bound(std::max<std::uint64_t>(tp.closure_size, 1));
  tp.r = 1;
  for (const auto& def : p.defs)
    tp.r = std::max<std::uint32_t>(tp.r, static_cast<std::uint32_t>(def.params.size()));
  tp.p_len = (tp.m + 1) * tp.r;
  tp.a = 1;
  for (const auto& def : p.defs) {
    std::uint64_t count = 0;
    for (const Position& pos : enumerate_positions(def.body))
      if (subexpr_at(def.body, pos).kind == Expr::Kind::Apply) ++count;
    tp.a = std::max(tp.a, count);
  }
  return tp;
}

namespace {

enum class TraceMode { General, Tail };

struct TracerEngine {
  const Program& p;
  const Description& d;
  const OpInterp& ops;
  TraceMode mode;
  TracerParams tp;
  TailOrder torder; // tail mode only
  TraceResult res;

  Ordinal gamma_bound;   // w^(p_len + 1)
  Ordinal alpha_bound;   // w_3 (general) or w^(q*(i+1)) (tail)
  std::vector<std::string> fold_events;

  TracerEngine(const Program& p_, const Description& d_, const OpInterp& ops_, TraceMode mode_)
      : p(p_), d(d_), ops(ops_), mode(mode_) {
    tp = tracer_params(p, d);
    res.params = tp;
    if (!is_isct(d)) throw Error("tracer requires an ISCT description");
    for (const Call& c : calls_of(p))
      if (!d.graph_for(c))
        throw Error("description is missing call at " + position_to_string(c.pos));
    if (mode == TraceMode::Tail) torder = tail_order(p);
    gamma_bound = omega_pow(Ordinal::from_nat(tp.p_len + 1));
    alpha_bound = mode == TraceMode::General
                      ? omega_tower(3)
                      : omega_pow(Ordinal::from_nat(tail_scale() * (torder.entry_index + 1)));
  }

  // Scale between adjacent levels of the tail ordering. The exponent
  // w * gamma_p(u) reaches width p_len + 1, so levels must sit p_len + 2
  // apart for a level-j ordinal to dominate every lower-level one.
  std::uint64_t tail_scale() const { return tp.p_len + 2; }

  Ordinal assigned_ordinal(const SubtermTag& tag, const std::string& head) const {
    if (mode == TraceMode::General)
      return tag.proper ? mul_nat(omega_pow(tag.gamma), tp.a) : omega_pow(tag.gamma);
    std::size_t j = torder.index_of(head);
    Ordinal base = mul(Ordinal::omega(), tag.gamma);
    if (tag.proper) base = add(base, Ordinal::from_nat(1));
    return mul(omega_pow(Ordinal::from_nat(tail_scale() * j)), base);
  }

  static std::string tag_head(const SubtermTag& tag) {
    return tag.proper ? tag.fns.back() : tag.pending->target;
  }

  bool violation(TraceResult::Fail kind, std::uint64_t step, const std::string& what) {
    res.fail = kind;
    res.detail = "step " + std::to_string(step) + ": " + what;
    return false;
  }

  // Case 2: append the transition via `call` to (w at fn) and fold at length m.
  bool extend_tag(SubtermTag& tag, const Call& call, const std::vector<std::uint64_t>& w,
                  std::uint64_t step) {
    const SizeChangeGraph* g = d.graph_for(call);
    const std::vector<std::uint64_t>& from = tag.tuples.back();
    for (const Arc& a : g->arcs) {
      bool holds = a.strict ? from.at(a.from) > w.at(a.to) : from.at(a.from) >= w.at(a.to);
      if (!holds)
        return violation(TraceResult::Fail::Unsafe, step,
                         "transition " + call.source + " -> " + call.target + " at call " +
                             position_to_string(call.pos) + " violates arc x" +
                             std::to_string(a.from) + (a.strict ? " ->> x" : " -> x") +
                             std::to_string(a.to));
    }
    std::vector<std::uint64_t> old_flat = flatten(tag.tuples);
    Ordinal old_gamma = tag.gamma;

    tag.fns.push_back(call.target);
    tag.tuples.push_back(w);
    tag.path.push_back(*g);
    tag.pending.reset();
    tag.proper = true;

    if (tag.path.size() >= tp.m) {
      if (!fold_tag(tag, step)) return false;
    }
    tag.gamma = gamma_p(flatten(tag.tuples), tp.p_len);
    if (!is_above(old_flat, flatten(tag.tuples), tp.p_len))
      return violation(TraceResult::Fail::Monotonicity, step,
                       "extended sequence is not below its predecessor");
    if (compare(tag.gamma, old_gamma) != Ord3::Less)
      return violation(TraceResult::Fail::Monotonicity, step, "gamma did not decrease");
    return true;
  }

  bool fold_tag(SubtermTag& tag, std::uint64_t step) {
    std::optional<Folding> f = find_folding(make_multipath(tag.path));
    if (!f)
      return violation(TraceResult::Fail::FoldFailure, step,
                       "multipath of length " + std::to_string(tag.path.size()) +
                           " has no folding");
    if (!f->h.has_strict_self_arc())
      return violation(TraceResult::Fail::FoldFailure, step,
                       "fold produced an idempotent without a strict self arc");
    std::size_t L = tag.path.size();
    std::size_t i = f->i, j = f->j, k = f->k;
    if (tag.fns[i] != tag.fns[k] || tag.fns[i] != f->h.source)
      return violation(TraceResult::Fail::FoldFailure, step, "fold endpoints disagree");
    // v_i: strict self-arc coordinates take u_j's values, the rest keep u_i's
    std::vector<std::uint64_t> vi = tag.tuples[i];
    for (const Arc& a : f->h.arcs)
      if (a.strict && a.from == a.to) vi[a.from] = tag.tuples[j][a.from];

    std::vector<std::string> fns;
    std::vector<std::vector<std::uint64_t>> tuples;
    std::vector<SizeChangeGraph> path;
    fns.assign(tag.fns.begin(), tag.fns.begin() + static_cast<std::ptrdiff_t>(i));
    tuples.assign(tag.tuples.begin(), tag.tuples.begin() + static_cast<std::ptrdiff_t>(i));
    path.assign(tag.path.begin(), tag.path.begin() + static_cast<std::ptrdiff_t>(i));
    fns.push_back(tag.fns[i]);
    tuples.push_back(vi);
    path.push_back(f->h);
    for (std::size_t t = k; t < L; ++t) path.push_back(tag.path[t]);
    for (std::size_t t = k; t <= L; ++t) {
      fns.push_back(tag.fns[t]);
      tuples.push_back(tag.tuples[t]);
    }
    fold_events.push_back("fold(i=" + std::to_string(i) + ",j=" + std::to_string(j) +
                          ",k=" + std::to_string(k) + ",H=" + graph_to_string(f->h) + ")");
    tag.fns = std::move(fns);
    tag.tuples = std::move(tuples);
    tag.path = std::move(path);
    ++res.fold_count;
    if (tag.path.size() >= tp.m)
      return violation(TraceResult::Fail::FoldFailure, step, "fold did not shorten the multipath");
    // conditions (a)-(b) rechecked structurally on the rebuilt chain
    for (std::size_t t = 0; t < tag.path.size(); ++t) {
      const SizeChangeGraph& g = tag.path[t];
      if (g.source != tag.fns[t] || g.target != tag.fns[t + 1])
        return violation(TraceResult::Fail::FoldFailure, step, "rebuilt chain endpoints broke");
      for (const Arc& a : g.arcs) {
        bool holds = a.strict ? tag.tuples[t].at(a.from) > tag.tuples[t + 1].at(a.to)
                              : tag.tuples[t].at(a.from) >= tag.tuples[t + 1].at(a.to);
        if (!holds)
          return violation(TraceResult::Fail::FoldFailure, step,
                           "rebuilt chain violates its graphs");
      }
    }
    return true;
  }

  TraceResult run(const std::vector<std::uint64_t>& entry_args, std::uint64_t fuel) {
    const FunctionDef& entry = p.entry();
    if (entry_args.size() != entry.params.size())
      throw ArityMismatch("entry expects " + std::to_string(entry.params.size()) + " arguments");
    Term t = make_call_term(entry.name, entry_args);
    std::map<Position, SubtermTag> tags;
    {
      SubtermTag root;
      root.fns = {entry.name};
      root.tuples = {entry_args};
      root.proper = true;
      root.gamma = gamma_p(flatten(root.tuples), tp.p_len);
      tags.emplace(Position{}, std::move(root));
    }
    record(tags, std::nullopt, false);

    for (std::uint64_t step = 0; step < fuel && res.ok(); ++step) {
      std::optional<Redex> rx = find_redex(t, p);
      if (!rx) {
        res.terminated = true;
        res.value = t.value;
        break;
      }
      const Position& rho = rx->position;

      Term replacement;
      std::map<Position, Position> posmap; // term position (relative) -> call position
      if (rx->is_fun_call) {
        const FunctionDef& def = p.at(rx->head);
        std::vector<std::pair<Position, Position>> applies;
        replacement = eval_expr_traced(def.body, def.params, rx->args, applies);
        for (auto& [tpos, epos] : applies) posmap.emplace(std::move(tpos), std::move(epos));
      } else {
        replacement = num_term(ops.apply(rx->head, rx->args));
      }
      Term t_next = t;
      *term_at_mut(t_next, rho) = std::move(replacement);

      std::map<Position, SubtermTag> next_tags;
      std::map<Position, Ordinal> beta;
      fold_events.clear();
      for (const Position& q : fun_positions(t_next, p)) {
        Position sigma;
        StemCase scase;
        if (position_is_prefix(rho, q)) {
          sigma = rho;
          scase = StemCase::Equal;
        } else if (position_is_prefix(q, rho)) {
          sigma = q;
          scase = StemCase::StrictlyAbove;
        } else {
          sigma = q;
          scase = StemCase::Disjoint;
        }
        auto parent_it = tags.find(sigma);
        if (parent_it == tags.end()) throw StemNotFound("no tag at stem " + position_to_string(sigma));
        SubtermTag tag = parent_it->second;
        const Term& sub = term_at(t_next, q);
        bool now_proper = term_is_proper(sub);

        if (scase == StemCase::Equal) {
          if (!rx->is_fun_call)
            throw StemNotFound("operator redex cannot be a stem");
          Position rel(q.begin() + static_cast<std::ptrdiff_t>(rho.size()), q.end());
          auto call_pos = posmap.find(rel);
          if (call_pos == posmap.end()) throw StemNotFound("no call position for new subterm");
          Call call{call_pos->second, rx->head, sub.head};
          if (now_proper) {
            if (!extend_tag(tag, call, numeral_args(sub), step + 1)) break;
          } else {
            tag.pending = call;
            tag.proper = false;
          }
        } else if (scase == StemCase::StrictlyAbove && now_proper) {
          // the subterm just became proper: resolve its pending call
          if (!tag.pending) throw StemNotFound("non-proper tag without a pending call");
          Call call = *tag.pending;
          if (!extend_tag(tag, call, numeral_args(sub), step + 1)) break;
        }
        // Disjoint and still-non-proper ancestors keep their tag unchanged

        beta_add(beta, sigma, assigned_ordinal(tag, sub.head));
        next_tags.emplace(q, std::move(tag));
      }
      if (!res.ok()) break;

      // per-stem verification: alpha_sigma >= beta_sigma, strict at the redex
      for (const auto& [sigma, old_tag] : tags) {
        Ordinal a_sig = assigned_ordinal(old_tag, tag_head(old_tag));
        auto it = beta.find(sigma);
        Ordinal b_sig = it == beta.end() ? Ordinal() : it->second;
        Ord3 cmp = compare(a_sig, b_sig);
        if (cmp == Ord3::Less) {
          violation(TraceResult::Fail::Monotonicity, step + 1,
                    "stem " + position_to_string(sigma) + " increased");
          break;
        }
        if (sigma == rho && rx->is_fun_call && cmp != Ord3::Greater) {
          violation(TraceResult::Fail::Monotonicity, step + 1,
                    "redex stem did not strictly decrease");
          break;
        }
      }
      if (!res.ok()) break;

      t = std::move(t_next);
      tags = std::move(next_tags);
      record(tags, rho, rx->is_fun_call);
    }
    return std::move(res);
  }

  static void beta_add(std::map<Position, Ordinal>& beta, const Position& sigma,
                       const Ordinal& o) {
    auto [it, fresh] = beta.try_emplace(sigma, o);
    if (!fresh) it->second = nat_sum(it->second, o);
  }

  void record(const std::map<Position, SubtermTag>& tags, std::optional<Position> rho,
              bool proper) {
    TraceStep st;
    st.index = res.steps.size();
    st.rho = std::move(rho);
    st.proper = proper;
    st.fold_events = fold_events;
    Ordinal alpha;
    for (const auto& [pos, tag] : tags) {
      Ordinal o = assigned_ordinal(tag, tag_head(tag));
      if (mode == TraceMode::General && compare(tag.gamma, gamma_bound) != Ord3::Less) {
        violation(TraceResult::Fail::Monotonicity, st.index, "gamma exceeded w^(p+1)");
        return;
      }
      alpha = nat_sum(alpha, o);
      st.subterm_ordinals.emplace_back(pos, std::move(o));
    }
    st.alpha = alpha;
    if (compare(st.alpha, alpha_bound) != Ord3::Less) {
      violation(TraceResult::Fail::Monotonicity, st.index,
                mode == TraceMode::General ? "alpha exceeded w_3"
                                           : "alpha exceeded the tail bound");
      return;
    }
    if (!res.steps.empty()) {
      Ord3 cmp = compare(res.steps.back().alpha, st.alpha);
      if (cmp == Ord3::Less) {
        violation(TraceResult::Fail::Monotonicity, st.index, "alpha increased");
        return;
      }
      if (proper && cmp != Ord3::Greater) {
        violation(TraceResult::Fail::Monotonicity, st.index,
                  "proper step without strict descent");
        return;
      }
    }
    res.steps.push_back(std::move(st));
  }
};

} // namespace

TraceResult trace_ordinals(const Program& p, const Description& d, const OpInterp& ops,
                           const std::vector<std::uint64_t>& entry_args, std::uint64_t fuel) {
  TracerEngine eng(p, d, ops, TraceMode::General);
  return eng.run(entry_args, fuel);
}

TraceResult trace_tail_ordinals(const Program& p, const Description& d, const OpInterp& ops,
                                const std::vector<std::uint64_t>& entry_args,
                                std::uint64_t fuel) {
  TracerEngine eng(p, d, ops, TraceMode::Tail);
  return eng.run(entry_args, fuel);
}

// ---------------------------------------------------------------------------
// Illustrative two-argument Ackermann assignment
// ---------------------------------------------------------------------------

namespace {

const char* kAckermannSource =
    "A(x, y) = if x = 0 then y + 1 else if y = 0 then A(x - 1, 1) else A(x - 1, A(x, y - 1))";

struct ExampleTag {
  Ordinal exponent;
  bool proper = false;
};

} // namespace

std::vector<Ordinal> ackermann_example_ordinals(std::uint64_t x, std::uint64_t y,
                                                std::size_t steps) {
  static const Program prog = parse_program(kAckermannSource);
  OpInterp ops;
  auto exponent_of = [](const Term& sub) {
    // w * u + v for A(u, v)
    return alpha_of({sub.args[0].value, sub.args[1].value});
  };
  Term t = make_call_term("A", std::vector<std::uint64_t>{x, y});
  std::map<Position, ExampleTag> tags;
  tags.emplace(Position{}, ExampleTag{exponent_of(t), true});

  std::vector<Ordinal> out;
  auto alpha_now = [&]() {
    Ordinal alpha;
    for (const auto& [pos, tag] : tags) {
      Ordinal o = omega_pow(tag.exponent);
      if (tag.proper) o = mul_nat(o, 2);
      alpha = nat_sum(alpha, o);
    }
    return alpha;
  };
  if (steps == 0) return out;
  out.push_back(alpha_now());

  while (out.size() < steps) {
    std::optional<Redex> rx = find_redex(t, prog);
    if (!rx) break;
    std::optional<Term> next = one_step(t, prog, ops);
    if (!next) break;
    Term t_next = std::move(*next);
    std::map<Position, ExampleTag> next_tags;
    for (const Position& q : fun_positions(t_next, prog)) {
      const Term& sub = term_at(t_next, q);
      if (sub.head != "A" || sub.args.size() != 2 || !sub.args[0].is_num())
        throw ShapeError("term outside the A(n, _) shape at " + position_to_string(q));
      bool proper = term_is_proper(sub);
      Position sigma = position_is_prefix(rx->position, q) ? rx->position : q;
      auto it = tags.find(sigma);
      if (it == tags.end()) throw ShapeError("no tag at stem " + position_to_string(sigma));
      ExampleTag tag = it->second;
      if (proper) {
        tag.exponent = exponent_of(sub); // its own alpha(u, v)
        tag.proper = true;
      } else if (position_is_prefix(rx->position, q)) {
        tag.proper = false; // inherits the redex exponent
      }
      next_tags.emplace(q, std::move(tag));
    }
    t = std::move(t_next);
    tags = std::move(next_tags);
    out.push_back(alpha_now());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Tail-recursive programs
// ---------------------------------------------------------------------------

std::size_t TailOrder::index_of(const std::string& fn) const {
  for (std::size_t i = 0; i < order.size(); ++i)
    if (order[i] == fn) return i;
  throw UnknownIdentifier("function not in tail order: " + fn);
}

TailOrder tail_order(const Program& p) {
  std::vector<Call> calls = calls_of(p);
  // mutual recursion: a cycle among distinct functions
  std::map<std::string, std::set<std::string>> callees;
  for (const auto& def : p.defs) callees[def.name];
  for (const Call& c : calls)
    if (c.source != c.target) callees[c.source].insert(c.target);
  {
    std::map<std::string, int> color; // 0 new, 1 active, 2 done
    std::vector<std::string> stack;
    std::function<void(const std::string&)> dfs = [&](const std::string& f) {
      color[f] = 1;
      stack.push_back(f);
      for (const std::string& g : callees[f]) {
        if (color[g] == 1) {
          std::string cyc;
          auto it = std::find(stack.begin(), stack.end(), g);
          for (; it != stack.end(); ++it) cyc += *it + " -> ";
          throw MutualRecursion("mutual recursion: " + cyc + g);
        }
        if (color[g] == 0) dfs(g);
      }
      color[f] = 2;
      stack.pop_back();
    };
    for (const auto& def : p.defs)
      if (color[def.name] == 0) dfs(def.name);
  }
  // every self-call must be the root of its branch: only conditionals above it
  for (const auto& def : p.defs) {
    for (const Call& c : calls) {
      if (c.source != def.name || c.target != def.name) continue;
      const Expr* cur = &def.body;
      Position prefix;
      for (std::uint32_t step : c.pos) {
        if (cur->kind == Expr::Kind::Apply) throw NotTailRecursive(def.name, c.pos);
        prefix.push_back(step);
        cur = &cur->kids[step];
      }
    }
  }
  // place each function once all the functions it mentions are placed
  TailOrder out;
  std::set<std::string> placed;
  while (out.order.size() < p.defs.size()) {
    bool progress = false;
    for (const auto& def : p.defs) {
      if (placed.count(def.name)) continue;
      bool ready = true;
      for (const std::string& g : callees[def.name])
        if (!placed.count(g)) ready = false;
      if (ready) {
        out.order.push_back(def.name);
        placed.insert(def.name);
        progress = true;
      }
    }
    if (!progress) throw MutualRecursion("mutual recursion prevents ordering");
  }
  out.entry_index = out.index_of(p.entry().name);
  return out;
}

TailLengthBound tail_length_bound(const Program& p, const Description& d, const OpInterp& ops,
                                  const std::vector<std::uint64_t>& entry_args,
                                  std::uint64_t fuel, std::uint64_t step_budget) {
  TailOrder torder = tail_order(p);
  TracerParams tp = tracer_params(p, d);
  std::size_t i = torder.entry_index;
  TailLengthBound out;
  out.ordinal_index = (tp.p_len + 2) * i + 2;
  std::uint64_t mx = tp.p_len;
  for (std::uint64_t v : entry_args) mx = std::max(mx, v);
  BaseFunction f = base_affine(2, 2 + mx);
  out.base_name = f.name;

  TerminationVerdict verdict = terminates_on(p, ops, entry_args, fuel);
  if (const auto* term = std::get_if<Terminates>(&verdict)) {
    out.observed_terminated = true;
    out.observed_proper_steps = term->proper_steps;
  }
  FghOutcome bound = compute_F(f, Ordinal::from_nat(out.ordinal_index), 0, step_budget);
  if (const auto* v = std::get_if<FghValue>(&bound)) {
    out.bound_value = v->value;
    out.bound_steps = v->steps;
    if (out.observed_terminated) out.holds = out.observed_proper_steps < v->value;
  } else {
    out.bound_steps = std::get<FghBudget>(bound).steps;
  }
  return out;
}

} // namespace sct
