#include "sct/scg.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "sct/fgh.hpp"

namespace sct {

bool SizeChangeGraph::has_strict_self_arc() const {
  for (const Arc& a : arcs)
    if (a.strict && a.from == a.to) return true;
  return false;
}

SizeChangeGraph make_graph(std::string source, std::uint32_t source_arity, std::string target,
                           std::uint32_t target_arity, std::vector<Arc> arcs) {
  SizeChangeGraph g;
  g.source = std::move(source);
  g.target = std::move(target);
  g.source_arity = source_arity;
  g.target_arity = target_arity;
  // normalize: strict shadows non-strict on the same (from, to) pair
  std::map<std::pair<std::uint32_t, std::uint32_t>, bool> best;
  for (const Arc& a : arcs) {
    if (a.from >= source_arity || a.to >= target_arity)
      throw Error("arc index out of range for " + g.source + " -> " + g.target);
    auto [it, fresh] = best.try_emplace({a.from, a.to}, a.strict);
    if (!fresh) it->second = it->second || a.strict;
  }
  for (const auto& [k, strict] : best) g.arcs.push_back(Arc{k.first, k.second, strict});
  return g;
}

std::string graph_to_string(const SizeChangeGraph& g) {
  std::string out = g.source + " -> " + g.target + " {";
  for (std::size_t i = 0; i < g.arcs.size(); ++i) {
    if (i) out += ", ";
    const Arc& a = g.arcs[i];
    out += "x" + std::to_string(a.from) + (a.strict ? " ->> " : " -> ") + "x" + std::to_string(a.to);
  }
  return out + "}";
}

SizeChangeGraph compose(const SizeChangeGraph& g0, const SizeChangeGraph& g1) {
  if (g0.target != g1.source || g0.target_arity != g1.source_arity)
    throw CompositionMismatch("cannot compose " + graph_to_string(g0) + " with " +
                              graph_to_string(g1));
  std::vector<Arc> arcs;
  for (const Arc& a : g0.arcs) {
    for (const Arc& b : g1.arcs) {
      if (a.to != b.from) continue;
      arcs.push_back(Arc{a.from, b.to, a.strict || b.strict});
    }
  }
  return make_graph(g0.source, g0.source_arity, g1.target, g1.target_arity, std::move(arcs));
}

std::vector<SizeChangeGraph> closure(const std::vector<SizeChangeGraph>& gs) {
  std::set<SizeChangeGraph> seen(gs.begin(), gs.end());
  std::vector<SizeChangeGraph> work(seen.begin(), seen.end());
  while (!work.empty()) {
    SizeChangeGraph g = std::move(work.back());
    work.pop_back();
    std::vector<SizeChangeGraph> fresh;
    for (const SizeChangeGraph& h : seen) {
      if (g.target == h.source && g.target_arity == h.source_arity) {
        SizeChangeGraph c = compose(g, h);
        if (!seen.count(c)) fresh.push_back(std::move(c));
      }
      if (h.target == g.source && h.target_arity == g.source_arity) {
        SizeChangeGraph c = compose(h, g);
        if (!seen.count(c)) fresh.push_back(std::move(c));
      }
    }
    for (auto& c : fresh) {
      if (seen.insert(c).second) work.push_back(std::move(c));
    }
  }
  return {seen.begin(), seen.end()};
}

bool is_idempotent(const SizeChangeGraph& g) {
  if (g.source != g.target || g.source_arity != g.target_arity) return false;
  return compose(g, g) == g;
}

const SizeChangeGraph* Description::graph_for(const Call& c) const {
  for (const auto& [call, g] : graphs)
    if (call == c) return &g;
  return nullptr;
}

std::vector<SizeChangeGraph> Description::range() const {
  std::set<SizeChangeGraph> s;
  for (const auto& [call, g] : graphs) s.insert(g);
  return {s.begin(), s.end()};
}

IsctVerdict check_isct(const Description& d) {
  for (const SizeChangeGraph& g : closure(d.range())) {
    if (is_idempotent(g) && !g.has_strict_self_arc()) return NotIsct{g};
  }
  return Isct{};
}

bool is_isct(const Description& d) { return std::holds_alternative<Isct>(check_isct(d)); }

Description extract_description(const Program& p) {
  Description d;
  for (const Call& c : calls_of(p)) {
    const FunctionDef& src = p.at(c.source);
    const FunctionDef& tgt = p.at(c.target);
    const Expr& site = subexpr_at(src.body, c.pos);
    PathCondition cond = path_condition(src, c.pos);
    auto param_index = [&](const std::string& x) -> std::uint32_t {
      for (std::uint32_t i = 0; i < src.params.size(); ++i)
        if (src.params[i] == x) return i;
      throw UnknownIdentifier("parameter " + x);
    };
    std::vector<Arc> arcs;
    for (std::uint32_t j = 0; j < site.kids.size(); ++j) {
      const Expr& a = site.kids[j];
      if (a.kind == Expr::Kind::Param) {
        arcs.push_back(Arc{param_index(a.name), j, false});
      } else if (a.kind == Expr::Kind::ParamPred && entails_positive(cond, a.name)) {
        // truncated subtraction at 0 would violate x > x-1, so the strict arc
        // needs the branch path to entail positivity
        arcs.push_back(Arc{param_index(a.name), j, true});
      }
    }
    d.graphs.emplace_back(c, make_graph(c.source, static_cast<std::uint32_t>(src.params.size()),
                                        c.target, static_cast<std::uint32_t>(tgt.params.size()),
                                        std::move(arcs)));
  }
  return d;
}

bool check_safety_runtime(const Description& d, const StateTransition& t) {
  const SizeChangeGraph* g = d.graph_for(t.call);
  if (!g) throw Error("description has no graph for call at " + position_to_string(t.call.pos));
  if (!t.resolved) throw Error("check_safety_runtime requires numeral targets");
  for (const Arc& a : g->arcs) {
    std::uint64_t from = t.source_args.at(a.from);
    std::uint64_t to = t.target_args.at(a.to);
    if (a.strict ? !(from > to) : !(from >= to)) return false;
  }
  return true;
}

std::uint64_t ramsey_bound(std::uint64_t c) {
  if (c < 1) throw RamseyOverflow("ramsey_bound requires c >= 1");
  if (c > 8) throw RamseyOverflow("ramsey_bound guard: closure size " + std::to_string(c) +
                                  " exceeds the supported maximum of 8");
  // 1 + sum_{k=0..c} c!/k!  (c=1 -> 3, c=2 -> 6 = R(3,3), c=3 -> 17 = R(3,3,3))
  std::uint64_t sum = 0, term = 1; // term = c!/k! for k = c down to 0
  sum += term;
  for (std::uint64_t k = c; k >= 1; --k) {
    term *= k;
    sum += term;
  }
  return sum + 1;
}

Multipath make_multipath(std::vector<SizeChangeGraph> graphs) {
  for (std::size_t i = 0; i + 1 < graphs.size(); ++i)
    if (graphs[i].target != graphs[i + 1].source ||
        graphs[i].target_arity != graphs[i + 1].source_arity)
      throw CompositionMismatch("multipath graphs do not chain at index " + std::to_string(i));
  Multipath m;
  m.graphs = std::move(graphs);
  return m;
}

SizeChangeGraph compose_segment(const Multipath& m, std::size_t begin, std::size_t end) {
  if (begin >= end || end > m.graphs.size()) throw Error("bad multipath segment");
  SizeChangeGraph acc = m.graphs[begin];
  for (std::size_t i = begin + 1; i < end; ++i) acc = compose(acc, m.graphs[i]);
  return acc;
}

std::optional<Folding> find_folding(const Multipath& m) {
  std::size_t len = m.graphs.size();
  if (len < 2) return std::nullopt;
  // segment compositions, memoized: seg[i][j] = compose of graphs[i..j)
  std::vector<std::vector<SizeChangeGraph>> seg(len + 1);
  for (std::size_t i = 0; i < len; ++i) {
    seg[i].resize(len + 1);
    for (std::size_t j = i + 1; j <= len; ++j)
      seg[i][j] = j == i + 1 ? m.graphs[i] : compose(seg[i][j - 1], m.graphs[j - 1]);
  }
  // plain folds first: C runs to the end
  for (std::size_t i = 0; i < len; ++i) {
    for (std::size_t j = i + 1; j < len; ++j) {
      if (seg[i][j] == seg[j][len] && seg[i][j] == seg[i][len]) {
        Folding f;
        f.i = i;
        f.j = j;
        f.k = len;
        f.k_is_end = true;
        f.h = seg[i][j];
        return f;
      }
    }
  }
  // monochromatic triangle anywhere (the finite Ramsey argument guarantees one
  // at the bound); the suffix from k is preserved by the caller
  for (std::size_t i = 0; i < len; ++i)
    for (std::size_t j = i + 1; j < len; ++j)
      for (std::size_t k = j + 1; k < len; ++k)
        if (seg[i][j] == seg[j][k] && seg[i][j] == seg[i][k]) {
          Folding f;
          f.i = i;
          f.j = j;
          f.k = k;
          f.k_is_end = false;
          f.h = seg[i][j];
          return f;
        }
  return std::nullopt;
}

std::pair<Program, Description> ackermann_description(unsigned n) {
  if (n < 1) throw Error("ackermann_description requires n >= 1");
  Program p = gen_ackermann_program(n);
  // graphs A_j over parameters x_1..x_{n+1} (x_{n+1} is y): strict self arc on
  // x_j, non-strict self arcs on all x_i with i < j
  std::uint32_t arity = n + 1;
  auto graph_a = [&](unsigned j) {
    std::vector<Arc> arcs;
    arcs.push_back(Arc{j - 1, j - 1, true});
    for (unsigned i = 1; i < j; ++i) arcs.push_back(Arc{i - 1, i - 1, false});
    return make_graph("A", arity, "A", arity, std::move(arcs));
  };
  // calls in position order: tau_1, ..., tau_n, tau_0, tau_{n+1};
  // tau_i uses A_i, tau_0 uses A_n, the inner nested call uses A_{n+1}
  std::vector<Call> calls = calls_of(p);
  if (calls.size() != n + 2) throw Error("unexpected call count in generated program");
  Description d;
  for (std::size_t idx = 0; idx < calls.size(); ++idx) {
    unsigned j;
    if (idx < n) j = static_cast<unsigned>(idx + 1); // tau_1..tau_n
    else if (idx == n) j = n;                        // tau_0
    else j = n + 1;                                  // inner nested call
    d.graphs.emplace_back(calls[idx], graph_a(j));
  }
  return {std::move(p), std::move(d)};
}

std::optional<DescentThread> descent_search(const Multipath& m) {
  std::size_t len = m.graphs.size();
  if (len == 0) return std::nullopt;
  constexpr std::int64_t kNone = -1;
  // best[i][p]: max stricts over threads from parameter p at cut i to the end
  std::vector<std::vector<std::int64_t>> best(len + 1);
  std::vector<std::vector<std::uint32_t>> next(len + 1);
  std::uint32_t last_arity = m.graphs.back().target_arity;
  best[len].assign(last_arity, 0);
  next[len].assign(last_arity, 0);
  for (std::size_t i = len; i-- > 0;) {
    const SizeChangeGraph& g = m.graphs[i];
    best[i].assign(g.source_arity, kNone);
    next[i].assign(g.source_arity, 0);
    for (const Arc& a : g.arcs) {
      if (best[i + 1][a.to] == kNone) continue;
      std::int64_t v = best[i + 1][a.to] + (a.strict ? 1 : 0);
      if (v > best[i][a.from]) {
        best[i][a.from] = v;
        next[i][a.from] = a.to;
      }
    }
  }
  // maximize the strict count over all start points; ties go to the longest
  // (earliest-starting) thread
  std::int64_t bestv = kNone;
  std::size_t best_start = 0;
  std::uint32_t bestp = 0;
  for (std::size_t start = 0; start < len; ++start)
    for (std::uint32_t q = 0; q < best[start].size(); ++q)
      if (best[start][q] > bestv) {
        bestv = best[start][q];
        best_start = start;
        bestp = q;
      }
  if (bestv == kNone) return std::nullopt;
  DescentThread t;
  t.start = best_start;
  t.strict_count = static_cast<std::uint64_t>(bestv);
  std::uint32_t cur = bestp;
  t.params.push_back(cur);
  for (std::size_t i = best_start; i < len; ++i) {
    cur = next[i][cur];
    t.params.push_back(cur);
  }
  return t;
}

std::string description_to_text(const Description& d) {
  // shared graphs get one id each, in first-use order
  std::ostringstream out;
  std::vector<SizeChangeGraph> table;
  auto id_of = [&](const SizeChangeGraph& g) {
    for (std::size_t i = 0; i < table.size(); ++i)
      if (table[i] == g) return i;
    table.push_back(g);
    return table.size() - 1;
  };
  std::vector<std::size_t> ids;
  for (const auto& [call, g] : d.graphs) ids.push_back(id_of(g));
  for (std::size_t i = 0; i < table.size(); ++i) {
    const SizeChangeGraph& g = table[i];
    out << "graph " << i << " : " << g.source << " -> " << g.target << "\n";
    for (const Arc& a : g.arcs)
      out << "x" << a.from << (a.strict ? " ->> " : " -> ") << "x" << a.to << "\n";
  }
  for (std::size_t i = 0; i < d.graphs.size(); ++i) {
    const Call& c = d.graphs[i].first;
    out << "call " << position_to_string(c.pos) << " " << c.source << " " << c.target << " uses "
        << ids[i] << "\n";
  }
  return out.str();
}

Description description_from_text(const std::string& text, const Program& p) {
  std::map<std::size_t, SizeChangeGraph> table;
  std::map<std::size_t, std::vector<Arc>> arcs;
  std::map<std::size_t, std::pair<std::string, std::string>> endpoints;
  Description d;
  std::istringstream in(text);
  std::string line;
  std::optional<std::size_t> current;
  auto arity_of = [&](const std::string& f) -> std::uint32_t {
    return static_cast<std::uint32_t>(p.at(f).params.size());
  };
  auto flush = [&]() {
    if (!current) return;
    auto [src, tgt] = endpoints.at(*current);
    table.emplace(*current,
                  make_graph(src, arity_of(src), tgt, arity_of(tgt), arcs[*current]));
    current.reset();
  };
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string_view sv(line);
    if (auto h = sv.find('#'); h != std::string_view::npos) sv = sv.substr(0, h);
    std::istringstream ls{std::string(sv)};
    std::string word;
    if (!(ls >> word)) continue;
    if (word == "graph") {
      flush();
      std::size_t id;
      std::string colon, src, arrow, tgt;
      if (!(ls >> id >> colon >> src >> arrow >> tgt) || colon != ":" || arrow != "->")
        throw SyntaxError("bad graph header", lineno, 1);
      endpoints[id] = {src, tgt};
      arcs[id];
      current = id;
    } else if (word == "call") {
      flush();
      std::string pos, src, tgt, uses;
      std::size_t id;
      if (!(ls >> pos >> src >> tgt >> uses >> id) || uses != "uses")
        throw SyntaxError("bad call line", lineno, 1);
      auto it = table.find(id);
      if (it == table.end()) throw SyntaxError("call references unknown graph", lineno, 1);
      d.graphs.emplace_back(Call{parse_position(pos), src, tgt}, it->second);
    } else {
      // arc line: x<i> ->> x<j>  or  x<i> -> x<j>
      if (!current) throw SyntaxError("arc line outside a graph block", lineno, 1);
      std::string lhs = word, arrow, rhs;
      if (!(ls >> arrow >> rhs) || lhs.size() < 2 || lhs[0] != 'x' || rhs.size() < 2 ||
          rhs[0] != 'x' || (arrow != "->" && arrow != "->>"))
        throw SyntaxError("bad arc line", lineno, 1);
      Arc a;
      a.from = static_cast<std::uint32_t>(std::stoul(lhs.substr(1)));
      a.to = static_cast<std::uint32_t>(std::stoul(rhs.substr(1)));
      a.strict = arrow == "->>";
      arcs[*current].push_back(a);
    }
  }
  flush();
  // validate against the program's calls
  std::vector<Call> calls = calls_of(p);
  for (const auto& [call, g] : d.graphs) {
    if (std::find(calls.begin(), calls.end(), call) == calls.end())
      throw Error("description binds a call the program does not have: " +
                  position_to_string(call.pos));
    if (g.source != call.source || g.target != call.target)
      throw Error("graph endpoints disagree with call at " + position_to_string(call.pos));
  }
  for (const Call& c : calls)
    if (!d.graph_for(c))
      throw Error("description is missing call at " + position_to_string(c.pos));
  return d;
}

} // namespace sct
