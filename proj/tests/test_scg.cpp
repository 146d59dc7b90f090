#include "doctest.h"

#include <random>
#include <set>

#include "helpers.hpp"
#include "sct/scg.hpp"

using namespace sct;

namespace {

// G1 and G2 of the two-argument Ackermann analysis.
SizeChangeGraph g1() { return make_graph("A", 2, "A", 2, {{0, 0, true}}); }
SizeChangeGraph g2() { return make_graph("A", 2, "A", 2, {{0, 0, false}, {1, 1, true}}); }
SizeChangeGraph swap_graph() {
  return make_graph("swap", 2, "swap", 2, {{0, 1, false}, {1, 0, false}});
}

SizeChangeGraph random_graph(std::mt19937_64& rng, const std::string& s, std::uint32_t sa,
                             const std::string& t, std::uint32_t ta) {
  std::vector<Arc> arcs;
  for (std::uint32_t i = 0; i < sa; ++i)
    for (std::uint32_t j = 0; j < ta; ++j) {
      switch (rng() % 4) {
        case 0: arcs.push_back({i, j, true}); break;
        case 1: arcs.push_back({i, j, false}); break;
        default: break;
      }
    }
  return make_graph(s, sa, t, ta, std::move(arcs));
}

bool satisfies(const SizeChangeGraph& g, const std::vector<std::uint64_t>& u,
               const std::vector<std::uint64_t>& v) {
  for (const Arc& a : g.arcs)
    if (a.strict ? !(u[a.from] > v[a.to]) : !(u[a.from] >= v[a.to])) return false;
  return true;
}

// Three-step composition by direct path enumeration, independent of compose.
SizeChangeGraph compose3_direct(const SizeChangeGraph& g0, const SizeChangeGraph& g1,
                                const SizeChangeGraph& g2) {
  std::vector<Arc> arcs;
  for (const Arc& a : g0.arcs)
    for (const Arc& b : g1.arcs)
      for (const Arc& c : g2.arcs)
        if (a.to == b.from && b.to == c.from)
          arcs.push_back({a.from, c.to, a.strict || b.strict || c.strict});
  return make_graph(g0.source, g0.source_arity, g2.target, g2.target_arity, std::move(arcs));
}

// Saturation oracle for the closure.
std::set<SizeChangeGraph> closure_oracle(std::vector<SizeChangeGraph> gs) {
  std::set<SizeChangeGraph> s(gs.begin(), gs.end());
  bool changed = true;
  while (changed) {
    changed = false;
    std::vector<SizeChangeGraph> snapshot(s.begin(), s.end());
    for (const auto& a : snapshot)
      for (const auto& b : snapshot)
        if (a.target == b.source && a.target_arity == b.source_arity)
          if (s.insert(compose(a, b)).second) changed = true;
  }
  return s;
}

} // namespace

TEST_CASE("composition on the Ackermann graphs") {
  CHECK(compose(g2(), g2()) == g2());
  CHECK(compose(g1(), g2()) == g1());
  CHECK(compose(g2(), g1()) == g1());
  CHECK(compose(g1(), g1()) == g1());
  // a single mixed path is strict
  SizeChangeGraph a = make_graph("f", 2, "f", 2, {{0, 1, false}});
  SizeChangeGraph b = make_graph("f", 2, "f", 2, {{1, 0, true}});
  CHECK(compose(a, b) == make_graph("f", 2, "f", 2, {{0, 0, true}}));
  CHECK_THROWS_AS(compose(g1(), make_graph("g", 1, "g", 1, {})), CompositionMismatch);
}

TEST_CASE("strict arcs shadow non-strict ones") {
  SizeChangeGraph g = make_graph("f", 2, "f", 2, {{0, 0, false}, {0, 0, true}, {1, 0, false}});
  REQUIRE(g.arcs.size() == 2);
  CHECK(g.arcs[0] == Arc{0, 0, true});
  std::mt19937_64 rng(3);
  for (int i = 0; i < 2000; ++i) {
    SizeChangeGraph a = random_graph(rng, "f", 3, "g", 3);
    SizeChangeGraph b = random_graph(rng, "g", 3, "h", 2);
    SizeChangeGraph c = compose(a, b);
    std::set<std::pair<std::uint32_t, std::uint32_t>> seen;
    for (const Arc& arc : c.arcs) REQUIRE(seen.emplace(arc.from, arc.to).second);
  }
}

TEST_CASE("composition soundness: valuation transfer") {
  std::mt19937_64 rng(5);
  for (int it = 0; it < 10000; ++it) {
    std::uint32_t n = 2 + rng() % 2;
    std::vector<std::uint64_t> u(n), v(n), w(n);
    for (auto& x : u) x = rng() % 6;
    for (auto& x : v) x = rng() % 6;
    for (auto& x : w) x = rng() % 6;
    // sample arcs consistent with the valuations so both graphs are satisfied
    auto sample = [&](const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
      std::vector<Arc> arcs;
      for (std::uint32_t i = 0; i < n; ++i)
        for (std::uint32_t j = 0; j < n; ++j) {
          if (rng() % 2) continue;
          if (a[i] > b[j]) arcs.push_back({i, j, rng() % 2 == 0});
          else if (a[i] == b[j]) arcs.push_back({i, j, false});
        }
      return make_graph("f", n, "f", n, std::move(arcs));
    };
    SizeChangeGraph ga = sample(u, v), gb = sample(v, w);
    REQUIRE(satisfies(ga, u, v));
    REQUIRE(satisfies(gb, v, w));
    REQUIRE(satisfies(compose(ga, gb), u, w));
  }
}

TEST_CASE("composition associativity against path enumeration") {
  std::mt19937_64 rng(9);
  for (int it = 0; it < 10000; ++it) {
    SizeChangeGraph a = random_graph(rng, "f", 2 + rng() % 2, "g", 2 + rng() % 2);
    SizeChangeGraph b = random_graph(rng, "g", a.target_arity, "h", 2 + rng() % 2);
    SizeChangeGraph c = random_graph(rng, "h", b.target_arity, "k", 2 + rng() % 2);
    SizeChangeGraph left = compose(compose(a, b), c);
    SizeChangeGraph right = compose(a, compose(b, c));
    SizeChangeGraph direct = compose3_direct(a, b, c);
    REQUIRE(left == right);
    REQUIRE(left == direct);
  }
}

TEST_CASE("closure of the Ackermann graphs is itself") {
  std::vector<SizeChangeGraph> cl = closure({g1(), g2()});
  REQUIRE(cl.size() == 2);
  CHECK(std::find(cl.begin(), cl.end(), g1()) != cl.end());
  CHECK(std::find(cl.begin(), cl.end(), g2()) != cl.end());
  CHECK(closure({}).empty());
}

TEST_CASE("closure agrees with the saturation oracle") {
  std::mt19937_64 rng(13);
  for (int it = 0; it < 300; ++it) {
    std::vector<SizeChangeGraph> gs;
    int k = 1 + rng() % 3;
    for (int i = 0; i < k; ++i) gs.push_back(random_graph(rng, "f", 2, "f", 2));
    std::vector<SizeChangeGraph> cl = closure(gs);
    std::set<SizeChangeGraph> oracle = closure_oracle(gs);
    REQUIRE(cl.size() == oracle.size());
    for (const auto& g : cl) REQUIRE(oracle.count(g) == 1);
    // fixpoint: composing members stays inside
    for (const auto& a : cl)
      for (const auto& b : cl)
        if (a.target == b.source)
          REQUIRE(std::find(cl.begin(), cl.end(), compose(a, b)) != cl.end());
  }
}

TEST_CASE("closure is minimal over the generators") {
  // removing a non-generator breaks closedness on small instances
  std::vector<SizeChangeGraph> gen = {swap_graph()};
  std::vector<SizeChangeGraph> cl = closure(gen);
  REQUIRE(cl.size() == 2);
  for (const auto& g : cl) {
    if (g == swap_graph()) continue;
    std::vector<SizeChangeGraph> without;
    for (const auto& h : cl)
      if (!(h == g)) without.push_back(h);
    bool closed = true;
    for (const auto& a : without)
      for (const auto& b : without)
        if (a.target == b.source &&
            std::find(without.begin(), without.end(), compose(a, b)) == without.end())
          closed = false;
    CHECK(!closed);
  }
}

TEST_CASE("closure of the A_n family") {
  auto [prog2, d2] = ackermann_description(2);
  std::vector<SizeChangeGraph> graphs = d2.range();
  REQUIRE(graphs.size() == 3);
  std::vector<SizeChangeGraph> cl = closure(graphs);
  std::set<SizeChangeGraph> oracle = closure_oracle(graphs);
  CHECK(cl.size() == oracle.size());
  CHECK(cl.size() == 3); // A_j ; A_k = A_min(j,k)
}

TEST_CASE("idempotence") {
  CHECK(is_idempotent(g1()));
  CHECK(is_idempotent(g2()));
  CHECK(!is_idempotent(swap_graph()));
  CHECK(!is_idempotent(make_graph("f", 1, "g", 1, {{0, 0, false}})));
}

TEST_CASE("the termination criterion on the Ackermann description") {
  Program p = load_corpus("ackermann.fun");
  Description d = extract_description(p);
  CHECK(is_isct(d));
}

TEST_CASE("the swap program is rejected with the right witness") {
  Program p = load_corpus("swap.fun");
  Description d = extract_description(p);
  IsctVerdict v = check_isct(d);
  auto* neg = std::get_if<NotIsct>(&v);
  REQUIRE(neg);
  CHECK(neg->witness ==
        make_graph("swap", 2, "swap", 2, {{0, 0, false}, {1, 1, false}}));
}

TEST_CASE("extraction recovers the published Ackermann graphs") {
  Program p = load_corpus("ackermann.fun");
  Description d = extract_description(p);
  REQUIRE(d.graphs.size() == 3);
  CHECK(d.graphs[0].first.pos == Position{1, 0});
  CHECK(d.graphs[0].second == g1());
  CHECK(d.graphs[1].first.pos == Position{1, 1});
  CHECK(d.graphs[1].second == g1());
  CHECK(d.graphs[2].first.pos == Position{1, 1, 1});
  CHECK(d.graphs[2].second == g2());
}

TEST_CASE("extraction on the exponentiation toy") {
  Program p = load_corpus("toy.fun");
  Description d = extract_description(p);
  REQUIRE(d.graphs.size() == 3);
  // f -> f: x stays, y strictly drops
  CHECK(d.graphs[0].second == make_graph("f", 5, "f", 5, {{0, 0, false}, {1, 1, true}}));
  // f -> g: x, y, exp carry over; x also bounds z
  CHECK(d.graphs[1].second ==
        make_graph("f", 5, "g", 5, {{0, 0, false}, {1, 1, false}, {3, 3, false}, {0, 4, false}}));
  // g -> g: exp stays, z strictly drops
  CHECK(d.graphs[2].second == make_graph("g", 5, "g", 5, {{3, 3, false}, {4, 4, true}}));
}

TEST_CASE("successor arguments and unguarded decrements yield no arcs") {
  Program p = parse_program("f(x) = f(x + 1)");
  Description d = extract_description(p);
  REQUIRE(d.graphs.size() == 1);
  CHECK(d.graphs[0].second.arcs.empty());

  // x - 1 without an entailed guard gives nothing (truncated subtraction)
  Program q = parse_program("f(x, y) =\n  if y = 0 then 0\n  else f(x - 1, y - 1)");
  Description dq = extract_description(q);
  REQUIRE(dq.graphs.size() == 1);
  CHECK(dq.graphs[0].second == make_graph("f", 2, "f", 2, {{1, 1, true}}));
}

TEST_CASE("the true-stages program has no strict recursive arcs") {
  Program p = load_corpus("truestages.fun");
  Description d = extract_description(p);
  for (const auto& [call, g] : d.graphs)
    if (call.source == "g" && call.target == "g")
      for (const Arc& a : g.arcs) CHECK(!a.strict);
  IsctVerdict v = check_isct(d);
  auto* neg = std::get_if<NotIsct>(&v);
  REQUIRE(neg);
  CHECK(!neg->witness.has_strict_self_arc());
}

TEST_CASE("runtime safety checks") {
  Program p = load_corpus("ackermann.fun");
  Description d = extract_description(p);
  std::vector<Call> calls = calls_of(p);
  auto transition = [&](const Call& c, std::vector<std::uint64_t> from,
                        std::vector<std::uint64_t> to) {
    StateTransition t;
    t.source_fn = c.source;
    t.source_args = std::move(from);
    t.call = c;
    t.target_fn = c.target;
    t.target_args = std::move(to);
    t.resolved = true;
    return t;
  };
  CHECK(check_safety_runtime(d, transition(calls[2], {2, 3}, {2, 2})));
  CHECK(check_safety_runtime(d, transition(calls[1], {2, 3}, {1, 9})));
  CHECK(!check_safety_runtime(d, transition(calls[2], {2, 3}, {2, 3})));
}

TEST_CASE("monitoring terminating corpus runs finds no violations") {
  struct Case {
    const char* file;
    std::vector<std::uint64_t> args;
  };
  for (const Case& c : {Case{"ackermann.fun", {2, 3}}, Case{"toy.fun", {2, 3, 0, 1, 0}},
                        Case{"countdown.fun", {5}}}) {
    Program p = load_corpus(c.file);
    OpInterp ops = make_op_table(p, nullptr);
    Description d = extract_description(p);
    std::uint64_t fuel = 1u << 20;
    std::set<std::pair<std::string, std::vector<std::uint64_t>>> seen;
    std::vector<std::pair<std::string, std::vector<std::uint64_t>>> work;
    work.emplace_back(p.entry().name, c.args);
    while (!work.empty()) {
      auto [fn, args] = work.back();
      work.pop_back();
      if (!seen.emplace(fn, args).second) continue;
      for (const StateTransition& tr : state_transitions(fn, args, p, ops, fuel)) {
        REQUIRE(tr.resolved);
        REQUIRE(check_safety_runtime(d, tr));
        work.emplace_back(tr.target_fn, tr.target_args);
      }
    }
  }
}

TEST_CASE("ramsey bound values") {
  CHECK(ramsey_bound(1) == 3);
  CHECK(ramsey_bound(2) == 6);
  CHECK(ramsey_bound(3) == 17);
  CHECK_THROWS_AS(ramsey_bound(0), RamseyOverflow);
  CHECK_THROWS_AS(ramsey_bound(9), RamseyOverflow);
}

TEST_CASE("R(3,3) = 6 by exhaustive two-coloring search") {
  auto has_mono_triangle = [](unsigned n, std::uint32_t coloring) {
    auto edge = [&](unsigned i, unsigned j) { // index of edge {i<j} in K_n
      unsigned idx = 0;
      for (unsigned a = 0; a < i; ++a) idx += n - 1 - a;
      return idx + (j - i - 1);
    };
    for (unsigned i = 0; i < n; ++i)
      for (unsigned j = i + 1; j < n; ++j)
        for (unsigned k = j + 1; k < n; ++k) {
          bool c1 = coloring >> edge(i, j) & 1;
          bool c2 = coloring >> edge(j, k) & 1;
          bool c3 = coloring >> edge(i, k) & 1;
          if (c1 == c2 && c2 == c3) return true;
        }
    return false;
  };
  bool k5_escape = false;
  for (std::uint32_t c = 0; c < (1u << 10); ++c)
    if (!has_mono_triangle(5, c)) k5_escape = true;
  CHECK(k5_escape);
  for (std::uint32_t c = 0; c < (1u << 15); ++c) REQUIRE(has_mono_triangle(6, c));
}

TEST_CASE("fold search on short multipaths") {
  Multipath m = make_multipath({g2(), g2(), g2()});
  std::optional<Folding> f = find_folding(m);
  REQUIRE(f);
  CHECK(f->i == 0);
  CHECK(f->j == 1);
  CHECK(f->exact_cover());
  CHECK(f->h == g2());

  // a single f -> g graph admits no decomposition with equal endpoints
  Program toy = load_corpus("toy.fun");
  Description d = extract_description(toy);
  Multipath single = make_multipath({d.graphs[1].second});
  CHECK(!find_folding(single));
}

TEST_CASE("multipaths at the ramsey bound always fold") {
  std::mt19937_64 rng(17);
  // c = 1: the countdown self-graph
  SizeChangeGraph count = make_graph("f", 1, "f", 1, {{0, 0, true}});
  for (int it = 0; it < 1000; ++it) {
    Multipath m = make_multipath({count, count, count});
    REQUIRE(find_folding(m));
  }
  // c = 2: the Ackermann closure, m = 6
  std::vector<SizeChangeGraph> cl2 = closure({g1(), g2()});
  REQUIRE(cl2.size() == 2);
  for (int it = 0; it < 1000; ++it) {
    std::vector<SizeChangeGraph> gs;
    for (int i = 0; i < 6; ++i) gs.push_back(cl2[rng() % 2]);
    std::optional<Folding> f = find_folding(make_multipath(std::move(gs)));
    REQUIRE(f);
    REQUIRE(is_idempotent(f->h));
  }
  // c = 3: the A_2 family, m = 17
  auto [prog, d] = ackermann_description(2);
  std::vector<SizeChangeGraph> cl3 = closure(d.range());
  REQUIRE(cl3.size() == 3);
  std::uint64_t len = ramsey_bound(3);
  for (int it = 0; it < 1000; ++it) {
    std::vector<SizeChangeGraph> gs;
    for (std::uint64_t i = 0; i < len; ++i) gs.push_back(cl3[rng() % 3]);
    std::optional<Folding> f = find_folding(make_multipath(std::move(gs)));
    REQUIRE(f);
    REQUIRE(is_idempotent(f->h));
  }
}

TEST_CASE("an exact-cover fold is preferred when one exists") {
  // G2 G2 G2 G2 G1 G2 has no exact-cover fold, only an inner triangle
  Multipath m = make_multipath({g2(), g2(), g2(), g2(), g1(), g2()});
  std::optional<Folding> f = find_folding(m);
  REQUIRE(f);
  CHECK(!f->exact_cover());
  CHECK(f->h == g2());
  // with the strict graph duplicated, the exact cover comes back
  Multipath m2 = make_multipath({g1(), g2(), g2(), g2(), g1(), g2()});
  std::optional<Folding> f2 = find_folding(m2);
  REQUIRE(f2);
  CHECK(f2->exact_cover());
  CHECK(f2->h == g1());
}

TEST_CASE("generalized Ackermann descriptions") {
  auto [p1, d1] = ackermann_description(1);
  REQUIRE(d1.graphs.size() == 3);
  SizeChangeGraph a1 = make_graph("A", 2, "A", 2, {{0, 0, true}});
  SizeChangeGraph a2 = make_graph("A", 2, "A", 2, {{0, 0, false}, {1, 1, true}});
  CHECK(d1.graphs[0].second == a1); // the y=0 branch call
  CHECK(d1.graphs[1].second == a1); // the outer nested call
  CHECK(d1.graphs[2].second == a2); // the inner nested call

  auto [p2, d2] = ackermann_description(2);
  REQUIRE(d2.graphs.size() == 4);
  SizeChangeGraph a3 =
      make_graph("A", 3, "A", 3, {{0, 0, false}, {1, 1, false}, {2, 2, true}});
  CHECK(d2.graphs.back().second == a3);

  for (unsigned n = 1; n <= 5; ++n) {
    auto [p, d] = ackermann_description(n);
    CHECK(is_isct(d));
  }
}

TEST_CASE("descent search") {
  Multipath m1 = make_multipath({g1(), g1(), g1()});
  std::optional<DescentThread> t1 = descent_search(m1);
  REQUIRE(t1);
  CHECK(t1->start == 0);
  CHECK(t1->strict_count == 3);
  CHECK(t1->params == std::vector<std::uint32_t>{0, 0, 0, 0});

  Multipath m2 = make_multipath({g2(), g2()});
  std::optional<DescentThread> t2 = descent_search(m2);
  REQUIRE(t2);
  CHECK(t2->strict_count == 2);
  CHECK(t2->params == std::vector<std::uint32_t>{1, 1, 1});

  Multipath m3 = make_multipath({swap_graph(), swap_graph(), swap_graph(), swap_graph()});
  std::optional<DescentThread> t3 = descent_search(m3);
  REQUIRE(t3);
  CHECK(t3->strict_count == 0);
}

TEST_CASE("rejected descriptions admit no descent through the witness") {
  for (const char* name : {"swap.fun", "truestages.fun"}) {
    Program p = load_corpus(name);
    IsctVerdict v = check_isct(extract_description(p));
    auto* neg = std::get_if<NotIsct>(&v);
    REQUIRE(neg);
    for (std::size_t k : {2u, 10u, 50u}) {
      std::vector<SizeChangeGraph> gs(k, neg->witness);
      std::optional<DescentThread> t = descent_search(make_multipath(std::move(gs)));
      if (t) CHECK(t->strict_count == 0);
    }
  }
}

TEST_CASE("description files round-trip") {
  for (const char* name : {"ackermann.fun", "toy.fun", "truestages.fun", "countdown.fun"}) {
    Program p = load_corpus(name);
    Description d = extract_description(p);
    std::string text = description_to_text(d);
    Description back = description_from_text(text, p);
    REQUIRE(back.graphs.size() == d.graphs.size());
    for (std::size_t i = 0; i < d.graphs.size(); ++i) {
      CHECK(back.graphs[i].first == d.graphs[i].first);
      CHECK(back.graphs[i].second == d.graphs[i].second);
    }
  }
  Program p = load_corpus("ackermann.fun");
  CHECK_THROWS_AS(description_from_text("call e A A uses 0", p), Error);
}
