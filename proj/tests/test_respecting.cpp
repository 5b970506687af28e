#include <gtest/gtest.h>

#include "instances.hpp"

using namespace minoragg;
using namespace inst;

// ---------- 1-respecting ----------

TEST(OneRespecting, CycleAndTreeOnly) {
  WeightedGraph c4({1, 2, 3, 4}, {{1, 2, 1}, {2, 3, 1}, {3, 4, 1}, {4, 1, 1}});
  RootedTree t(c4, {0, 1, 2}, 1);
  auto w = world(c4);
  Forest f = rooted(*w, t);
  auto cut = one_respecting_cuts(*w, f);
  for (int v = 1; v < 4; ++v) EXPECT_EQ(cut[v], 2);
  WeightedGraph tr({1, 2, 3}, {{1, 2, 5}, {2, 3, 7}});
  RootedTree t2(tr, {0, 1}, 1);
  auto w2 = world(tr);
  Forest f2 = rooted(*w2, t2);
  auto c2 = one_respecting_cuts(*w2, f2);
  EXPECT_EQ(c2[w2->index_of(2)], 5);
  EXPECT_EQ(c2[w2->index_of(3)], 7);
}

TEST(OneRespecting, RandomVsOracle) {
  for (int s = 0; s < 100; ++s) {
    auto g = gen_gnp(5 + s % 40, 0.15 + 0.01 * (s % 20), 7000 + s, {1, 20});
    auto t = random_spanning_tree(g, s);
    auto w = world(g);
    Forest f = rooted(*w, t);
    long long before = w->ledger.total;
    auto cut = one_respecting_cuts(*w, f);
    for (int e : t.edges()) EXPECT_EQ(cut[t.lower(e)], cut_value_pair(g, t, e)) << "seed " << s;
    double lg = std::log2(std::max<double>(g.n(), 2));
    EXPECT_LE(w->ledger.total - before, 20 * lg * lg * lg + 20);
    EXPECT_GT(w->ledger.phases["1-respecting"], 0);
  }
}

// ---------- fixed-edge covers and separable ----------

TEST(PathToPath, CovFixedEdgeExamplesAndSweep) {
  for (int s = 0; s < 60; ++s) {
    int L = 1 + s % 9, M = 1 + (s * 7) % 11;
    auto x = p2p(L, M, 6 + s % 20, 100 + s);
    auto pe = tail(x.s.path_edges[0]), qe = tail(x.s.path_edges[1]);
    for (int i = 1; i <= L; ++i) {
      auto cov = cov_fixed_edge(x.in, i);
      for (int j = 1; j <= M; ++j) EXPECT_EQ(cov[j], cov_value_pair(x.s.g, x.t, pe[i - 1], qe[j - 1]));
    }
  }
  auto x = p2p(3, 3, 0, 1);
  EXPECT_THROW(cov_fixed_edge(x.in, 0), InputViolation);
  EXPECT_THROW(cov_fixed_edge(x.in, 4), InputViolation);
}

TEST(PathToPath, Separable) {
  for (int s = 0; s < 60; ++s) {
    auto x = separable(2 + s % 12, 2 + s % 7, 300 + s);
    ASSERT_TRUE(is_separable(x.in));
    auto got = solve_separable(x.in);
    EXPECT_EQ(got.value, brute(x.g, x.t, {}, cross_pairs({x.pe, x.qe})).value) << s;
  }
  auto x = p2p(4, 4, 0, 3);
  auto es = x.s.g.edges();
  es.push_back({x.w->id(x.in.P[2]), x.w->id(x.in.Q[2]), 1});
  WeightedGraph g(x.s.g.nodes(), es);
  RootedTree t(g, x.s.tree, 1);
  auto w = world(g);
  auto in = path_to_path_from_parents(*w, parents_of(t, w->n()));
  EXPECT_FALSE(is_separable(in));
  EXPECT_THROW(solve_separable(in), InputViolation);
}

TEST(PathToPath, RandomVsOracle) {
  for (int s = 0; s < 200; ++s) {
    int L = 1 + (s * 5) % 40, M = 1 + (s * 11) % 37;
    auto x = p2p(L, M, (L + M) * (1 + s % 3), 900 + s);
    auto pe = tail(x.s.path_edges[0]), qe = tail(x.s.path_edges[1]);
    std::vector<int> singles = pe;
    singles.insert(singles.end(), qe.begin(), qe.end());
    auto want = brute(x.s.g, x.t, singles, cross_pairs({pe, qe}));
    auto got = solve_path_to_path(x.in);
    ASSERT_TRUE(got.found());
    EXPECT_EQ(got.value, want.value) << "seed " << s << " L " << L << " M " << M;
    Weight check = got.tree_edges.size() == 1 ? cut_value_pair(x.s.g, x.t, got.tree_edges[0])
                                              : cut_value_pair(x.s.g, x.t, got.tree_edges[0], got.tree_edges[1]);
    EXPECT_EQ(check, got.value);
    EXPECT_TRUE(x.w->ctx->fidelity.empty());
  }
}

TEST(PathToPath, MongeOnRandomInstances) {
  for (int s = 0; s < 30; ++s) {
    auto x = p2p(8, 9, 40, 5000 + s);
    auto pe = tail(x.s.path_edges[0]), qe = tail(x.s.path_edges[1]);
    auto C = [&](int i, int j) { return cut_value_pair(x.s.g, x.t, pe[i], qe[j]); };
    for (int i = 0; i + 1 < 8; ++i)
      for (int j = 0; j + 1 < 9; ++j) EXPECT_LE(C(i, j) + C(i + 1, j + 1), C(i, j + 1) + C(i + 1, j));
  }
}

// ---------- stars ----------

TEST(Star, InterestLists) {
  // two paths with heavy cross weight: each is interesting to the other
  auto s = star_graph({4, 4}, 0, 1);
  auto es = s.g.edges();
  es.push_back({3, 7, 50});
  es.push_back({5, 9, 50});
  WeightedGraph g(s.g.nodes(), es);
  RootedTree t(g, s.tree, 1);
  auto w = world(g);
  auto st = star_from_parents(*w, parents_of(t, w->n()));
  auto il = compute_interest_lists(st);
  ASSERT_EQ(il.lists.size(), 2u);
  EXPECT_EQ(il.lists[0], std::vector<NodeId>{il.path_id[1]});
  EXPECT_EQ(il.lists[1], std::vector<NodeId>{il.path_id[0]});
  // no cross edges: empty lists
  auto s0 = star_graph({3, 3, 3}, 0, 2);
  RootedTree t0(s0.g, s0.tree, 1);
  auto w0 = world(s0.g);
  auto st0 = star_from_parents(*w0, parents_of(t0, w0->n()));
  for (auto& l : compute_interest_lists(st0).lists) EXPECT_TRUE(l.empty());
}

TEST(Star, InterestListsStrongWeakAndCap) {
  for (int s = 0; s < 60; ++s) {
    auto sg = random_star(4000 + s, 40, 5, 3);
    RootedTree t(sg.g, sg.tree, 1);
    auto w = world(sg.g);
    auto st = star_from_parents(*w, parents_of(t, w->n()));
    auto il = compute_interest_lists(st);
    EXPECT_FALSE(il.overflow);
    for (auto& l : il.lists) EXPECT_LE(l.size(), interest_cap(*w->ctx));
    EXPECT_EQ(interest_violations(sg, t, st, il), 0) << s;
  }
}

TEST(Star, NoCrossEdges) {
  for (int k : {2, 5}) {
    auto s = star_graph(std::vector<int>(k, 3), 0, 9);
    RootedTree t(s.g, s.tree, 1);
    auto w = world(s.g);
    auto st = star_from_parents(*w, parents_of(t, w->n()));
    auto got = solve_star(st);
    auto want = brute(s.g, t, s.tree, cross_pairs(s.path_edges));
    EXPECT_EQ(got.value, want.value);
  }
}

TEST(Star, RandomVsOracle) {
  for (int s = 0; s < 100; ++s) {
    std::mt19937_64 rng(s);
    int k = 2 + static_cast<int>(rng() % 7);
    std::vector<int> lens(k);
    for (auto& L : lens) L = 1 + static_cast<int>(rng() % 16);
    int total = std::accumulate(lens.begin(), lens.end(), 0);
    auto sg = star_graph(lens, total * (1 + s % 3), 8000 + s);
    RootedTree t(sg.g, sg.tree, 1);
    auto w = world(sg.g);
    auto st = star_from_parents(*w, parents_of(t, w->n()));
    auto got = solve_star(st);
    auto want = brute(sg.g, t, sg.tree, cross_pairs(sg.path_edges));
    EXPECT_EQ(got.value, want.value) << "seed " << s;
    EXPECT_TRUE(w->ctx->fidelity.empty()) << s;
  }
}

TEST(Star, RejectsNonStar) {
  WeightedGraph g({1, 2, 3, 4}, {{1, 2, 1}, {2, 3, 1}, {2, 4, 1}});
  RootedTree t(g, {0, 1, 2}, 1);
  auto w = world(g);
  EXPECT_THROW(star_forest(*w, parents_of(t, w->n())), InputViolation);
}

TEST(EdgeColoring, ProperWithFewColors) {
  for (int s = 0; s < 40; ++s) {
    auto g = gen_gnp(6 + s % 30, 0.3, 60 + s, {1, 1});
    auto w = world(g);
    auto col = edge_coloring(*w);
    int D = 0;
    for (int v = 0; v < w->n(); ++v) D = std::max<int>(D, static_cast<int>(w->inc(v).size()));
    for (int v = 0; v < w->n(); ++v) {
      std::set<int> seen;
      for (int e : w->inc(v)) {
        ASSERT_GE(col[e], 0);
        EXPECT_LT(col[e], 2 * D - 1 + (D == 0));
        EXPECT_TRUE(seen.insert(col[e]).second) << s;
      }
    }
  }
}

// ---------- subtree instances ----------

TEST(Subtree, PairwiseColoring) {
  std::vector<std::uint64_t> ids{3, 9, 12, 40, 41, 1000};
  auto cs = pairwise_coloring(ids);
  EXPECT_EQ(cs.size(), 10u);  // bit length of 1000
  for (std::size_t a = 0; a < ids.size(); ++a)
    for (std::size_t b = a + 1; b < ids.size(); ++b) {
      bool split = false;
      for (auto& c : cs) split = split || c[a] != c[b];
      EXPECT_TRUE(split);
    }
}

TEST(Subtree, RandomVsOracle) {
  for (int s = 0; s < 60; ++s) {
    auto g = gen_gnp(6 + s % 35, 0.2, 11000 + s, {1, 12});
    auto t0 = random_spanning_tree(g, s);
    int c = static_cast<int>(s % g.n());
    RootedTree t(g, t0.edges(), g.nodes()[c]);
    auto w = world(g);
    Forest f = rooted(*w, t);
    auto got = solve_subtree_instance(*w, f);
    auto groups = subtree_groups(t, c);
    auto want = brute(g, t, t.edges(), cross_pairs(groups));
    EXPECT_EQ(got.value, want.value) << "seed " << s;
  }
}

// ---------- 2-respecting ----------

TEST(TwoRespecting, SmallExamples) {
  WeightedGraph c4({1, 2, 3, 4}, {{1, 2, 1}, {2, 3, 1}, {3, 4, 1}, {4, 1, 1}});
  RootedTree t(c4, {0, 1, 2}, 1);
  auto run = solve_two_respecting(c4, t);
  EXPECT_EQ(run.cut.value, 2);
  EXPECT_EQ(run.cut.cut_edges.size(), 2u);
  WeightedGraph tr({1, 2, 3, 4}, {{1, 2, 5}, {2, 3, 3}, {2, 4, 8}});
  RootedTree t2(tr, {0, 1, 2}, 1);
  EXPECT_EQ(solve_two_respecting(tr, t2).cut.value, 3);
}

TEST(TwoRespecting, RandomVsOracle) {
  const char* models[] = {"gnp", "tree-plus", "planar-grid"};
  const double ps[] = {0.08, 1.5, 0};
  for (int s = 0; s < 300; ++s) {
    std::size_t n = 4 + (s * 37) % 117;
    auto g = gen_model(models[s % 3], n, ps[s % 3], 20000 + s, {1, 30});
    auto t = random_spanning_tree(g, s);
    auto run = solve_two_respecting(g, t);
    auto want = oracle_two_respecting(g, t);
    ASSERT_EQ(run.cut.value, want.value) << "seed " << s << " n " << n;
    Weight check = run.cut.tree_edges.size() == 1 ? cut_value_pair(g, t, run.cut.tree_edges[0])
                                                  : cut_value_pair(g, t, run.cut.tree_edges[0], run.cut.tree_edges[1]);
    EXPECT_EQ(check, run.cut.value);
    EXPECT_TRUE(run.fidelity.empty()) << s << ": " << (run.fidelity.empty() ? "" : run.fidelity[0]);
    EXPECT_EQ(run.ledger.violation_count, 0) << s;
  }
}

TEST(TwoRespecting, ScopesAreCutEquivalent) {
  for (int s = 0; s < 30; ++s) {
    auto g = gen_gnp(8 + s % 20, 0.3, 31000 + s, {1, 9});
    auto t = random_spanning_tree(g, s);
    auto w = world(g);
    std::vector<char> te(w->m(), 0);
    for (int e : t.edges()) te[e] = 1;
    Forest f = orient_and_hl(*w, te, 0);
    int c = find_centroid(*w, f);
    Forest fc = reroot(*w, f, c);
    auto scopes = detail::split_at_centroid(*w, fc, c);
    for (auto& sc : scopes) {
      Network& h = *sc.net;
      std::vector<int> tree_refs;
      for (int v = 0; v < h.n(); ++v)
        if (sc.parent[v] >= 0 && h.edge(sc.parent[v]).ref >= 0) tree_refs.push_back(static_cast<int>(h.edge(sc.parent[v]).ref));
      // brute force cut inside H via its own tree
      std::vector<NodeId> ids(h.ids());
      std::vector<Edge> es;
      for (auto& e : h.edges()) es.push_back({h.id(e.a), h.id(e.b), e.w});
      WeightedGraph hg(ids, es);
      std::vector<int> htree;
      for (int v = 0; v < h.n(); ++v)
        if (sc.parent[v] >= 0) htree.push_back(sc.parent[v]);
      NodeId hroot = 0;
      for (int v = 0; v < h.n(); ++v)
        if (sc.parent[v] < 0) hroot = h.id(v);
      RootedTree ht(hg, htree, hroot);
      for (int e : htree) {
        long r1 = h.edge(e).ref;
        if (r1 < 0) continue;
        EXPECT_EQ(cut_value_pair(hg, ht, e), cut_value_pair(g, t, static_cast<int>(r1)));
        for (int f2 : htree) {
          long r2 = h.edge(f2).ref;
          if (f2 <= e || r2 < 0) continue;
          EXPECT_EQ(cut_value_pair(hg, ht, e, f2), cut_value_pair(g, t, static_cast<int>(r1), static_cast<int>(r2)));
        }
      }
    }
  }
}

TEST(TwoRespecting, Deterministic) {
  auto g = gen_gnp(60, 0.1, 77, {1, 9});
  auto t = random_spanning_tree(g, 3);
  auto a = solve_two_respecting(g, t), b = solve_two_respecting(g, t);
  EXPECT_EQ(a.cut.value, b.cut.value);
  EXPECT_EQ(a.cut.tree_edges, b.cut.tree_edges);
  EXPECT_EQ(a.ledger.total, b.ledger.total);
  EXPECT_EQ(a.ledger.phases, b.ledger.phases);
}
