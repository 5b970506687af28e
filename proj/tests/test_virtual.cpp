#include <gtest/gtest.h>

#include <random>

#include "minoragg/generators.hpp"
#include "minoragg/virtual.hpp"
#include "random_algorithms.hpp"

using namespace minoragg;

namespace {

std::unique_ptr<Network> world(const WeightedGraph& g) { return Network::from_graph(make_context(g), g); }

NodeId leader(Network& g) {
  RoundSpec s;
  s.contract_all = true;
  s.input = [&](int v) { return enc_i(static_cast<std::int64_t>(g.id(v))); };
  s.consensus = ops::min();
  return static_cast<NodeId>(dec_i(g.round(s).y_of(0)));
}

VirtualGraph random_extension(Network& base, int beta, std::mt19937_64& rng) {
  VirtualGraph vg;
  vg.base = &base;
  for (int i = 0; i < beta; ++i) vg.virtual_nodes.push_back(base.ctx->new_virtual_id());
  for (NodeId x : vg.virtual_nodes) {
    int deg = 1 + static_cast<int>(rng() % 4);
    for (int k = 0; k < deg; ++k)
      vg.virtual_edges.push_back({base.id(static_cast<int>(rng() % base.n())), x, 1 + static_cast<Weight>(rng() % 7)});
  }
  for (int i = 0; i < beta; ++i)
    for (int j = i + 1; j < beta; ++j)
      if (rng() % 2) vg.virtual_edges.push_back({vg.virtual_nodes[i], vg.virtual_nodes[j], 1 + static_cast<Weight>(rng() % 5)});
  return vg;
}

}  // namespace

TEST(Virtual, LeaderElectionPathPlusVirtual) {
  WeightedGraph g({5, 6, 7}, {{5, 6, 1}, {6, 7, 1}});
  auto base = world(g);
  VirtualGraph vg;
  vg.base = base.get();
  vg.virtual_nodes = {2};  // smaller than every real id on purpose
  vg.virtual_edges = {{5, 2, 1}, {7, 2, 1}};
  auto lit = simulate_virtual(vg, [](Network& n) { return leader(n); });
  auto mat = materialize_virtual(vg);
  EXPECT_EQ(lit, 2u);
  EXPECT_EQ(leader(*mat), 2u);
}

TEST(Virtual, TranscriptEquivalenceAndBlowup) {
  std::mt19937_64 rng(5);
  for (int beta = 0; beta <= 4; ++beta)
    for (int s = 0; s < 20; ++s) {
      auto g = gen_gnp(10 + s % 9, 0.3, 1000 * beta + s, {1, 6});
      auto base = world(g);
      auto vg = random_extension(*base, beta, rng);
      testalg::RandomAlgorithm alg{rng()};
      long long before = base->ledger.total;
      auto lit = simulate_virtual(vg, alg);
      long long used = base->ledger.total - before;
      auto mat = materialize_virtual(vg);
      EXPECT_EQ(lit, alg(*mat)) << "beta " << beta << " seed " << s;
      EXPECT_LE(used, 4LL * (beta + 1) * alg.rounds);
      // the charge used for materialized worlds bounds the literal cost
      EXPECT_LE(used, mat->phi() * alg.rounds);
      if (beta == 0) EXPECT_LE(used, 2LL * alg.rounds);
    }
}

TEST(Virtual, ReplaceSumsParallelEdges) {
  WeightedGraph g({1, 2, 3}, {{1, 2, 2}, {1, 2, 3}, {2, 3, 1}, {1, 3, 4}});
  auto w = world(g);
  std::unique_ptr<Network> base;
  auto vg = replace_with_virtual(*w, {0}, base);
  EXPECT_EQ(w->ledger.total, 2);
  ASSERT_EQ(vg.virtual_nodes, std::vector<NodeId>{1});
  ASSERT_EQ(vg.virtual_edges.size(), 2u);
  EXPECT_EQ(vg.virtual_edges[0].a, 2u);
  EXPECT_EQ(vg.virtual_edges[0].w, 5);
  EXPECT_EQ(vg.virtual_edges[1].a, 3u);
  EXPECT_EQ(vg.virtual_edges[1].w, 4);
  EXPECT_EQ(base->n(), 2);
}

TEST(Virtual, ReplacePreservesCutsAwayFromNode) {
  for (int s = 0; s < 20; ++s) {
    auto g = gen_gnp(9, 0.45, 300 + s, {1, 5});
    // add parallel edges
    std::vector<Edge> es = g.edges();
    for (std::size_t i = 0; i < 5; ++i) es.push_back(es[i]);
    WeightedGraph h(g.nodes(), es);
    auto t = random_spanning_tree(h, s);
    auto w = world(h);
    int v = s % static_cast<int>(h.n());
    std::unique_ptr<Network> base;
    auto vg = replace_with_virtual(*w, {v}, base);
    auto mat = materialize_virtual(vg);
    // rebuild as WeightedGraph; tree edges at v map to the merged twin edges
    std::vector<Edge> me;
    for (auto& e : mat->edges()) me.push_back({mat->id(e.a), mat->id(e.b), e.w});
    WeightedGraph hg(mat->ids(), me);
    std::vector<int> te;
    NodeId vid = h.nodes()[v];
    for (int id : t.edges()) {
      auto [a, b, wt] = h.edge(id);
      for (std::size_t k = 0; k < hg.m(); ++k) {
        auto [x, y, ww] = hg.edge(k);
        bool incident = a == vid || b == vid;
        if (std::minmax(x, y) != std::minmax(a, b)) continue;
        if (incident || mat->edge(static_cast<int>(k)).ref == id) {
          te.push_back(static_cast<int>(k));
          break;
        }
      }
    }
    ASSERT_EQ(te.size(), t.edges().size());
    RootedTree t2(hg, te, t.root());
    for (std::size_t i = 0; i < te.size(); ++i)
      for (std::size_t j = i + 1; j < te.size(); ++j) {
        auto [a1, b1, w1] = h.edge(t.edges()[i]);
        auto [a2, b2, w2] = h.edge(t.edges()[j]);
        if (a1 == vid || b1 == vid || a2 == vid || b2 == vid) continue;
        EXPECT_EQ(cut_value_pair(h, t, t.edges()[i], t.edges()[j]), cut_value_pair(hg, t2, te[i], te[j]));
      }
  }
}

TEST(Virtual, Devirtualize) {
  WeightedGraph g({1, 2, 3, 4}, {{1, 2, 1}, {2, 3, 1}, {3, 4, 1}});
  auto w = world(g);
  std::unique_ptr<Network> base;
  // removing the end node keeps the rest connected
  auto vg = replace_with_virtual(*w, {3}, base);
  auto mat = materialize_virtual(vg);
  long long before = mat->ledger.total;
  auto lead = devirtualize_scope(*mat, [](Network& s) {
    EXPECT_EQ(s.beta(), 0);
    return leader(s);
  });
  EXPECT_EQ(lead, 1u);
  EXPECT_EQ(mat->ledger.total - before, 1);
  // removing a middle node disconnects
  std::unique_ptr<Network> base2;
  auto vg2 = replace_with_virtual(*w, {1}, base2);
  auto mat2 = materialize_virtual(vg2);
  EXPECT_THROW(devirtualize_scope(*mat2, [](Network& s) { return leader(s); }), MustUseSeparableFallback);
  // beta = 0 is the identity
  EXPECT_EQ(devirtualize_scope(*w, [](Network& s) { return s.n(); }), 4);
}
