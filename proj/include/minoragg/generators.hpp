#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "graph.hpp"

namespace minoragg {

using Rng = std::mt19937_64;

struct GenOptions {
  Weight wmin = 1, wmax = 10;
};

namespace detail {
inline Weight draw_weight(Rng& rng, const GenOptions& o) {
  return std::uniform_int_distribution<Weight>(o.wmin, o.wmax)(rng);
}
inline std::vector<NodeId> ids_1_to_n(std::size_t n) {
  std::vector<NodeId> v(n);
  std::iota(v.begin(), v.end(), NodeId{1});
  return v;
}
}  // namespace detail

// G(n, p) made connected by joining components with extra random edges.
inline WeightedGraph gen_gnp(std::size_t n, double p, std::uint64_t seed, GenOptions o = {}) {
  Rng rng(seed);
  std::bernoulli_distribution coin(p);
  std::vector<Edge> es;
  std::vector<int> dsu(n);
  std::iota(dsu.begin(), dsu.end(), 0);
  auto find = [&](int x) {
    while (dsu[x] != x) x = dsu[x] = dsu[dsu[x]];
    return x;
  };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (coin(rng)) {
        es.push_back({i + 1, j + 1, detail::draw_weight(rng, o)});
        dsu[find(static_cast<int>(i))] = find(static_cast<int>(j));
      }
  for (std::size_t i = 1; i < n; ++i) {
    if (find(static_cast<int>(i)) == find(0)) continue;
    std::size_t j = std::uniform_int_distribution<std::size_t>(0, i - 1)(rng);
    while (find(static_cast<int>(j)) == find(static_cast<int>(i))) j = (j + 1) % i;
    es.push_back({j + 1, i + 1, detail::draw_weight(rng, o)});
    dsu[find(static_cast<int>(i))] = find(static_cast<int>(j));
  }
  return WeightedGraph(detail::ids_1_to_n(n), es);
}

// Random recursive tree plus `extra` random non-tree edges.
inline WeightedGraph gen_tree_plus(std::size_t n, std::size_t extra, std::uint64_t seed, GenOptions o = {}) {
  Rng rng(seed);
  std::vector<Edge> es;
  for (std::size_t i = 1; i < n; ++i) {
    std::size_t j = std::uniform_int_distribution<std::size_t>(0, i - 1)(rng);
    es.push_back({j + 1, i + 1, detail::draw_weight(rng, o)});
  }
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  for (std::size_t k = 0; k < extra && n > 1; ++k) {
    std::size_t a = pick(rng), b = pick(rng);
    if (a == b) continue;
    es.push_back({a + 1, b + 1, detail::draw_weight(rng, o)});
  }
  return WeightedGraph(detail::ids_1_to_n(n), es);
}

// rows x cols grid, rows*cols >= n with rows = floor(sqrt(n)).
inline WeightedGraph gen_planar_grid(std::size_t n, std::uint64_t seed, GenOptions o = {}) {
  Rng rng(seed);
  std::size_t r = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(n))));
  std::size_t c = (n + r - 1) / r;
  std::size_t total = r * c;
  std::vector<Edge> es;
  auto id = [&](std::size_t i, std::size_t j) { return static_cast<NodeId>(i * c + j + 1); };
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) {
      if (j + 1 < c) es.push_back({id(i, j), id(i, j + 1), detail::draw_weight(rng, o)});
      if (i + 1 < r) es.push_back({id(i, j), id(i + 1, j), detail::draw_weight(rng, o)});
    }
  return WeightedGraph(detail::ids_1_to_n(total), es);
}

// Spanning tree from random edge priorities (Kruskal), rooted at a random node.
inline RootedTree random_spanning_tree(const WeightedGraph& g, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<int> order(g.m());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  std::vector<int> dsu(g.n());
  std::iota(dsu.begin(), dsu.end(), 0);
  auto find = [&](int x) {
    while (dsu[x] != x) x = dsu[x] = dsu[dsu[x]];
    return x;
  };
  std::vector<int> tree;
  for (int e : order) {
    int a = find(g.index(g.edge(e).u)), b = find(g.index(g.edge(e).v));
    if (a == b) continue;
    dsu[a] = b;
    tree.push_back(e);
  }
  std::sort(tree.begin(), tree.end());
  NodeId root = g.nodes()[std::uniform_int_distribution<std::size_t>(0, g.n() - 1)(rng)];
  return RootedTree(g, tree, root);
}

inline WeightedGraph gen_model(const std::string& model, std::size_t n, double p, std::uint64_t seed, GenOptions o = {}) {
  if (model == "gnp") return gen_gnp(n, p, seed, o);
  if (model == "tree-plus") return gen_tree_plus(n, static_cast<std::size_t>(p * static_cast<double>(n)), seed, o);
  if (model == "planar-grid") return gen_planar_grid(n, seed, o);
  throw InputViolation("unknown model '" + model + "'");
}

}  // namespace minoragg
