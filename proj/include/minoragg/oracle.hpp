#pragma once

#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "graph.hpp"

namespace minoragg {

struct MinCutOracleResult {
  Weight value;
  std::vector<NodeId> side;
};

inline MinCutOracleResult stoer_wagner(const WeightedGraph& g, std::size_t limit = 200) {
  const std::size_t n = g.n();
  if (n > limit) throw OracleLimitExceeded("oracle limited to n <= " + std::to_string(limit));
  if (n < 2) throw InputViolation("min cut needs at least two nodes");
  std::vector<std::vector<Weight>> w(n, std::vector<Weight>(n, 0));
  for (const auto& e : g.edges()) {
    int a = g.index(e.u), b = g.index(e.v);
    w[a][b] += e.w;
    w[b][a] += e.w;
  }
  std::vector<std::vector<int>> members(n);
  for (std::size_t i = 0; i < n; ++i) members[i] = {static_cast<int>(i)};
  std::vector<int> alive(n);
  for (std::size_t i = 0; i < n; ++i) alive[i] = static_cast<int>(i);
  MinCutOracleResult best{std::numeric_limits<Weight>::max(), {}};
  while (alive.size() > 1) {
    std::vector<Weight> key(n, 0);
    std::vector<char> added(n, 0);
    int prev = -1, last = -1;
    for (std::size_t step = 0; step < alive.size(); ++step) {
      int sel = -1;
      for (int v : alive)
        if (!added[v] && (sel < 0 || key[v] > key[sel])) sel = v;
      added[sel] = 1;
      prev = last;
      last = sel;
      for (int v : alive)
        if (!added[v]) key[v] += w[sel][v];
    }
    if (key[last] < best.value) {
      best.value = key[last];
      best.side.clear();
      for (int x : members[last]) best.side.push_back(g.nodes()[x]);
    }
    for (int v : alive) {
      w[prev][v] += w[last][v];
      w[v][prev] = w[prev][v];
    }
    members[prev].insert(members[prev].end(), members[last].begin(), members[last].end());
    alive.erase(std::find(alive.begin(), alive.end(), last));
  }
  std::sort(best.side.begin(), best.side.end());
  return best;
}

// 2^(n-1) partition enumeration; used to validate Stoer-Wagner.
inline MinCutOracleResult exhaustive_min_cut(const WeightedGraph& g) {
  const std::size_t n = g.n();
  if (n > 20) throw OracleLimitExceeded("exhaustive oracle limited to n <= 20");
  if (n < 2) throw InputViolation("min cut needs at least two nodes");
  MinCutOracleResult best{std::numeric_limits<Weight>::max(), {}};
  std::uint32_t best_mask = 0;
  for (std::uint32_t mask = 1; mask < (1u << (n - 1)); ++mask) {
    Weight s = 0;
    for (const auto& e : g.edges()) {
      bool a = (mask >> g.index(e.u)) & 1, b = (mask >> g.index(e.v)) & 1;
      if (a != b) s += e.w;
    }
    if (s < best.value) best.value = s, best_mask = mask;
  }
  for (std::size_t i = 0; i < n; ++i)
    if ((best_mask >> i) & 1) best.side.push_back(g.nodes()[i]);
  return best;
}

inline MinCutOracleResult oracle_min_cut(const WeightedGraph& g, std::size_t limit = 200) {
  return stoer_wagner(g, limit);
}

// Double loop over singletons and distinct pairs of tree edges.
inline CutResult oracle_two_respecting(const WeightedGraph& g, const RootedTree& t) {
  CutResult best;
  const auto& te = t.edges();
  // Per-edge coverage flags, then pairwise sums.
  std::vector<std::vector<char>> cov(te.size(), std::vector<char>(g.m(), 0));
  for (std::size_t i = 0; i < te.size(); ++i) {
    int low = t.lower(te[i]);
    for (std::size_t k = 0; k < g.m(); ++k) {
      const Edge& e = g.edge(k);
      cov[i][k] = covers(t, g.index(e.u), g.index(e.v), low);
    }
  }
  for (std::size_t i = 0; i < te.size(); ++i) {
    Weight s = 0;
    for (std::size_t k = 0; k < g.m(); ++k)
      if (cov[i][k]) s += g.edge(k).w;
    keep_min(best, CutResult::one(s, te[i]));
    for (std::size_t j = i + 1; j < te.size(); ++j) {
      Weight p = 0;
      for (std::size_t k = 0; k < g.m(); ++k)
        if (cov[i][k] != cov[j][k]) p += g.edge(k).w;
      keep_min(best, CutResult::two(p, te[i], te[j]));
    }
  }
  return best;
}

}  // namespace minoragg
