#pragma once

// Random multi-round algorithms used to compare execution layers.

#include <random>
#include <vector>

#include "minoragg/network.hpp"

namespace testalg {

using namespace minoragg;

struct RandomAlgorithm {
  std::uint64_t seed;
  int rounds = 5;

  // Returns the per-node final state, keyed by node id.
  std::map<NodeId, std::int64_t> operator()(Network& g) const {
    std::mt19937_64 rng(seed);
    std::vector<std::int64_t> state(g.n());
    for (int v = 0; v < g.n(); ++v) state[v] = static_cast<std::int64_t>(g.id(v) % 97);
    for (int r = 0; r < rounds; ++r) {
      std::uint64_t salt = rng();
      int cop = static_cast<int>(rng() % 3), aop = static_cast<int>(rng() % 3);
      int threshold = static_cast<int>(rng() % 100);
      auto pick = [](int k) { return k == 0 ? ops::sum() : k == 1 ? ops::min() : ops::max(); };
      RoundSpec s;
      s.contract = [&, salt, threshold](int e) {
        NodeId a = g.id(g.edge(e).a), b = g.id(g.edge(e).b);
        std::uint64_t h = (std::min(a, b) * 1000003u) ^ (std::max(a, b) * 998244353u) ^ salt ^ static_cast<std::uint64_t>(g.edge(e).w);
        h ^= h >> 29;
        h *= 0xbf58476d1ce4e5b9ull;
        h ^= h >> 31;
        return static_cast<int>(h % 100) < threshold;
      };
      s.input = [&](int v) { return enc_i(state[v] * 7 + static_cast<std::int64_t>(g.id(v) % 13)); };
      s.consensus = pick(cop);
      s.edge = [&](int e, const Message& ya, const Message& yb, Message& za, Message& zb) {
        std::int64_t a = dec_i(ya), b = dec_i(yb), w = g.edge(e).w;
        za = enc_i((b * 3 + w) % 1000);
        zb = enc_i((a * 5 + w) % 1000);
      };
      s.aggregate = pick(aop);
      auto res = g.round(s);
      for (int v = 0; v < g.n(); ++v) {
        std::int64_t y = dec_i(res.y_of(v));
        std::int64_t z = res.agg_of(v).empty() ? -1 : dec_i(res.agg_of(v));
        state[v] = (state[v] * 31 + y * 7 + z + static_cast<std::int64_t>(res.sid(v) % 1000)) % 1000003;
      }
    }
    std::map<NodeId, std::int64_t> out;
    for (int v = 0; v < g.n(); ++v) out[g.id(v)] = state[v];
    return out;
  }
};

}  // namespace testalg
