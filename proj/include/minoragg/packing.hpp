#pragma once

#include <cmath>
#include <random>
#include <set>

#include "respecting.hpp"

namespace minoragg {

struct PackingConfig {
  double c_thresh = 16;   // greedy on g while the estimate is at most c_thresh * log2 n
  double c_sample = 24;   // p = c_sample * ln n / lambda_bar
  double kappa = 2;       // target failure exponent
  double inflation = 3;   // trees evaluated: inflation * kappa * ln n
  int max_resamples = 100;
};

struct TreePacking {
  std::vector<RootedTree> trees;       // spanning trees of g, greedy order, duplicates removed
  std::size_t iterations = 0;          // greedy iterations I
  Weight upper = 0;                    // best cut value seen while packing
  double lambda_bar = 0;
  double p = 1;                        // sampling probability, 1 when g was packed directly
  bool sampled = false;
  WeightedGraph H;                     // the sampled multigraph when sampled
  std::uint64_t seed = 0;
  RoundLedger ledger;
  std::vector<long long> loads;        // per edge of the packed graph
};

namespace detail {

inline std::size_t greedy_count(double lambda, std::size_t m) {
  return static_cast<std::size_t>(std::ceil(2.0 * std::max(1.0, lambda) * std::log2(static_cast<double>(std::max<std::size_t>(m, 2)))));
}

// Number of copies of e used by the next tree: w parallel copies spread the
// load, so the cheapest copy carries floor(load / w).
inline std::int64_t copy_cost(long long load, Weight w) { return w > 0 ? load / w : std::numeric_limits<std::int64_t>::max() / 4; }

// Greedy packing state on one world; trees are appended one MST at a time.
struct Greedy {
  Network& w;
  std::vector<long long> load;
  std::vector<std::vector<int>> trees;  // world edge indices

  explicit Greedy(Network& net) : w(net), load(net.m(), 0) {}

  // Boruvka: every supernode of the current forest picks its cheapest
  // outgoing edge, costs (copy cost, edge id) are distinct, so no cycles.
  std::vector<int> next_tree() {
    std::vector<char> in(w.m(), 0);
    std::vector<int> tree;
    while (true) {
      RoundSpec s;
      s.contract = [&](int e) { return in[e] != 0; };
      s.consensus = ops::min();
      s.input = [&](int v) { return enc_i(static_cast<std::int64_t>(w.id(v))); };
      s.edge = [&](int e, const Message& ya, const Message& yb, Message& za, Message& zb) {
        if (ya == yb) return;
        za = zb = enc_tuple({copy_cost(load[e], w.edge(e).w), e});
      };
      s.aggregate = ops::tuple_min();
      auto r = w.round(s);
      bool added = false;
      for (std::size_t c = 0; c < r.agg.size(); ++c) {
        if (r.agg[c].empty()) continue;
        int e = static_cast<int>(dec_tuple(r.agg[c])[1]);
        if (!in[e]) in[e] = 1, tree.push_back(e), added = true;
      }
      if (!added) break;
    }
    if (static_cast<int>(tree.size()) != w.n() - 1) throw InputViolation("graph is not connected");
    std::sort(tree.begin(), tree.end());
    for (int e : tree) ++load[e];
    trees.push_back(tree);
    return tree;
  }

  // Packing value of the current trees in the multiplicity view, a lower
  // bound on the min cut since every tree crosses every cut.
  double packing_value() const {
    double worst = 0;
    for (int e = 0; e < w.m(); ++e)
      if (load[e] > 0) worst = std::max(worst, std::ceil(static_cast<double>(load[e]) / static_cast<double>(w.edge(e).w)));
    return worst > 0 ? static_cast<double>(trees.size()) / worst : 0;
  }

  Weight best_one_respecting(const std::vector<int>& tree) {
    std::vector<char> te(w.m(), 0);
    for (int e : tree) te[e] = 1;
    Forest f = orient_and_hl(w, te, 0);
    auto cut = one_respecting_cuts(w, f);
    auto b = minoragg::best_one_respecting(w, f, cut, [](int) { return true; });
    return b.found() ? b.value : std::numeric_limits<Weight>::max();
  }
};

inline Weight min_weighted_degree(Network& w) {
  RoundSpec s;
  s.input = [](int) { return Message{}; };
  s.edge = [&](int e, const Message&, const Message&, Message& za, Message& zb) { za = zb = enc_i(w.edge(e).w); };
  s.aggregate = ops::sum();
  auto r = w.round(s);
  auto t = global_min(w, [&](int v) { return enc_tuple({dec_i0(r.agg_of(v))}); });
  return t.empty() ? 0 : t[0];
}

struct GreedyOutcome {
  std::size_t iterations = 0;
  Weight upper = 0;
  double lower = 0;
  bool accepted = false;
};

// Doubling on the estimate: pack for the guess, tighten the upper bound with
// the best 1-respecting cut of the newest tree, and stop once the guess
// covers it. Gives up (accepted = false) when the guess passes `limit`.
inline GreedyOutcome greedy_doubling(Greedy& gr, double limit) {
  Phase ph(gr.w.ledger, "tree-packing");
  GreedyOutcome out;
  out.upper = min_weighted_degree(gr.w);
  const std::size_t m = static_cast<std::size_t>(gr.w.m());
  for (double guess = 1;; guess *= 2) {
    std::size_t I = greedy_count(guess, m);
    while (gr.trees.size() < I) gr.next_tree();
    out.upper = std::min(out.upper, gr.best_one_respecting(gr.trees.back()));
    if (guess >= static_cast<double>(out.upper)) {
      std::size_t need = greedy_count(static_cast<double>(out.upper), m);
      while (gr.trees.size() < need) gr.next_tree();
      out.accepted = true;
      break;
    }
    if (guess > limit) break;
  }
  out.iterations = gr.trees.size();
  out.lower = gr.packing_value();
  return out;
}

inline std::vector<RootedTree> distinct_trees(const WeightedGraph& g, const std::vector<std::vector<int>>& trees,
                                              const std::vector<int>& to_g) {
  std::set<std::vector<int>> seen;
  std::vector<RootedTree> out;
  for (const auto& t : trees) {
    std::vector<int> es;
    for (int e : t) es.push_back(to_g[e]);
    std::sort(es.begin(), es.end());
    if (seen.insert(es).second) out.emplace_back(g, es, g.nodes().front());
  }
  return out;
}

}  // namespace detail

// Unit copies of each edge survive independently with probability p, so an
// edge keeps Binomial(w, p) copies. Disconnected samples are redrawn.
inline WeightedGraph karger_sample(const WeightedGraph& g, double p, std::uint64_t seed, std::vector<int>* to_g = nullptr,
                                   int max_resamples = 100) {
  if (!(p > 0 && p <= 1)) throw InputViolation("sampling probability must be in (0, 1]");
  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt <= max_resamples; ++attempt) {
    std::vector<Edge> es;
    std::vector<int> map;
    for (std::size_t i = 0; i < g.m(); ++i) {
      const Edge& e = g.edge(i);
      Weight k = p >= 1 ? e.w : std::binomial_distribution<Weight>(e.w, p)(rng);
      if (k > 0) es.push_back({e.u, e.v, k}), map.push_back(static_cast<int>(i));
    }
    WeightedGraph h(g.nodes(), es);
    if (h.connected()) {
      if (to_g) *to_g = std::move(map);
      return h;
    }
  }
  throw SamplingFailed("sampled graph stayed disconnected after " + std::to_string(max_resamples) + " resamples");
}

inline std::size_t greedy_tree_count(const WeightedGraph& g, double lambda) { return detail::greedy_count(lambda, g.m()); }

// I greedy minimum spanning trees under load costs, through the engine.
inline std::vector<RootedTree> greedy_tree_packing(const WeightedGraph& g, std::size_t iterations,
                                                   std::vector<long long>* loads = nullptr, RoundLedger* ledger = nullptr) {
  if (!g.connected()) throw InputViolation("graph is not connected");
  auto w = Network::from_graph(make_context(g), g);
  detail::Greedy gr(*w);
  {
    Phase ph(w->ledger, "tree-packing");
    for (std::size_t i = 0; i < iterations; ++i) gr.next_tree();
  }
  std::vector<RootedTree> out;
  for (auto& t : gr.trees) out.emplace_back(g, t, g.nodes().front());
  if (loads) *loads = gr.load;
  if (ledger) *ledger = w->ledger;
  return out;
}

inline TreePacking build_packing(const WeightedGraph& g, std::uint64_t seed, PackingConfig pc = {}, Config cfg = {}) {
  if (!g.connected()) throw InputViolation("graph is not connected");
  TreePacking tp;
  tp.seed = seed;
  const double log2n = std::log2(static_cast<double>(std::max<std::size_t>(g.n(), 2)));
  auto w = Network::from_graph(make_context(g, cfg), g);
  detail::Greedy gr(*w);
  auto out = detail::greedy_doubling(gr, pc.c_thresh * log2n);
  std::vector<int> ident(g.m());
  std::iota(ident.begin(), ident.end(), 0);
  if (out.accepted) {
    tp.iterations = out.iterations;
    tp.upper = out.upper;
    tp.lambda_bar = static_cast<double>(out.upper);
    tp.trees = detail::distinct_trees(g, gr.trees, ident);
    tp.loads = gr.load;
    tp.ledger = w->ledger;
    return tp;
  }
  // large min cut: sample down to O(log n) and pack the sample
  tp.sampled = true;
  tp.lambda_bar = std::max(1.0, out.lower);
  tp.p = std::min(1.0, pc.c_sample * std::log(static_cast<double>(std::max<std::size_t>(g.n(), 2))) / tp.lambda_bar);
  std::vector<int> to_g;
  {
    // sampling is local to each edge; one round to agree on connectivity
    Phase ph(w->ledger, "tree-packing");
    RoundSpec s;
    s.contract_all = true;
    w->round(s);
  }
  tp.H = karger_sample(g, tp.p, seed, &to_g, pc.max_resamples);
  auto wh = Network::from_graph(make_context(tp.H, cfg), tp.H);
  detail::Greedy gh(*wh);
  auto oh = detail::greedy_doubling(gh, std::numeric_limits<double>::infinity());
  tp.iterations = oh.iterations;
  tp.upper = out.upper;
  tp.trees = detail::distinct_trees(g, gh.trees, to_g);
  tp.loads = gh.load;
  tp.ledger = w->ledger;
  tp.ledger.absorb(wh->ledger);
  return tp;
}

struct MinCutRun {
  CutResult cut;
  int tree = -1;                 // index into packing.trees of the winner
  std::vector<int> evaluated;    // packing tree indices actually solved
  TreePacking packing;
  RoundLedger ledger;
  std::vector<std::string> fidelity;
};

// Trees evaluated: inflation * kappa * ln n of them, drawn from the packing
// with the seed (all when the packing is smaller).
inline std::vector<int> choose_trees(const TreePacking& tp, std::size_t n, const PackingConfig& pc) {
  std::size_t k = static_cast<std::size_t>(std::ceil(pc.inflation * pc.kappa * std::log(static_cast<double>(std::max<std::size_t>(n, 2)))));
  std::vector<int> idx(tp.trees.size());
  std::iota(idx.begin(), idx.end(), 0);
  if (idx.size() <= k) return idx;
  std::mt19937_64 rng(tp.seed ^ 0x9e3779b97f4a7c15ull);
  std::shuffle(idx.begin(), idx.end(), rng);
  idx.resize(k);
  std::sort(idx.begin(), idx.end());
  return idx;
}

inline MinCutRun min_cut(const WeightedGraph& g, std::uint64_t seed, PackingConfig pc = {}, Config cfg = {}) {
  MinCutRun run;
  run.packing = build_packing(g, seed, pc, cfg);
  run.ledger = run.packing.ledger;
  run.evaluated = choose_trees(run.packing, g.n(), pc);
  for (int i : run.evaluated) {
    auto r = solve_two_respecting(g, run.packing.trees[i], cfg);
    run.ledger.absorb(r.ledger);
    run.fidelity.insert(run.fidelity.end(), r.fidelity.begin(), r.fidelity.end());
    if (r.cut.found() && (!run.cut.found() || r.cut.value < run.cut.value)) run.cut = r.cut, run.tree = i;
  }
  return run;
}

}  // namespace minoragg
