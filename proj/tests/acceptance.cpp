// One PASS/FAIL line per acceptance criterion. Exit status is the number of
// failed criteria.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>

#include "instances.hpp"
#include "minoragg/packing.hpp"
#include "minoragg/virtual.hpp"
#include "random_algorithms.hpp"

using namespace minoragg;
using namespace inst;

namespace {

using Clock = std::chrono::steady_clock;
double secs(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Fidelity bookkeeping shared by every criterion (criterion 4 reads it).
struct Fidelity {
  long long runs = 0, failures = 0, budget = 0;
  std::vector<std::string> first;
  void note(const std::vector<std::string>& f, long long violations) {
    ++runs;
    failures += static_cast<long long>(f.size());
    budget += violations;
    for (auto& s : f)
      if (first.size() < 3) first.push_back(s);
  }
  void note(Network& w) { note(w.ctx->fidelity, w.ledger.violation_count); }
} fid;

struct Verdict {
  bool pass;
  std::string detail;
};

Weight value_of(const WeightedGraph& g, const RootedTree& t, const CutResult& c) {
  return c.tree_edges.size() == 1 ? cut_value_pair(g, t, c.tree_edges[0]) : cut_value_pair(g, t, c.tree_edges[0], c.tree_edges[1]);
}

// 1. 2-respecting exactness, 300 instances, n <= 120, weights 1..20
Verdict two_respecting_exact() {
  const char* models[] = {"gnp", "tree-plus", "planar-grid"};
  const double ps[] = {0.08, 1.5, 0};
  auto t0 = Clock::now();
  int bad = 0, n_max = 0;
  for (int s = 0; s < 300; ++s) {
    std::size_t n = 4 + (s * 37) % 117;
    auto g = gen_model(models[s % 3], n, ps[s % 3], 100000 + s, {1, 20});
    auto t = random_spanning_tree(g, s);
    auto run = solve_two_respecting(g, t);
    fid.note(run.fidelity, run.ledger.violation_count);
    auto want = oracle_two_respecting(g, t);
    bad += run.cut.value != want.value || value_of(g, t, run.cut) != run.cut.value;
    n_max = std::max<int>(n_max, static_cast<int>(g.n()));
  }
  double el = secs(t0);
  char buf[160];
  std::snprintf(buf, sizeof buf, "300 instances, n <= %d, %d mismatches, %.1f s (limit 300 s)", n_max, bad, el);
  return {bad == 0 && el <= 300, buf};
}

// 2. Min cut end to end, 300 graphs n <= 100, >= 99% exact, reseed fixes the rest
Verdict min_cut_end_to_end() {
  const char* models[] = {"gnp", "tree-plus", "planar-grid"};
  int exact = 0, rescued = 0, total = 300;
  std::vector<int> failing;
  auto t0 = Clock::now();
  for (int s = 0; s < total; ++s) {
    std::size_t n = 6 + (s * 53) % 95;
    double p = s % 3 == 0 ? std::min(1.0, 6.0 / static_cast<double>(n)) : 1.0;
    auto g = gen_model(models[s % 3], n, p, 200000 + s, {1, 20});
    Weight want = oracle_min_cut(g).value;
    auto run = min_cut(g, static_cast<std::uint64_t>(s));
    fid.note(run.fidelity, run.ledger.violation_count);
    if (run.cut.value == want) {
      ++exact;
      continue;
    }
    failing.push_back(s);
    rescued += min_cut(g, static_cast<std::uint64_t>(s) + 1000003).cut.value == want;
  }
  char buf[200];
  std::snprintf(buf, sizeof buf, "%d/%d exact (%.1f%%), %zu failing seeds, %d fixed by one reseed, %.1f s", exact, total,
                100.0 * exact / total, failing.size(), rescued, secs(t0));
  return {100 * exact >= 99 * total && rescued == static_cast<int>(failing.size()), buf};
}

// 3. Stage oracles, 100+ instances each
Verdict stage_oracles() {
  std::map<std::string, std::pair<int, int>> tally;  // stage -> (instances, mismatches)
  auto rec = [&](const std::string& k, bool bad) {
    ++tally[k].first;
    tally[k].second += bad;
  };
  for (int s = 0; s < 100; ++s) {
    auto g = gen_gnp(5 + s % 60, 0.1 + 0.01 * (s % 20), 300000 + s, {1, 20});
    auto t = random_spanning_tree(g, s);
    auto w = world(g);
    Forest f = rooted(*w, t);
    auto cut = one_respecting_cuts(*w, f);
    bool bad = false;
    for (int e : t.edges()) bad = bad || cut[t.lower(e)] != cut_value_pair(g, t, e);
    rec("one_respecting_cuts", bad);
    fid.note(*w);
  }
  for (int s = 0; s < 100; ++s) {
    int L = 1 + s % 12, M = 1 + (s * 7) % 13;
    auto x = p2p(L, M, 5 + s % 30, 310000 + s);
    auto pe = tail(x.s.path_edges[0]), qe = tail(x.s.path_edges[1]);
    bool bad = false;
    for (int i = 1; i <= L; ++i) {
      auto cov = cov_fixed_edge(x.in, i);
      for (int j = 1; j <= M; ++j) bad = bad || cov[j] != cov_value_pair(x.s.g, x.t, pe[i - 1], qe[j - 1]);
    }
    rec("cov_fixed_edge", bad);
    fid.note(*x.w);
  }
  for (int s = 0; s < 100; ++s) {
    auto x = separable(2 + s % 20, 2 + (s * 3) % 17, 320000 + s);
    auto got = solve_separable(x.in);
    rec("solve_separable", got.value != brute(x.g, x.t, {}, cross_pairs({x.pe, x.qe})).value);
    fid.note(*x.w);
  }
  for (int s = 0; s < 100; ++s) {
    int L = 1 + (s * 5) % 60, M = 1 + (s * 11) % 57;
    auto x = p2p(L, M, (L + M) * (1 + s % 3), 330000 + s);
    auto pe = tail(x.s.path_edges[0]), qe = tail(x.s.path_edges[1]);
    std::vector<int> singles = pe;
    singles.insert(singles.end(), qe.begin(), qe.end());
    auto got = solve_path_to_path(x.in);
    rec("solve_path_to_path", got.value != brute(x.s.g, x.t, singles, cross_pairs({pe, qe})).value);
    fid.note(*x.w);
  }
  for (int s = 0; s < 100; ++s) {
    auto sg = random_star(340000 + s, 9, 16, 1 + s % 3);
    RootedTree t(sg.g, sg.tree, 1);
    auto w = world(sg.g);
    auto st = star_from_parents(*w, parents_of(t, w->n()));
    auto got = solve_star(st);
    rec("solve_star", got.value != brute(sg.g, t, sg.tree, cross_pairs(sg.path_edges)).value);
    fid.note(*w);
  }
  for (int s = 0; s < 100; ++s) {
    auto g = gen_gnp(6 + s % 50, 0.15, 350000 + s, {1, 20});
    auto t0 = random_spanning_tree(g, s);
    int c = static_cast<int>(s % g.n());
    RootedTree t(g, t0.edges(), g.nodes()[c]);
    auto w = world(g);
    Forest f = rooted(*w, t);
    auto got = solve_subtree_instance(*w, f);
    rec("solve_subtree_instance", got.value != brute(g, t, t.edges(), cross_pairs(subtree_groups(t, c))).value);
    fid.note(*w);
  }
  bool ok = true;
  std::string d;
  for (auto& [k, v] : tally) {
    ok = ok && v.first >= 100 && v.second == 0;
    d += (d.empty() ? "" : ", ") + k + " " + std::to_string(v.first - v.second) + "/" + std::to_string(v.first);
  }
  return {ok, d};
}

// 4. Fidelity invariants: everything recorded so far plus dedicated checks
Verdict fidelity_invariants() {
  // message budget, hard errors on
  int strict_runs = 0, strict_fail = 0;
  Config strict;
  strict.strict_bits = true;
  for (int s = 0; s < 40; ++s) {
    auto g = gen_gnp(10 + s * 5, 0.1, 400000 + s, {1, 20});
    auto t = random_spanning_tree(g, s);
    ++strict_runs;
    try {
      auto run = solve_two_respecting(g, t, strict);
      fid.note(run.fidelity, run.ledger.violation_count);
    } catch (const BudgetViolation&) {
      ++strict_fail;
    }
  }
  // interest lists vs brute-force cross weights
  int interest_bad = 0;
  for (int s = 0; s < 100; ++s) {
    auto sg = random_star(410000 + s, 40, 5, 3);
    RootedTree t(sg.g, sg.tree, 1);
    auto w = world(sg.g);
    auto st = star_from_parents(*w, parents_of(t, w->n()));
    auto il = compute_interest_lists(st);
    interest_bad += interest_violations(sg, t, st, il);
    fid.note(*w);
  }
  // Monge spot checks and the Cut/Cov identity, engine values against direct sums
  int monge_bad = 0, identity_bad = 0, checks = 0;
  for (int s = 0; s < 100; ++s) {
    auto x = p2p(6 + s % 5, 5 + s % 7, 30 + s % 40, 420000 + s);
    auto pe = tail(x.s.path_edges[0]), qe = tail(x.s.path_edges[1]);
    auto C = [&](int i, int j) { return cut_value_pair(x.s.g, x.t, pe[i], qe[j]); };
    for (std::size_t i = 0; i + 1 < pe.size(); ++i)
      for (std::size_t j = 0; j + 1 < qe.size(); ++j)
        monge_bad += C(i, j) + C(i + 1, j + 1) > C(i, j + 1) + C(i + 1, j);
    auto cut = one_respecting_cuts(*x.w, x.in.f);
    for (int i = 1; i <= x.in.lp(); ++i) {
      auto cov = cov_fixed_edge(x.in, i);
      for (int j = 1; j <= x.in.lq(); ++j) {
        ++checks;
        identity_bad += cut[x.in.P[i]] + cut[x.in.Q[j]] - 2 * cov[j] != C(i - 1, j - 1);
      }
    }
    fid.note(*x.w);
  }
  bool ok = fid.failures == 0 && fid.budget == 0 && strict_fail == 0 && interest_bad == 0 && monge_bad == 0 && identity_bad == 0;
  std::string d = std::to_string(fid.runs) + " runs: " + std::to_string(fid.failures) + " fidelity failures, " +
                  std::to_string(fid.budget) + " budget violations; strict-bits " + std::to_string(strict_runs - strict_fail) + "/" +
                  std::to_string(strict_runs) + "; interest-list " + std::to_string(interest_bad) + " violations; Monge " +
                  std::to_string(monge_bad) + "; Cut/Cov identity " + std::to_string(identity_bad) + "/" + std::to_string(checks);
  if (!fid.first.empty()) d += "; first: " + fid.first[0];
  return {ok, d};
}

std::unique_ptr<Network> plain_copy(const Network& w) {
  WorldBuilder b;
  for (int v = 0; v < w.n(); ++v) b.node(w.id(v), false);
  for (int e = 0; e < w.m(); ++e) b.edge(w.id(w.edge(e).a), w.id(w.edge(e).b), w.edge(e).w, w.edge(e).ref);
  return b.build(w.ctx);
}

// 5. Virtual-node blowup
Verdict virtual_blowup() {
  std::mt19937_64 rng(5);
  int bad_out = 0, bad_ratio = 0;
  double worst[5] = {0, 0, 0, 0, 0};
  for (int beta = 0; beta <= 4; ++beta)
    for (int s = 0; s < 20; ++s) {
      auto g = gen_gnp(10 + s % 15, 0.3, 500000 + 100 * beta + s, {1, 9});
      auto base = world(g);
      VirtualGraph vg;
      vg.base = base.get();
      for (int i = 0; i < beta; ++i) vg.virtual_nodes.push_back(base->ctx->new_virtual_id());
      for (NodeId x : vg.virtual_nodes) {
        int deg = 1 + static_cast<int>(rng() % 4);
        for (int k = 0; k < deg; ++k)
          vg.virtual_edges.push_back({base->id(static_cast<int>(rng() % base->n())), x, 1 + static_cast<Weight>(rng() % 7)});
      }
      for (int i = 0; i < beta; ++i)
        for (int j = i + 1; j < beta; ++j)
          if (rng() % 2) vg.virtual_edges.push_back({vg.virtual_nodes[i], vg.virtual_nodes[j], 1});
      testalg::RandomAlgorithm alg{rng()};
      long long before = base->ledger.total;
      auto lit = simulate_virtual(vg, alg);
      double ratio = 0;
      // outputs against the flagged materialization; rounds against G_virt
      // run as an ordinary graph (supernode ids follow the flags, so the
      // plain copy is only used for counting)
      auto mat = materialize_virtual(vg);
      bad_out += lit != alg(*mat);
      auto plain = plain_copy(*mat);
      alg(*plain);
      ratio = static_cast<double>(base->ledger.total - before) / static_cast<double>(std::max(1LL, plain->ledger.total));
      bad_ratio += ratio > 4.0 * (beta + 1);
      worst[beta] = std::max(worst[beta], ratio / (beta + 1));
    }
  char buf[200];
  std::snprintf(buf, sizeof buf, "100 runs, %d output mismatches, %d over 4(beta+1) x materialized rounds; worst ratio/(beta+1) by beta: %.2f %.2f %.2f %.2f %.2f",
                bad_out, bad_ratio, worst[0], worst[1], worst[2], worst[3], worst[4]);
  return {bad_out == 0 && bad_ratio == 0, buf};
}

// 6. Round envelope and determinism
Verdict round_envelope() {
  bool ok = true;
  std::string d = "C = " + std::to_string(kRoundEnvelopeC).substr(0, 4) + ";";
  for (std::size_t n : {256u, 1024u, 4096u}) {
    auto g = gen_gnp(n, 8.0 / static_cast<double>(n), 600000 + n, {1, 20});
    auto t = random_spanning_tree(g, n);
    auto t0 = Clock::now();
    auto run = solve_two_respecting(g, t);
    fid.note(run.fidelity, run.ledger.violation_count);
    double ratio = static_cast<double>(run.ledger.total) / std::pow(std::log2(static_cast<double>(n)), 6);
    ok = ok && ratio <= kRoundEnvelopeC;
    char buf[120];
    std::snprintf(buf, sizeof buf, " n=%zu rounds=%lld ratio=%.3f (%.1f s);", n, run.ledger.total, ratio, secs(t0));
    d += buf;
  }
  // bit-reproducible: two runs of every deterministic stage agree exactly
  auto g = gen_gnp(256, 8.0 / 256, 601, {1, 20});
  auto t = random_spanning_tree(g, 9);
  auto a = solve_two_respecting(g, t), b = solve_two_respecting(g, t);
  auto oa = solve_one_respecting(g, t), ob = solve_one_respecting(g, t);
  bool same = a.cut.value == b.cut.value && a.cut.tree_edges == b.cut.tree_edges && a.ledger.total == b.ledger.total &&
              a.ledger.phases == b.ledger.phases && oa.per_edge == ob.per_edge && oa.ledger.phases == ob.ledger.phases;
  d += same ? " reruns identical" : " reruns DIFFER";
  return {ok && same, d};
}

// 7. Heavy hitters over random streams and merge orders
Verdict heavy_hitters() {
  std::mt19937_64 rng(77);
  int bad = 0, included = 0, excluded = 0;
  for (int t = 0; t < 100; ++t) {
    std::size_t h = 2 + rng() % 7;
    int objects = 2 + static_cast<int>(rng() % 15);
    std::vector<HeavyHitterSketch> pool;
    std::map<std::uint64_t, std::int64_t> freq;
    std::int64_t W = 0;
    int len = 5 + static_cast<int>(rng() % 120);
    for (int i = 0; i < len; ++i) {
      std::uint64_t x = rng() % objects;
      if (rng() % 2) x %= 2;
      std::int64_t w = 1 + static_cast<std::int64_t>(rng() % 20);
      freq[x] += w;
      W += w;
      pool.push_back(HeavyHitterSketch::single(h, x, w));
    }
    while (pool.size() > 1) {
      std::size_t i = rng() % pool.size(), j = rng() % (pool.size() - 1);
      if (j >= i) ++j;
      auto merged = heavy_hitter_combine(pool[i], pool[j]);
      pool[std::min(i, j)] = merged;
      pool.erase(pool.begin() + static_cast<long>(std::max(i, j)));
    }
    auto& out = pool[0];
    bad += out.counters.size() > h || out.total != W;
    for (auto [x, f] : freq) {
      if (f * static_cast<std::int64_t>(h) > 2 * W) ++included, bad += !out.contains(x);
      if (f * static_cast<std::int64_t>(h) <= W) ++excluded, bad += out.contains(x);
    }
  }
  return {bad == 0, "100 streams; " + std::to_string(included) + " inclusion and " + std::to_string(excluded) +
                        " exclusion checks; " + std::to_string(bad) + " violations"};
}

}  // namespace

int main() {
  struct Item {
    const char* name;
    std::function<Verdict()> fn;
  };
  // criterion 4 runs after the others so it sees their fidelity records
  std::vector<std::pair<int, Item>> order = {
      {1, {"exact 2-respecting", two_respecting_exact}},
      {2, {"exact min cut end to end", min_cut_end_to_end}},
      {3, {"stage oracles", stage_oracles}},
      {5, {"virtual-node blowup", virtual_blowup}},
      {6, {"polylog round envelope", round_envelope}},
      {7, {"heavy-hitter sketch", heavy_hitters}},
      {4, {"model-fidelity invariants", fidelity_invariants}},
  };
  std::map<int, std::pair<std::string, Verdict>> res;
  for (auto& [k, it] : order) {
    auto t0 = Clock::now();
    Verdict v;
    try {
      v = it.fn();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    std::fprintf(stderr, "criterion %d done in %.1f s\n", k, secs(t0));
    res[k] = {it.name, v};
  }
  int failed = 0;
  for (auto& [k, r] : res) {
    std::printf("%s [%d] %s: %s\n", r.second.pass ? "PASS" : "FAIL", k, r.first.c_str(), r.second.detail.c_str());
    failed += !r.second.pass;
  }
  std::fflush(stdout);
  return failed;
}
