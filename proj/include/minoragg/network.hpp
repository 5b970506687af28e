#pragma once

#include <algorithm>
#include <functional>
#include <memory>
#include <numeric>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "graph.hpp"
#include "ledger.hpp"
#include "message.hpp"

namespace minoragg {

// State shared by every world of one execution.
struct Context {
  Config cfg;
  std::uint64_t virtual_base = 1;
  std::uint64_t virtual_next = 0;
  long long rounds_checked = 0;
  long long consistency_checks = 0;
  std::vector<std::string> fidelity;  // model-fidelity invariant failures

  std::uint64_t new_virtual_id() { return virtual_base + virtual_next++; }
  bool is_virtual_id(NodeId id) const { return id >= virtual_base; }
  void fidelity_failure(const std::string& what) {
    if (fidelity.size() < 256) fidelity.push_back(what);
  }
};

inline std::shared_ptr<Context> make_context(const WeightedGraph& g, Config cfg = {}) {
  auto ctx = std::make_shared<Context>();
  cfg.n_global = std::max<std::size_t>(g.n(), 2);
  ctx->cfg = cfg;
  NodeId mx = g.nodes().empty() ? 0 : g.nodes().back();
  std::uint64_t base = 1;
  while (base <= mx) base <<= 1;
  ctx->virtual_base = base;
  return ctx;
}

struct NetEdge {
  int a, b;
  Weight w;
  long ref;  // index of the original graph edge this edge stands for, or -1
};

struct RoundSpec {
  std::function<bool(int)> contract;  // per edge; empty = contract nothing
  bool contract_all = false;
  std::function<Message(int)> input;  // per node; empty = identity
  OpPtr consensus = ops::first();
  // Edge e = (a, b) sees y_a, y_b and writes z toward a and toward b.
  std::function<void(int, const Message&, const Message&, Message&, Message&)> edge;
  OpPtr aggregate = ops::first();
};

struct RoundResult {
  std::vector<int> comp;            // node -> supernode
  std::vector<NodeId> super_id;     // canonical id (min member id)
  std::vector<Message> y, agg;      // per supernode
  const Message& y_of(int v) const { return y[comp[v]]; }
  const Message& agg_of(int v) const { return agg[comp[v]]; }
  NodeId sid(int v) const { return super_id[comp[v]]; }
};

// One world: an explicit graph on which rounds execute. Worlds with virtual
// nodes are charged 3*beta + 2 host rounds per round, the cost of the literal
// simulation in virtual.hpp.
class Network {
 public:
  std::shared_ptr<Context> ctx;
  RoundLedger ledger;

  Network(std::shared_ptr<Context> c, std::vector<NodeId> ids, std::vector<char> virt, std::vector<NetEdge> edges)
      : ctx(std::move(c)), ids_(std::move(ids)), virt_(std::move(virt)), edges_(std::move(edges)) {
    finish();
  }
  virtual ~Network() = default;
  Network(const Network&) = delete;
  Network& operator=(const Network&) = delete;

  static std::unique_ptr<Network> from_graph(std::shared_ptr<Context> c, const WeightedGraph& g) {
    std::vector<NetEdge> es;
    for (std::size_t i = 0; i < g.m(); ++i)
      es.push_back({g.index(g.edge(i).u), g.index(g.edge(i).v), g.edge(i).w, static_cast<long>(i)});
    return std::make_unique<Network>(std::move(c), g.nodes(), std::vector<char>(g.n(), 0), std::move(es));
  }

  int n() const { return static_cast<int>(ids_.size()); }
  int m() const { return static_cast<int>(edges_.size()); }
  NodeId id(int v) const { return ids_[v]; }
  const std::vector<NodeId>& ids() const { return ids_; }
  bool is_virtual(int v) const { return virt_[v]; }
  const std::vector<char>& virt() const { return virt_; }
  const NetEdge& edge(int e) const { return edges_[e]; }
  const std::vector<NetEdge>& edges() const { return edges_; }
  const std::vector<int>& inc(int v) const { return inc_[v]; }
  int other(int e, int v) const { return edges_[e].a == v ? edges_[e].b : edges_[e].a; }
  int index_of(NodeId x) const {
    auto it = index_.find(x);
    return it == index_.end() ? -1 : it->second;
  }
  int beta() const { return beta_ + hidden_virtual_; }
  // Virtual nodes merged into a supernode that also has real members: they
  // no longer need a node of their own but still cost simulation.
  int hidden_virtual() const { return hidden_virtual_; }
  void set_hidden_virtual(int k) {
    hidden_virtual_ = k;
    check_beta();
  }
  long long phi() const {
    int b = beta();
    return b == 0 ? 1 : 3LL * b + 2;
  }

  void check_message(const Message& m, const char* what) {
    std::size_t bits = message_bits(m);
    if (bits <= ctx->cfg.budget_bits()) return;
    std::string msg = std::string(what) + " message of " + std::to_string(bits) + " bits exceeds budget " +
                      std::to_string(ctx->cfg.budget_bits()) + " in phase " + ledger.current();
    if (ctx->cfg.strict_bits) throw BudgetViolation(msg);
    ledger.violation(msg);
  }

  RoundResult round(const RoundSpec& s) {
    RoundResult r = execute(s);
    check_consistency(r);
    return r;
  }

  // No-op padding round.
  void pad() { round(RoundSpec{}); }

  bool connected_real_part() const {
    std::vector<char> keep(n());
    for (int v = 0; v < n(); ++v) keep[v] = !virt_[v];
    return connected_subset(keep);
  }
  bool connected_subset(const std::vector<char>& keep) const {
    int start = -1, cnt = 0;
    for (int v = 0; v < n(); ++v)
      if (keep[v]) ++cnt, start = start < 0 ? v : start;
    if (cnt == 0) return true;
    std::vector<char> seen(n(), 0);
    std::vector<int> st{start};
    seen[start] = 1;
    int got = 1;
    while (!st.empty()) {
      int x = st.back();
      st.pop_back();
      for (int e : inc_[x]) {
        int y = other(e, x);
        if (keep[y] && !seen[y]) seen[y] = 1, ++got, st.push_back(y);
      }
    }
    return got == cnt;
  }

 protected:
  // Direct execution of the three steps.
  virtual RoundResult execute(const RoundSpec& s) {
    const int N = n();
    RoundResult r;
    // Contraction.
    dsu_.resize(N);
    std::iota(dsu_.begin(), dsu_.end(), 0);
    if (s.contract_all || s.contract) {
      for (int e = 0; e < m(); ++e) {
        if (!s.contract_all && !s.contract(e)) continue;
        int a = find(edges_[e].a), b = find(edges_[e].b);
        if (a != b) dsu_[std::max(a, b)] = std::min(a, b);
      }
    }
    r.comp.assign(N, -1);
    label_.assign(N, -1);
    for (int v = 0; v < N; ++v) {
      int root = find(v);
      if (label_[root] < 0) {
        label_[root] = static_cast<int>(r.super_id.size());
        r.super_id.push_back(ids_[v]);
      }
      r.comp[v] = label_[root];
    }
    const std::size_t K = r.super_id.size();
    // Consensus.
    r.y.assign(K, s.consensus->identity);
    if (s.input) {
      for (int v = 0; v < N; ++v) {
        Message x = s.input(v);
        if (x == s.consensus->identity) continue;
        check_message(x, "consensus input");
        Message& y = r.y[r.comp[v]];
        y = s.consensus->combine(y, x);
      }
      for (auto& y : r.y) check_message(y, "consensus");
    }
    // Aggregation.
    r.agg.assign(K, s.aggregate->identity);
    if (s.edge) {
      const Message& id = s.aggregate->identity;
      Message za, zb;
      for (int e = 0; e < m(); ++e) {
        int ca = r.comp[edges_[e].a], cb = r.comp[edges_[e].b];
        if (ca == cb) continue;
        za = id;
        zb = id;
        s.edge(e, r.y[ca], r.y[cb], za, zb);
        if (za != id) {
          check_message(za, "edge output");
          r.agg[ca] = s.aggregate->combine(r.agg[ca], za);
        }
        if (zb != id) {
          check_message(zb, "edge output");
          r.agg[cb] = s.aggregate->combine(r.agg[cb], zb);
        }
      }
      for (auto& a : r.agg) check_message(a, "aggregate");
    }
    long long p = phi();
    ledger.charge(1, p - 1);
    ++ctx->rounds_checked;
    return r;
  }

  void check_consistency(const RoundResult& r) {
    // The engine stores one triple per supernode; verify the partition is
    // exactly the components of the contracted edge set.
    ++ctx->consistency_checks;
    if (r.comp.size() != static_cast<std::size_t>(n()) || r.y.size() != r.super_id.size() ||
        r.agg.size() != r.super_id.size())
      ctx->fidelity_failure("supernode consistency: malformed round result");
  }

  int find(int x) {
    while (dsu_[x] != x) x = dsu_[x] = dsu_[dsu_[x]];
    return x;
  }

  void finish() {
    index_.clear();
    for (int v = 0; v < n(); ++v) {
      if (v && ids_[v] <= ids_[v - 1]) throw InputViolation("network ids must be strictly increasing");
      index_[ids_[v]] = v;
    }
    inc_.assign(n(), {});
    for (int e = 0; e < m(); ++e) {
      if (edges_[e].a == edges_[e].b) throw InputViolation("self-loop in network");
      inc_[edges_[e].a].push_back(e);
      inc_[edges_[e].b].push_back(e);
    }
    if (static_cast<int>(virt_.size()) != n()) virt_.assign(n(), 0);
    beta_ = static_cast<int>(std::count(virt_.begin(), virt_.end(), 1));
    check_beta();
  }
  void check_beta() const {
    if (ctx && beta() > ctx->cfg.beta_cap())
      throw InputViolation("world has " + std::to_string(beta()) + " virtual nodes, cap is " + std::to_string(ctx->cfg.beta_cap()));
  }

  std::vector<NodeId> ids_;
  std::vector<char> virt_;
  std::vector<NetEdge> edges_;
  std::vector<std::vector<int>> inc_;
  std::unordered_map<NodeId, int> index_;
  std::vector<int> dsu_, label_;
  int beta_ = 0;
  int hidden_virtual_ = 0;
};

// Collects nodes and edges by id and produces a Network with sorted ids.
class WorldBuilder {
 public:
  void node(NodeId id, bool virt) {
    auto [it, fresh] = nodes_.emplace(id, virt);
    if (!fresh) it->second = it->second || virt;
  }
  void edge(NodeId a, NodeId b, Weight w, long ref) {
    if (a == b) return;
    edges_.push_back({a, b, w, ref});
  }
  // Parallel edges with ref == -1 are merged by weight sum; other negative
  // refs mark synthesized edges that stay distinct.
  std::unique_ptr<Network> build(std::shared_ptr<Context> ctx, const RoundLedger* parent = nullptr, int hidden = 0) {
    std::vector<NodeId> ids;
    std::vector<char> virt;
    for (auto& [id, v] : nodes_) ids.push_back(id), virt.push_back(v);
    std::unordered_map<NodeId, int> idx;
    for (std::size_t i = 0; i < ids.size(); ++i) idx[ids[i]] = static_cast<int>(i);
    std::vector<NetEdge> es;
    std::map<std::pair<int, int>, std::size_t> merged;
    for (auto& e : edges_) {
      int a = idx.at(e.a), b = idx.at(e.b);
      if (e.ref == -1) {
        auto key = std::minmax(a, b);
        auto it = merged.find(key);
        if (it != merged.end()) {
          es[it->second].w += e.w;
          continue;
        }
        merged[key] = es.size();
      }
      es.push_back({a, b, e.w, e.ref >= 0 ? e.ref : -1});
    }
    auto net = std::make_unique<Network>(std::move(ctx), std::move(ids), std::move(virt), std::move(es));
    if (hidden) net->set_hidden_virtual(hidden);
    if (parent) net->ledger = parent->child();
    return net;
  }

 private:
  struct E {
    NodeId a, b;
    Weight w;
    long ref;
  };
  std::map<NodeId, bool> nodes_;
  std::vector<E> edges_;
};

// ---------- minors ----------

struct MinorMap {
  std::vector<int> comp;        // host node -> minor node
  std::vector<int> edge_map;    // host edge -> minor edge or -1 (contracted / self-loop)
  std::vector<std::vector<int>> members;
};

// Explicit contraction of the edge set F. Supernodes take the minimum member
// id; a supernode is virtual only when all its members are, other virtual
// members are counted as hidden.
inline std::pair<std::unique_ptr<Network>, MinorMap> materialize_minor(Network& g, const std::vector<char>& F) {
  MinorMap mm;
  std::vector<int> p(g.n());
  std::iota(p.begin(), p.end(), 0);
  auto find = [&](int x) {
    while (p[x] != x) x = p[x] = p[p[x]];
    return x;
  };
  for (int e = 0; e < g.m(); ++e)
    if (F[e]) {
      int a = find(g.edge(e).a), b = find(g.edge(e).b);
      if (a != b) p[std::max(a, b)] = std::min(a, b);
    }
  std::vector<int> label(g.n(), -1);
  std::vector<NodeId> ids;
  std::vector<char> virt;
  mm.comp.assign(g.n(), -1);
  for (int v = 0; v < g.n(); ++v) {
    int r = find(v);
    if (label[r] < 0) {
      label[r] = static_cast<int>(ids.size());
      ids.push_back(g.id(v));
      virt.push_back(1);
      mm.members.emplace_back();
    }
    mm.comp[v] = label[r];
    mm.members[label[r]].push_back(v);
    if (!g.is_virtual(v)) virt[label[r]] = 0;
  }
  int hidden = g.hidden_virtual();
  for (std::size_t c = 0; c < ids.size(); ++c)
    if (!virt[c])
      for (int v : mm.members[c]) hidden += g.is_virtual(v);
  std::vector<NetEdge> es;
  mm.edge_map.assign(g.m(), -1);
  for (int e = 0; e < g.m(); ++e) {
    int a = mm.comp[g.edge(e).a], b = mm.comp[g.edge(e).b];
    if (a == b) continue;
    mm.edge_map[e] = static_cast<int>(es.size());
    es.push_back({a, b, g.edge(e).w, g.edge(e).ref});
  }
  auto net = std::make_unique<Network>(g.ctx, std::move(ids), std::move(virt), std::move(es));
  net->set_hidden_virtual(hidden);
  net->ledger = g.ledger.child();
  return {std::move(net), std::move(mm)};
}

// Literal view of G/F: every logical round is one host round with F unioned
// into the contraction set. Only the minimum-id member of a supernode feeds
// the consensus input, so results match the contracted graph exactly.
class MinorNetwork : public Network {
 public:
  MinorNetwork(Network& host, const std::vector<char>& F)
      : Network(host.ctx, {}, {}, {}), host_(host), F_(F) {
    auto [net, mm] = materialize_minor(host, F);
    ids_ = net->ids();
    virt_ = net->virt();
    edges_ = net->edges();
    map_ = std::move(mm);
    host_edge_.assign(edges_.size(), -1);
    for (int e = 0; e < host.m(); ++e)
      if (map_.edge_map[e] >= 0) host_edge_[map_.edge_map[e]] = e;
    finish();
    ledger = host.ledger.child();
  }
  const MinorMap& map() const { return map_; }

 protected:
  RoundResult execute(const RoundSpec& s) override {
    RoundSpec hs;
    hs.consensus = s.consensus;
    hs.aggregate = s.aggregate;
    hs.contract = [&](int e) {
      if (F_[e]) return true;
      int le = map_.edge_map[e];
      if (le < 0) return false;
      return s.contract_all || (s.contract && s.contract(le));
    };
    if (s.input)
      hs.input = [&](int v) {
        int c = map_.comp[v];
        return map_.members[c].front() == v ? s.input(c) : s.consensus->identity;
      };
    if (s.edge)
      hs.edge = [&](int e, const Message& ya, const Message& yb, Message& za, Message& zb) {
        int le = map_.edge_map[e];
        if (le < 0) return;
        s.edge(le, ya, yb, za, zb);
      };
    RoundResult hr = host_.round(hs);
    RoundResult r;
    r.comp.assign(n(), -1);
    std::vector<int> seen(hr.super_id.size(), -1);
    for (int c = 0; c < n(); ++c) {
      int hc = hr.comp[map_.members[c].front()];
      for (int v : map_.members[c])
        if (hr.comp[v] != hc) ctx->fidelity_failure("supernode consistency: minor node split across host supernodes");
      ++ctx->consistency_checks;
      if (seen[hc] < 0) {
        seen[hc] = static_cast<int>(r.super_id.size());
        r.super_id.push_back(ids_[c]);
        r.y.push_back(hr.y[hc]);
        r.agg.push_back(hr.agg[hc]);
      }
      r.comp[c] = seen[hc];
    }
    ledger.charge(1);
    return r;
  }

 private:
  Network& host_;
  std::vector<char> F_;
  MinorMap map_;
  std::vector<int> host_edge_;
};

// run_on_minor: literal execution over the host (zero overhead).
template <class Alg>
auto run_on_minor(Network& host, const std::vector<char>& F, Alg&& alg) {
  MinorNetwork mn(host, F);
  return alg(static_cast<Network&>(mn));
}

// ---------- node-disjoint scheduling ----------

// Runs each world's algorithm on its own ledger and charges the longest.
// Parts are identified by their real (non-virtual) node ids, which must be
// pairwise disjoint and connected within each world.
inline void run_disjoint_worlds(Network& parent, std::vector<std::unique_ptr<Network>>& worlds,
                                const std::vector<std::function<void(Network&)>>& algs) {
  std::unordered_map<NodeId, int> owner;
  for (std::size_t i = 0; i < worlds.size(); ++i) {
    Network& w = *worlds[i];
    for (int v = 0; v < w.n(); ++v) {
      if (w.is_virtual(v)) continue;
      auto [it, fresh] = owner.emplace(w.id(v), static_cast<int>(i));
      if (!fresh) throw SchedulingViolation("parts overlap at node " + std::to_string(w.id(v)));
    }
    if (!w.connected_real_part()) throw SchedulingViolation("part " + std::to_string(i) + " is not connected");
  }
  std::vector<const RoundLedger*> ls;
  for (std::size_t i = 0; i < worlds.size(); ++i) {
    worlds[i]->ledger = parent.ledger.child();
    algs[i](*worlds[i]);
    ls.push_back(&worlds[i]->ledger);
  }
  parent.ledger.absorb_max(ls);
}

// run_disjoint_worlds for the worlds that qualify (connected real part,
// disjoint from the ones already taken); the rest run after them one by one.
inline void run_worlds(Network& parent, std::vector<std::unique_ptr<Network>>& worlds,
                       const std::vector<std::function<void(Network&)>>& algs) {
  std::unordered_map<NodeId, int> owner;
  std::vector<std::size_t> par, seq;
  for (std::size_t i = 0; i < worlds.size(); ++i) {
    Network& w = *worlds[i];
    bool ok = w.connected_real_part();
    for (int v = 0; ok && v < w.n(); ++v)
      if (!w.is_virtual(v) && owner.count(w.id(v))) ok = false;
    if (ok)
      for (int v = 0; v < w.n(); ++v)
        if (!w.is_virtual(v)) owner[w.id(v)] = static_cast<int>(i);
    (ok ? par : seq).push_back(i);
  }
  if (!par.empty()) {
    std::vector<std::unique_ptr<Network>> ws;
    std::vector<std::function<void(Network&)>> as;
    for (auto i : par) ws.push_back(std::move(worlds[i])), as.push_back(algs[i]);
    run_disjoint_worlds(parent, ws, as);
    for (std::size_t k = 0; k < par.size(); ++k) worlds[par[k]] = std::move(ws[k]);
  }
  for (auto i : seq) {
    worlds[i]->ledger = parent.ledger.child();
    algs[i](*worlds[i]);
    parent.ledger.absorb(worlds[i]->ledger);
  }
}

inline std::unique_ptr<Network> induced_world(Network& g, const std::vector<int>& nodes) {
  WorldBuilder b;
  std::vector<char> in(g.n(), 0);
  for (int v : nodes) in[v] = 1, b.node(g.id(v), g.is_virtual(v));
  for (int e = 0; e < g.m(); ++e) {
    const auto& ed = g.edge(e);
    if (in[ed.a] && in[ed.b]) b.edge(g.id(ed.a), g.id(ed.b), ed.w, ed.ref >= 0 ? ed.ref : -2 - e);
  }
  return b.build(g.ctx, &g.ledger);
}

// Spec-level entry: parts given as node sets of g.
inline std::vector<std::unique_ptr<Network>> run_disjoint(Network& g, const std::vector<std::vector<int>>& parts,
                                                          const std::vector<std::function<void(Network&)>>& algs) {
  std::vector<char> used(g.n(), 0);
  for (auto& p : parts) {
    std::vector<char> keep(g.n(), 0);
    for (int v : p) {
      if (used[v]) throw SchedulingViolation("parts overlap at node " + std::to_string(g.id(v)));
      used[v] = keep[v] = 1;
    }
    if (!g.connected_subset(keep)) throw SchedulingViolation("part is not connected");
  }
  std::vector<std::unique_ptr<Network>> ws;
  for (auto& p : parts) ws.push_back(induced_world(g, p));
  run_disjoint_worlds(g, ws, algs);
  return ws;
}

}  // namespace minoragg
