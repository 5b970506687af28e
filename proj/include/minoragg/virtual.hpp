#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <set>
#include <vector>

#include "network.hpp"

namespace minoragg {

struct VirtualEdge {
  NodeId a, b;  // at least one endpoint virtual
  Weight w;
};

struct VirtualGraph {
  Network* base = nullptr;
  std::vector<NodeId> virtual_nodes;  // sorted
  std::vector<VirtualEdge> virtual_edges;

  int beta() const { return static_cast<int>(virtual_nodes.size()); }
  bool is_virtual(NodeId x) const { return std::binary_search(virtual_nodes.begin(), virtual_nodes.end(), x); }

  // Real-virtual edges ordered by their real endpoint, then virtual-virtual
  // edges; this is the edge order the literal simulation folds in.
  void normalize() {
    std::sort(virtual_nodes.begin(), virtual_nodes.end());
    for (auto& e : virtual_edges)
      if (is_virtual(e.a) && !is_virtual(e.b)) std::swap(e.a, e.b);
    std::stable_sort(virtual_edges.begin(), virtual_edges.end(), [&](const VirtualEdge& x, const VirtualEdge& y) {
      bool vx = is_virtual(x.a), vy = is_virtual(y.a);
      if (vx != vy) return !vx;
      return !vx && x.a < y.a;
    });
  }
};

// The virtual graph as one explicit world (virtual nodes flagged).
inline std::unique_ptr<Network> materialize_virtual(VirtualGraph vg) {
  vg.normalize();
  Network& g = *vg.base;
  WorldBuilder b;
  for (int v = 0; v < g.n(); ++v) b.node(g.id(v), false);
  for (NodeId x : vg.virtual_nodes) b.node(x, true);
  for (int e = 0; e < g.m(); ++e) b.edge(g.id(g.edge(e).a), g.id(g.edge(e).b), g.edge(e).w, g.edge(e).ref >= 0 ? g.edge(e).ref : -2);
  for (auto& e : vg.virtual_edges) b.edge(e.a, e.b, e.w, -2);
  return b.build(g.ctx, &g.ledger);
}

// Literal simulation of rounds on G_virt using base-graph rounds only.
// Per logical round: one round on the real contracted edges (components,
// representatives, virtual-free consensus), one whole-graph round spreading
// which virtual nodes each component touches, one whole-graph round per
// virtual-containing supernode for consensus, one round for edge outputs on
// real components, and one whole-graph round per virtual-containing
// supernode for its aggregate: 3 + 2c base rounds with c <= beta.
class VirtualNetwork : public Network {
 public:
  explicit VirtualNetwork(VirtualGraph vg) : Network(vg.base->ctx, {}, {}, {}), vg_(std::move(vg)), base_(*vg_.base) {
    vg_.normalize();
    if (!base_.connected_subset(std::vector<char>(base_.n(), 1))) throw ScopeNotConnected("base graph of a virtual graph must be connected");
    auto mat = materialize_virtual(vg_);
    ids_ = mat->ids();
    virt_ = mat->virt();
    edges_ = mat->edges();
    finish();
    ledger = base_.ledger.child();
    // logical index <-> base index
    real_of_.assign(n(), -1);
    for (int v = 0; v < n(); ++v)
      if (!virt_[v]) real_of_[v] = base_.index_of(ids_[v]);
    logical_of_base_.assign(base_.n(), -1);
    for (int v = 0; v < n(); ++v)
      if (real_of_[v] >= 0) logical_of_base_[real_of_[v]] = v;
    // Logical edges: the base edges come first in the same order because
    // materialize_virtual inserts them first.
    base_edge_of_.assign(m(), -1);
    int k = 0;
    for (int e = 0; e < m() && k < base_.m(); ++e) {
      const auto& le = edges_[e];
      if (virt_[le.a] || virt_[le.b]) continue;
      base_edge_of_[e] = k;
      logical_of_base_edge_.push_back(e);
      ++k;
    }
    for (int e = 0; e < m(); ++e)
      if (base_edge_of_[e] < 0) vedges_.push_back(e);
    vindex_.assign(n(), -1);
    for (int v = 0; v < n(); ++v)
      if (virt_[v]) vindex_[v] = static_cast<int>(vlist_.size()), vlist_.push_back(v);
  }

  long long base_rounds_last = 0;

 protected:
  RoundResult execute(const RoundSpec& s) override {
    const int beta = static_cast<int>(vlist_.size());
    const long long start = base_.ledger.total;
    auto contracted = [&](int e) { return s.contract_all || (s.contract && s.contract(e)); };
    const Message& cid = s.consensus->identity;
    const Message& aid = s.aggregate->identity;
    if (beta == 0) return passthrough(s, start);

    // Virtual-node adjacency through contracted virtual-virtual edges and
    // the direct contracted touches of each real node; both are local
    // knowledge under the storage rule.
    std::vector<std::uint64_t> touch(n(), 0);
    std::vector<std::vector<int>> vv(beta);
    for (int e : vedges_) {
      if (!contracted(e)) continue;
      int a = edges_[e].a, b = edges_[e].b;
      if (virt_[a] && virt_[b]) {
        vv[vindex_[a]].push_back(vindex_[b]);
        vv[vindex_[b]].push_back(vindex_[a]);
      } else {
        int r = virt_[a] ? b : a, v = virt_[a] ? a : b;
        touch[r] |= 1ull << vindex_[v];
      }
    }

    // Round 1: contract real contracted edges; learn the component's touch
    // set, representative, and the plain consensus value.
    auto tm = ops::pair(ops::pair(ops::bit_or(), ops::min()), s.consensus);
    RoundSpec r1;
    r1.contract = [&](int be) { return contracted(logical_of_base_edge_[be]); };
    r1.consensus = tm;
    r1.input = [&](int bv) {
      int v = logical_of_base_[bv];
      Message x = s.input ? s.input(v) : cid;
      return enc_pair(enc_pair(enc_u(touch[v]), enc_i(static_cast<std::int64_t>(ids_[v]))), x);
    };
    auto res1 = base_.round(r1);
    const std::size_t K = res1.super_id.size();
    std::vector<std::uint64_t> dset(K);
    std::vector<NodeId> rep(K);
    std::vector<Message> ycomp(K);
    for (std::size_t c = 0; c < K; ++c) {
      auto [meta, y] = dec_pair(res1.y[c]);
      auto [m1, m2] = dec_pair(meta);
      dset[c] = m1.empty() ? 0 : dec_u(m1);
      rep[c] = static_cast<NodeId>(dec_i(m2));
      ycomp[c] = y;
    }

    // Virtual classes: connected components over virtual nodes where two are
    // adjacent if contracted together or touched by a common component.
    std::vector<std::uint64_t> cotouch(beta, 0);
    std::vector<std::int64_t> minrep(beta, std::numeric_limits<std::int64_t>::max());
    if (beta > 0) {
      // Round 2: whole graph; component representatives report their sets.
      RoundSpec r2;
      r2.contract_all = true;
      auto vec_op = ops::make("touch-vector", "", [beta](const Message& a, const Message& b) {
        Reader ra(a), rb(b);
        Writer w;
        for (int i = 0; i < beta; ++i) {
          std::uint64_t ma = ra.u(), mb = rb.u();
          std::int64_t ia = ra.i(), ib = rb.i();
          w.u(ma | mb).i(std::min(ia, ib));
        }
        return std::move(w).str();
      });
      r2.consensus = vec_op;
      r2.input = [&](int bv) {
        int c = res1.comp[bv];
        if (base_.id(bv) != rep[c] || dset[c] == 0) return Message{};
        Writer w;
        for (int i = 0; i < beta; ++i) {
          bool t = (dset[c] >> i) & 1;
          w.u(t ? dset[c] : 0).i(t ? static_cast<std::int64_t>(rep[c]) : std::numeric_limits<std::int64_t>::max());
        }
        return std::move(w).str();
      };
      auto res2 = base_.round(r2);
      if (!res2.y[0].empty()) {
        Reader rd(res2.y[0]);
        for (int i = 0; i < beta; ++i) cotouch[i] = rd.u(), minrep[i] = rd.i();
      }
    }
    std::vector<int> vclass(beta, -1);
    int classes = 0;
    for (int i = 0; i < beta; ++i) {
      if (vclass[i] >= 0) continue;
      std::vector<int> st{i};
      vclass[i] = classes;
      while (!st.empty()) {
        int x = st.back();
        st.pop_back();
        std::vector<int> nb = vv[x];
        for (int j = 0; j < beta; ++j)
          if ((cotouch[x] >> j) & 1) nb.push_back(j);
        for (int y : nb)
          if (vclass[y] < 0) vclass[y] = classes, st.push_back(y);
      }
      ++classes;
    }
    // Canonical id per class: min over touching representatives and members.
    std::vector<NodeId> class_id(classes, std::numeric_limits<NodeId>::max());
    for (int i = 0; i < beta; ++i) {
      NodeId cand = std::min<NodeId>(ids_[vlist_[i]], minrep[i] == std::numeric_limits<std::int64_t>::max()
                                                          ? std::numeric_limits<NodeId>::max()
                                                          : static_cast<NodeId>(minrep[i]));
      class_id[vclass[i]] = std::min(class_id[vclass[i]], cand);
    }
    // Order classes by canonical id (ascending processing order).
    std::vector<int> corder(classes);
    std::iota(corder.begin(), corder.end(), 0);
    std::sort(corder.begin(), corder.end(), [&](int a, int b) { return class_id[a] < class_id[b]; });
    std::vector<int> comp_class(K, -1);
    for (std::size_t c = 0; c < K; ++c)
      for (int i = 0; i < beta; ++i)
        if ((dset[c] >> i) & 1) comp_class[c] = vclass[i];

    // Consensus for virtual-containing supernodes: one whole-graph round
    // each; virtual members' inputs are replicated at every node and folded
    // after the real members.
    std::vector<Message> yclass(classes, cid);
    for (int k : corder) {
      RoundSpec rc;
      rc.contract_all = true;
      rc.consensus = s.consensus;
      if (s.input)
        rc.input = [&](int bv) {
          int c = res1.comp[bv];
          return comp_class[c] == k ? s.input(logical_of_base_[bv]) : cid;
        };
      auto resc = base_.round(rc);
      Message y = resc.y[0];
      if (s.input)
        for (int i = 0; i < beta; ++i)
          if (vclass[i] == k) y = s.consensus->combine(y, s.input(vlist_[i]));
      yclass[k] = y;
    }

    // Logical supernode per logical node.
    auto super_of = [&](int v) -> std::pair<NodeId, const Message*> {
      if (virt_[v]) {
        int k = vclass[vindex_[v]];
        return {class_id[k], &yclass[k]};
      }
      int c = res1.comp[real_of_[v]];
      if (comp_class[c] >= 0) return {class_id[comp_class[c]], &yclass[comp_class[c]]};
      return {rep[c], &ycomp[c]};
    };

    // Edge outputs toward each side, evaluated where the edge is stored.
    std::vector<Message> z_to_virtual_owner;  // unused placeholder for clarity
    (void)z_to_virtual_owner;
    std::vector<Message> aggcomp(K, aid), aggclass(classes, aid);
    if (s.edge) {
      // Per real node: fold of z over its virtual edges toward its own side.
      std::vector<Message> vz_own(base_.n(), aid);
      // z toward a virtual endpoint's class, held by the real endpoint.
      std::vector<std::map<int, Message>> vz_class(base_.n());
      std::vector<Message> vv_class(classes, aid);
      for (int e : vedges_) {
        int a = edges_[e].a, b = edges_[e].b;
        auto [ia, ya] = super_of(a);
        auto [ib, yb] = super_of(b);
        if (ia == ib) continue;
        Message za = aid, zb = aid;
        s.edge(e, *ya, *yb, za, zb);
        if (virt_[a] && virt_[b]) {
          int ka = vclass[vindex_[a]], kb = vclass[vindex_[b]];
          vv_class[ka] = s.aggregate->combine(vv_class[ka], za);
          vv_class[kb] = s.aggregate->combine(vv_class[kb], zb);
        } else {
          int ra = real_of_[a];  // real endpoint is a after normalize
          vz_own[ra] = s.aggregate->combine(vz_own[ra], za);
          int kb = vclass[vindex_[b]];
          auto& slot = vz_class[ra][kb];
          if (slot.empty() && !aid.empty()) slot = aid;
          slot = s.aggregate->combine(slot, zb);
        }
      }
      // Round: real contracted edges; base edges emit z using logical ids.
      RoundSpec ra;
      ra.contract = [&](int be) { return contracted(logical_of_base_edge_[be]); };
      ra.consensus = ops::pair(ops::first(), s.aggregate);
      ra.input = [&](int bv) {
        auto [id, y] = super_of(logical_of_base_[bv]);
        return enc_pair(Writer().u(id).raw(*y).str(), vz_own[bv]);
      };
      ra.aggregate = s.aggregate;
      ra.edge = [&](int be, const Message& ya, const Message& yb, Message& za, Message& zb) {
        auto pa = dec_pair(ya).first, pb = dec_pair(yb).first;
        Reader rda(pa), rdb(pb);
        NodeId ida = rda.u(), idb = rdb.u();
        if (ida == idb) return;
        Message va = rda.raw(), vb = rdb.raw();
        s.edge(logical_of_base_edge_[be], va, vb, za, zb);
      };
      auto resa = base_.round(ra);
      for (std::size_t c = 0; c < K; ++c) aggcomp[c] = s.aggregate->combine(resa.agg[c], dec_pair(resa.y[c]).second);
      // Whole-graph round per class.
      for (int k : corder) {
        RoundSpec rk;
        rk.contract_all = true;
        rk.consensus = s.aggregate;
        rk.input = [&](int bv) {
          int c = res1.comp[bv];
          Message x = aid;
          if (comp_class[c] == k && base_.id(bv) == rep[c]) x = aggcomp[c];
          if (comp_class[c] != k) {
            auto it = vz_class[bv].find(k);
            if (it != vz_class[bv].end()) x = s.aggregate->combine(x, it->second);
          }
          return x;
        };
        auto resk = base_.round(rk);
        aggclass[k] = s.aggregate->combine(resk.y[0], vv_class[k]);
      }
    }

    // Assemble logical results.
    RoundResult r;
    r.comp.assign(n(), -1);
    std::map<NodeId, int> slot;
    for (int v = 0; v < n(); ++v) {
      auto [id, y] = super_of(v);
      auto it = slot.find(id);
      if (it == slot.end()) {
        it = slot.emplace(id, static_cast<int>(r.super_id.size())).first;
        r.super_id.push_back(id);
        r.y.push_back(*y);
        const Message* a;
        if (virt_[v]) a = &aggclass[vclass[vindex_[v]]];
        else {
          int c = res1.comp[real_of_[v]];
          a = comp_class[c] >= 0 ? &aggclass[comp_class[c]] : &aggcomp[c];
        }
        r.agg.push_back(*a);
      }
      r.comp[v] = it->second;
    }
    base_rounds_last = base_.ledger.total - start;
    ledger.charge(1);
    return r;
  }

 private:
  RoundResult passthrough(const RoundSpec& s, long long start) {
    RoundSpec hs;
    hs.contract_all = s.contract_all;
    hs.consensus = s.consensus;
    hs.aggregate = s.aggregate;
    if (s.contract) hs.contract = [&](int be) { return s.contract(logical_of_base_edge_[be]); };
    if (s.input) hs.input = [&](int bv) { return s.input(logical_of_base_[bv]); };
    if (s.edge)
      hs.edge = [&](int be, const Message& ya, const Message& yb, Message& za, Message& zb) {
        s.edge(logical_of_base_edge_[be], ya, yb, za, zb);
      };
    auto hr = base_.round(hs);
    RoundResult r = hr;
    for (int v = 0; v < n(); ++v) r.comp[v] = hr.comp[real_of_[v]];
    base_rounds_last = base_.ledger.total - start;
    ledger.charge(1);
    return r;
  }

  VirtualGraph vg_;
  Network& base_;
  std::vector<int> real_of_, logical_of_base_, base_edge_of_, logical_of_base_edge_, vedges_, vindex_, vlist_;
};

template <class Alg>
auto simulate_virtual(const VirtualGraph& vg, Alg&& alg) {
  if (vg.beta() > 64) throw InputViolation("simulation supports at most 64 virtual nodes");
  VirtualNetwork vn(vg);
  return alg(static_cast<Network&>(vn));
}

// Replaces nodes by virtual twins with the same ids. Each former neighbor
// gets one edge per twin weighted by the sum of its parallel edges. Two
// rounds: neighbors learn the twin ids, then sum the weights.
inline VirtualGraph replace_with_virtual(Network& g, const std::vector<int>& nodes, std::unique_ptr<Network>& base_out) {
  std::vector<char> gone(g.n(), 0);
  for (int v : nodes) gone[v] = 1;
  RoundSpec learn;
  learn.input = [&](int v) { return gone[v] ? enc_u(g.id(v)) : Message{}; };
  learn.consensus = ops::first();
  learn.edge = [&](int, const Message&, const Message&, Message&, Message&) {};
  g.round(learn);
  RoundSpec sum;
  sum.aggregate = ops::assoc_sum();
  sum.edge = [&](int e, const Message&, const Message&, Message& za, Message& zb) {
    const auto& ed = g.edge(e);
    if (gone[ed.b] && !gone[ed.a]) za = enc_kv({{g.id(ed.b), ed.w}});
    if (gone[ed.a] && !gone[ed.b]) zb = enc_kv({{g.id(ed.a), ed.w}});
  };
  auto res = g.round(sum);
  std::vector<int> keep;
  for (int v = 0; v < g.n(); ++v)
    if (!gone[v]) keep.push_back(v);
  base_out = induced_world(g, keep);
  VirtualGraph vg;
  vg.base = base_out.get();
  for (int v : nodes) vg.virtual_nodes.push_back(g.id(v));
  for (int v : keep)
    for (auto [twin, w] : dec_kv(res.agg_of(v))) vg.virtual_edges.push_back({g.id(v), twin, w});
  // edges among replaced nodes are known to everyone
  std::map<std::pair<NodeId, NodeId>, Weight> vvw;
  for (int e = 0; e < g.m(); ++e) {
    const auto& ed = g.edge(e);
    if (gone[ed.a] && gone[ed.b]) vvw[std::minmax(g.id(ed.a), g.id(ed.b))] += ed.w;
  }
  for (auto [p, w] : vvw) vg.virtual_edges.push_back({p.first, p.second, w});
  vg.normalize();
  return vg;
}

// Runs an algorithm on the real part of a world that carries virtual nodes.
template <class Alg>
auto devirtualize_scope(Network& w, Alg&& alg) {
  if (w.beta() == 0) return alg(w);
  if (!w.connected_real_part()) throw MustUseSeparableFallback("removing virtual nodes disconnects the scope");
  std::vector<int> real;
  for (int v = 0; v < w.n(); ++v)
    if (!w.is_virtual(v)) real.push_back(v);
  auto scope = induced_world(w, real);
  struct Absorb {
    Network& parent;
    Network& child;
    ~Absorb() { parent.ledger.absorb(child.ledger); }
  } guard{w, *scope};
  return alg(*scope);
}

}  // namespace minoragg
