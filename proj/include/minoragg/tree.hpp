#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <functional>
#include <vector>

#include "network.hpp"

namespace minoragg {

// ---------- HL-info and LCA labels ----------

struct LightRec {
  NodeId upper = 0, lower = 0;
  int du = 0, dl = 0;
  bool operator==(const LightRec&) const = default;
};

// What a node knows about its place in a heavy-light decomposition: its depth
// and the light edges on its root path, top first.
struct HLInfo {
  NodeId id = 0;
  int depth = 0;
  std::vector<LightRec> light;

  int hl_depth() const { return static_cast<int>(light.size()); }
  // depth of the top node of v's heavy path
  int head_depth() const { return light.empty() ? 0 : light.back().dl; }
  int path_index() const { return depth - head_depth(); }
};

inline void write_hl(Writer& w, const HLInfo& h) {
  w.u(h.id).u(static_cast<std::uint64_t>(h.depth)).u(h.light.size());
  for (auto& r : h.light) w.u(r.upper).u(r.lower).u(static_cast<std::uint64_t>(r.du)).u(static_cast<std::uint64_t>(r.dl));
}
inline Message encode_hl(const HLInfo& h) {
  Writer w;
  write_hl(w, h);
  return std::move(w).str();
}
inline HLInfo read_hl(Reader& r) {
  HLInfo h;
  h.id = r.u();
  h.depth = static_cast<int>(r.u());
  std::size_t k = r.u();
  h.light.resize(k);
  for (auto& x : h.light) {
    x.upper = r.u();
    x.lower = r.u();
    x.du = static_cast<int>(r.u());
    x.dl = static_cast<int>(r.u());
  }
  return h;
}
inline HLInfo decode_hl(const Message& m) {
  Reader r(m);
  return read_hl(r);
}

// Local LCA from two labels of the same decomposition. Both nodes leave the
// last shared heavy path at some node; the shallower exit is the LCA. Labels
// from different decompositions give an unspecified answer.
inline std::pair<NodeId, int> lca_from_hl(const HLInfo& a, const HLInfo& b) {
  std::size_t k = 0;
  while (k < a.light.size() && k < b.light.size() && a.light[k] == b.light[k]) ++k;
  auto exit = [k](const HLInfo& x) -> std::pair<NodeId, int> {
    if (k < x.light.size()) return {x.light[k].upper, x.light[k].du};
    return {x.id, x.depth};
  };
  auto ea = exit(a), eb = exit(b);
  return ea.second <= eb.second ? ea : eb;
}
inline bool is_ancestor(const HLInfo& a, const HLInfo& b) { return lca_from_hl(a, b).first == a.id; }

// ---------- rooted forests over a world ----------

// Per-node state of a rooted forest inside a world. parent_edge is what
// each node stores; the HL fields are filled by build_hl_rooted.
struct Forest {
  std::vector<int> parent_edge;  // -1 at roots
  std::vector<int> heavy_edge;   // edge to the heavy child, -1 at leaves
  std::vector<std::int64_t> size;
  std::vector<HLInfo> info;
  bool has_hl = false;

  int parent(const Network& w, int v) const { return parent_edge[v] < 0 ? -1 : w.other(parent_edge[v], v); }
  bool is_tree_edge(const Network& w, int e) const {
    const auto& ed = w.edge(e);
    return parent_edge[ed.a] == e || parent_edge[ed.b] == e;
  }
  // lower endpoint of a tree edge
  int lower(const Network& w, int e) const { return parent_edge[w.edge(e).a] == e ? w.edge(e).a : w.edge(e).b; }
  bool is_light(const Network& w, int v) const {
    int p = parent(w, v);
    return p >= 0 && heavy_edge[p] != parent_edge[v];
  }
};

inline Forest forest_from_parents(const Network& w, std::vector<int> parent_edge) {
  Forest f;
  f.parent_edge = std::move(parent_edge);
  if (static_cast<int>(f.parent_edge.size()) != w.n()) throw InputViolation("parent map size mismatch");
  return f;
}

// Global max over per-node values, one round.
inline std::int64_t global_max(Network& w, const std::function<std::int64_t(int)>& val) {
  RoundSpec s;
  s.contract_all = true;
  s.consensus = ops::max();
  s.input = [&](int v) { return enc_i(val(v)); };
  auto r = w.round(s);
  return r.y.empty() || r.y[0].empty() ? 0 : dec_i(r.y[0]);
}

// ---------- star merging ----------

struct StarMergePartition {
  std::vector<char> joiner;   // per world node (copied to every member of a part)
  std::vector<char> in_O;     // part has an out-edge
  std::vector<int> color;     // final 3-coloring, per node
  int joiners = 0, with_out = 0;
};

namespace detail {

// Cole-Vishkin on a graph of out-degree <= 1, one color per node.
// out[v] = incident edge v points along, or -1.
inline std::vector<int> three_color(Network& g, const std::vector<int>& out) {
  const int N = g.n();
  std::vector<std::uint64_t> c(N);
  for (int v = 0; v < N; ++v) c[v] = g.id(v);
  auto succ_values = [&](const std::vector<std::uint64_t>& col) {
    RoundSpec s;
    s.input = [&](int v) { return enc_u(col[v]); };
    s.edge = [&](int e, const Message& ya, const Message& yb, Message& za, Message& zb) {
      const auto& ed = g.edge(e);
      if (out[ed.a] == e) za = yb;
      if (out[ed.b] == e) zb = ya;
    };
    auto r = g.round(s);
    std::vector<long long> sv(N, -1);
    for (int v = 0; v < N; ++v)
      if (out[v] >= 0) sv[v] = static_cast<long long>(dec_u(r.agg_of(v)));
    return sv;
  };
  // bit-index reduction: b-bit colors become 2b colors; 64 bits reach 6
  // colors after four steps
  int bits = 64, iters = 0;
  while (true) {
    std::uint64_t next = 2ull * static_cast<std::uint64_t>(bits);
    auto sv = succ_values(c);
    for (int v = 0; v < N; ++v) {
      std::uint64_t other = out[v] >= 0 ? static_cast<std::uint64_t>(sv[v]) : (c[v] ^ 1ull);
      int i = std::countr_zero(c[v] ^ other);
      c[v] = 2ull * static_cast<std::uint64_t>(i) + ((c[v] >> i) & 1ull);
    }
    if (++iters > 10) throw InputViolation("coloring did not converge");
    if (next <= 6) break;
    bits = std::bit_width(next - 1);
  }
  // shift-down from 6 to 3 colors
  for (std::uint64_t k = 5; k >= 3; --k) {
    auto sv = succ_values(c);
    std::vector<std::uint64_t> old = c;
    for (int v = 0; v < N; ++v) {
      if (out[v] >= 0) c[v] = static_cast<std::uint64_t>(sv[v]);
      else c[v] = old[v] == 0 ? 1 : 0;
    }
    auto sn = succ_values(c);
    for (int v = 0; v < N; ++v) {
      if (c[v] != k) continue;
      for (std::uint64_t x = 0; x < 3; ++x) {
        if (out[v] >= 0 && static_cast<std::uint64_t>(sn[v]) == x) continue;
        if (old[v] == x) continue;  // every in-neighbor now holds old[v]
        c[v] = x;
        break;
      }
    }
  }
  std::vector<int> col(N);
  for (int v = 0; v < N; ++v) col[v] = static_cast<int>(c[v]);
  return col;
}

}  // namespace detail

// Parts are the components of F. out_tail[v] = e marks e as the out-edge of
// v's part with v as its tail. Most frequent color among parts with an
// out-edge becomes the joiner set.
inline StarMergePartition star_merge(Network& w, const std::vector<char>& F, const std::vector<int>& out_tail) {
  Phase ph(w.ledger, "star-merge");
  MinorNetwork mn(w, F);
  const auto& mm = mn.map();
  std::vector<int> out(mn.n(), -1);
  for (int v = 0; v < w.n(); ++v) {
    int e = out_tail[v];
    if (e < 0) continue;
    const auto& ed = w.edge(e);
    if (ed.a != v && ed.b != v) throw InputViolation("out-edge tail is not an endpoint");
    int c = mm.comp[v];
    if (mm.comp[w.other(e, v)] == c) throw InputViolation("out-edge is a self-loop of its part");
    if (out[c] >= 0) throw InputViolation("part has out-degree above one");
    out[c] = mm.edge_map[e];
  }
  auto col = detail::three_color(mn, out);
  // count colors over O in one round
  RoundSpec s;
  s.contract_all = true;
  s.consensus = ops::make("sum3", "", [](const Message& a, const Message& b) {
    auto x = dec_tuple(a), y = dec_tuple(b);
    return enc_tuple({x[0] + y[0], x[1] + y[1], x[2] + y[2]});
  });
  s.input = [&](int v) {
    if (out[v] < 0) return Message{};
    std::int64_t k[3] = {0, 0, 0};
    k[col[v]] = 1;
    return enc_tuple({k[0], k[1], k[2]});
  };
  auto r = mn.round(s);
  std::vector<std::int64_t> cnt{0, 0, 0};
  if (!r.y.empty() && !r.y[0].empty()) cnt = dec_tuple(r.y[0]);
  int best = 0;
  for (int k = 1; k < 3; ++k)
    if (cnt[k] > cnt[best]) best = k;

  StarMergePartition p;
  p.joiner.assign(w.n(), 0);
  p.in_O.assign(w.n(), 0);
  p.color.assign(w.n(), 0);
  std::vector<char> pj(mn.n(), 0);
  for (int c = 0; c < mn.n(); ++c) {
    pj[c] = out[c] >= 0 && col[c] == best;
    p.with_out += out[c] >= 0;
    p.joiners += pj[c];
  }
  for (int v = 0; v < w.n(); ++v) {
    int c = mm.comp[v];
    p.joiner[v] = pj[c];
    p.in_O[v] = out[c] >= 0;
    p.color[v] = col[c];
  }
  // fidelity: proper coloring, joiners point at receivers, |J| >= |O|/3
  for (int c = 0; c < mn.n(); ++c) {
    if (out[c] < 0) continue;
    int d = mn.other(out[c], c);
    if (col[c] == col[d]) w.ctx->fidelity_failure("star-merge: coloring not proper");
    if (pj[c] && pj[d]) w.ctx->fidelity_failure("star-merge: joiner points at joiner");
  }
  if (3 * p.joiners < p.with_out) w.ctx->fidelity_failure("star-merge: |J| < |O|/3");
  return p;
}

// ---------- prefix / suffix sums on numbered paths ----------

// Node-disjoint paths, all processed in lockstep. A node on a path knows its
// index and the path edges to its predecessor and successor.
struct PathLayout {
  std::vector<int> index;      // -1 off every path
  std::vector<int> next_edge;  // toward index + 1, -1 at the last node
  std::vector<int> prev_edge;  // toward index - 1, -1 at the first node
};

inline void check_layout(const Network& w, const PathLayout& L) {
  for (int v = 0; v < w.n(); ++v) {
    if (L.index[v] < 0) continue;
    if ((L.index[v] == 0) != (L.prev_edge[v] < 0)) throw InputViolation("path index inconsistent with predecessor");
    if (L.next_edge[v] >= 0) {
      int u = w.other(L.next_edge[v], v);
      if (L.index[u] != L.index[v] + 1 || L.prev_edge[u] != L.next_edge[v]) throw InputViolation("scope is not a numbered path");
    }
    if (L.prev_edge[v] >= 0) {
      int u = w.other(L.prev_edge[v], v);
      if (L.index[u] != L.index[v] - 1 || L.next_edge[u] != L.prev_edge[v]) throw InputViolation("scope is not a numbered path");
    }
  }
}

struct PrefixSuffix {
  std::vector<Message> prefix, suffix;
};

using Restrict = std::function<Message(int, const Message&)>;

// Sibling segments double each level: a segment total crosses the middle
// edge between siblings, so each level costs one round.
inline PrefixSuffix path_prefix_suffix(Network& w, const PathLayout& L, const std::vector<Message>& x, const OpPtr& op,
                                       bool want_prefix = true, bool want_suffix = true, const Restrict& restrict = {}) {
  Phase ph(w.ledger, "path-prefix-suffix");
  check_layout(w, L);
  const int N = w.n();
  PrefixSuffix out;
  out.prefix.assign(N, op->identity);
  out.suffix.assign(N, op->identity);
  for (int v = 0; v < N; ++v)
    if (L.index[v] >= 0) {
      out.prefix[v] = x[v];
      out.suffix[v] = restrict ? restrict(v, x[v]) : x[v];
    }
  std::int64_t maxlen = global_max(w, [&](int v) { return L.index[v] + 1; });
  // per edge: lower index endpoint of a path edge, or -1
  std::vector<int> upper(w.m(), -1);
  for (int v = 0; v < N; ++v)
    if (L.index[v] >= 0 && L.next_edge[v] >= 0) upper[L.next_edge[v]] = v;
  auto pair_op = ops::pair(ops::first(), ops::first());
  for (int k = 0; (1ll << k) < maxlen; ++k) {
    RoundSpec s;
    s.contract = [&](int e) {
      int u = upper[e];
      if (u < 0) return false;
      int i = L.index[u];
      return (i >> k) == ((i + 1) >> k);
    };
    s.consensus = pair_op;
    s.input = [&](int v) {
      int i = L.index[v];
      if (i < 0) return pair_op->identity;
      bool first = (i & ((1 << k) - 1)) == 0;
      bool last = ((i + 1) & ((1 << k) - 1)) == 0 || L.next_edge[v] < 0;
      Message pre = want_prefix && last ? out.prefix[v] : Message{};
      Message suf = want_suffix && first ? out.suffix[v] : Message{};
      if (pre.empty() && suf.empty()) return pair_op->identity;
      return enc_pair(pre, suf);
    };
    s.edge = [&](int e, const Message& ya, const Message& yb, Message& za, Message& zb) {
      int u = upper[e];
      if (u < 0) return;
      int i = L.index[u];
      if ((((i + 1) >> k) & 1) == 0 || (i >> k) == ((i + 1) >> k)) return;  // not a sibling boundary
      bool a_is_upper = w.edge(e).a == u;
      const Message& yl = a_is_upper ? ya : yb;
      const Message& yr = a_is_upper ? yb : ya;
      Message& zl = a_is_upper ? za : zb;
      Message& zr = a_is_upper ? zb : za;
      if (want_suffix) zl = enc_pair(Message{}, dec_pair(yr).second);
      if (want_prefix) zr = enc_pair(dec_pair(yl).first, Message{});
    };
    s.aggregate = pair_op;
    auto r = w.round(s);
    for (int v = 0; v < N; ++v) {
      int i = L.index[v];
      if (i < 0) continue;
      const Message& got = r.agg_of(v);
      if (got == pair_op->identity) continue;
      auto [lt, rt] = dec_pair(got);
      bool left = ((i >> k) & 1) == 0;
      if (left && want_suffix && !rt.empty()) {
        Message s2 = op->combine(out.suffix[v], rt);
        out.suffix[v] = restrict ? restrict(v, s2) : s2;
      }
      if (!left && want_prefix && !lt.empty()) out.prefix[v] = op->combine(lt, out.prefix[v]);
    }
  }
  return out;
}

// ---------- subtree and ancestor sums over an HL decomposition ----------

inline PathLayout heavy_paths_at(const Network& w, const Forest& f, int d) {
  PathLayout L;
  L.index.assign(w.n(), -1);
  L.next_edge.assign(w.n(), -1);
  L.prev_edge.assign(w.n(), -1);
  for (int v = 0; v < w.n(); ++v) {
    if (f.info[v].hl_depth() != d) continue;
    L.index[v] = f.info[v].path_index();
    L.next_edge[v] = f.heavy_edge[v];
    L.prev_edge[v] = L.index[v] > 0 ? f.parent_edge[v] : -1;
  }
  return L;
}

// s_v = x_v (+) light children of v (+) s_heavy(v), restricted at v when a
// restrict hook is given (used to keep associative arrays small).
inline std::vector<Message> hl_subtree_sum(Network& w, const Forest& f, const std::vector<Message>& x, const OpPtr& op,
                                           const Restrict& restrict = {}) {
  if (!f.has_hl) throw InputViolation("subtree sum needs HL info");
  Phase ph(w.ledger, "hl-subtree-sum");
  const int N = w.n();
  int maxd = static_cast<int>(global_max(w, [&](int v) { return f.info[v].hl_depth(); }));
  std::vector<Message> s(N, op->identity);
  for (int d = maxd; d >= 0; --d) {
    std::vector<Message> val(N, op->identity);
    for (int v = 0; v < N; ++v)
      if (f.info[v].hl_depth() == d) val[v] = x[v];
    if (d < maxd) {
      RoundSpec r;
      r.input = [&](int v) {
        bool head = f.info[v].hl_depth() == d + 1 && f.info[v].path_index() == 0 && f.parent_edge[v] >= 0;
        return head ? s[v] : op->identity;
      };
      r.consensus = ops::first();
      r.edge = [&](int e, const Message& ya, const Message& yb, Message& za, Message& zb) {
        const auto& ed = w.edge(e);
        if (f.parent_edge[ed.b] == e && f.info[ed.b].hl_depth() == d + 1 && f.info[ed.b].path_index() == 0) za = yb;
        if (f.parent_edge[ed.a] == e && f.info[ed.a].hl_depth() == d + 1 && f.info[ed.a].path_index() == 0) zb = ya;
      };
      r.aggregate = op;
      auto res = w.round(r);
      for (int v = 0; v < N; ++v)
        if (f.info[v].hl_depth() == d && res.agg_of(v) != op->identity) val[v] = op->combine(val[v], res.agg_of(v));
    }
    auto L = heavy_paths_at(w, f, d);
    auto ps = path_prefix_suffix(w, L, val, op, false, true, restrict);
    for (int v = 0; v < N; ++v)
      if (f.info[v].hl_depth() == d) s[v] = ps.suffix[v];
  }
  return s;
}

// p_v = combination over the root path of v, root first.
inline std::vector<Message> hl_ancestor_sum(Network& w, const Forest& f, const std::vector<Message>& x, const OpPtr& op) {
  if (!f.has_hl) throw InputViolation("ancestor sum needs HL info");
  Phase ph(w.ledger, "hl-ancestor-sum");
  const int N = w.n();
  int maxd = static_cast<int>(global_max(w, [&](int v) { return f.info[v].hl_depth(); }));
  std::vector<Message> p(N, op->identity);
  for (int d = 0; d <= maxd; ++d) {
    std::vector<Message> up(N, op->identity);
    if (d > 0) {
      RoundSpec r;
      r.contract = [&](int e) {
        const auto& ed = w.edge(e);
        bool heavy = f.heavy_edge[ed.a] == e || f.heavy_edge[ed.b] == e;
        return heavy && f.info[ed.a].hl_depth() == d && f.info[ed.b].hl_depth() == d;
      };
      r.input = [&](int v) { return f.info[v].hl_depth() == d - 1 ? p[v] : Message{}; };
      r.consensus = ops::first();
      r.edge = [&](int e, const Message& ya, const Message& yb, Message& za, Message& zb) {
        const auto& ed = w.edge(e);
        if (f.parent_edge[ed.b] == e && f.info[ed.b].hl_depth() == d && f.info[ed.b].path_index() == 0) zb = ya;
        if (f.parent_edge[ed.a] == e && f.info[ed.a].hl_depth() == d && f.info[ed.a].path_index() == 0) za = yb;
      };
      r.aggregate = ops::first();
      auto res = w.round(r);
      for (int v = 0; v < N; ++v)
        if (f.info[v].hl_depth() == d) up[v] = res.agg_of(v);
    }
    std::vector<Message> val(N, op->identity);
    for (int v = 0; v < N; ++v)
      if (f.info[v].hl_depth() == d) val[v] = x[v];
    auto L = heavy_paths_at(w, f, d);
    auto ps = path_prefix_suffix(w, L, val, op, true, false);
    for (int v = 0; v < N; ++v)
      if (f.info[v].hl_depth() == d) p[v] = op->combine(up[v], ps.prefix[v]);
  }
  return p;
}

// ---------- rooted HL construction ----------

namespace detail {

// Messages that carry a list of light records, concatenated in order.
inline Message enc_recs(const std::vector<LightRec>& rs) {
  Writer w;
  for (auto& r : rs) w.u(r.upper).u(r.lower).u(static_cast<std::uint64_t>(r.du)).u(static_cast<std::uint64_t>(r.dl));
  return std::move(w).str();
}
inline std::vector<LightRec> dec_recs(const Message& m) {
  std::vector<LightRec> out;
  Reader r(m);
  while (!r.done()) {
    LightRec x;
    x.upper = r.u();
    x.lower = r.u();
    x.du = static_cast<int>(r.u());
    x.dl = static_cast<int>(r.u());
    out.push_back(x);
  }
  return out;
}

}  // namespace detail

// Parts start as single nodes and merge along parent edges through star
// merges. A receiver's HL stays valid for its own tree while the phase
// recomputes sizes and light lists; joiners keep their internal HL and
// prepend the attach point's label.
inline void build_hl_rooted(Network& w, Forest& f) {
  Phase ph(w.ledger, "build-hl");
  const int N = w.n();
  for (int v = 0; v < N; ++v)
    if (f.parent_edge[v] >= 0) {
      const auto& ed = w.edge(f.parent_edge[v]);
      if (ed.a != v && ed.b != v) throw InputViolation("parent edge not incident");
    }
  f.heavy_edge.assign(N, -1);
  f.size.assign(N, 1);
  f.info.assign(N, {});
  for (int v = 0; v < N; ++v) f.info[v].id = w.id(v);
  f.has_hl = true;
  std::vector<char> F(w.m(), 0);  // tree edges inside a part
  auto top_of_part = [&](int v) { return f.parent_edge[v] >= 0 && !F[f.parent_edge[v]]; };
  const int log_cap = static_cast<int>(std::floor(std::log2(static_cast<double>(std::max(N, 2)))));
  while (true) {
    if (global_max(w, [&](int v) { return top_of_part(v) ? 1 : 0; }) == 0) break;
    std::vector<int> out_tail(N, -1);
    for (int v = 0; v < N; ++v)
      if (top_of_part(v)) out_tail[v] = f.parent_edge[v];
    auto sm = star_merge(w, F, out_tail);
    auto joins = [&](int v) { return top_of_part(v) && sm.joiner[v]; };  // v tops a joiner part

    // attach sizes and the largest attaching joiner, per attach node
    auto best = ops::tuple_max();
    auto agg = ops::pair(ops::sum(), best);
    RoundSpec r1;
    r1.input = [&](int v) { return joins(v) ? enc_i(f.size[v]) : Message{}; };
    r1.edge = [&](int e, const Message& ya, const Message& yb, Message& za, Message& zb) {
      const auto& ed = w.edge(e);
      if (f.parent_edge[ed.b] == e && joins(ed.b)) za = enc_pair(yb, enc_tuple({dec_i(yb), -static_cast<std::int64_t>(w.id(ed.b))}));
      if (f.parent_edge[ed.a] == e && joins(ed.a)) zb = enc_pair(ya, enc_tuple({dec_i(ya), -static_cast<std::int64_t>(w.id(ed.a))}));
    };
    r1.aggregate = agg;
    auto res1 = w.round(r1);
    std::vector<Message> add(N);
    for (int v = 0; v < N; ++v) {
      std::int64_t extra = 0;
      if (res1.agg_of(v) != agg->identity) {
        auto m = dec_pair(res1.agg_of(v)).first;
        extra = m.empty() ? 0 : dec_i(m);
      }
      add[v] = enc_i(1 + extra);
    }
    // new sizes with the pre-merge HL of each part
    auto sz = hl_subtree_sum(w, f, add, ops::sum());
    for (int v = 0; v < N; ++v) f.size[v] = dec_i(sz[v]);

    // new heavy children: largest child, ties to the smaller id
    auto newF = F;
    for (int v = 0; v < N; ++v)
      if (joins(v)) newF[f.parent_edge[v]] = 1;
    RoundSpec r2;
    r2.input = [&](int v) { return enc_tuple({f.size[v], -static_cast<std::int64_t>(w.id(v))}); };
    r2.edge = [&](int e, const Message& ya, const Message& yb, Message& za, Message& zb) {
      if (!newF[e]) return;
      const auto& ed = w.edge(e);
      if (f.parent_edge[ed.b] == e) za = yb;
      else zb = ya;
    };
    r2.aggregate = best;
    auto res2 = w.round(r2);
    std::vector<int> heavy(N, -1);
    for (int v = 0; v < N; ++v) {
      if (res2.agg_of(v).empty()) continue;
      NodeId hid = static_cast<NodeId>(-dec_tuple(res2.agg_of(v))[1]);
      for (int e : w.inc(v))
        if (newF[e] && f.parent_edge[w.other(e, v)] == e && w.id(w.other(e, v)) == hid) heavy[v] = e;
    }
    // children learn whether they are heavy
    RoundSpec r3;
    r3.input = [&](int v) { return enc_i(heavy[v]); };
    r3.edge = [&](int e, const Message& ya, const Message& yb, Message& za, Message& zb) {
      if (!newF[e]) return;
      const auto& ed = w.edge(e);
      if (f.parent_edge[ed.b] == e) zb = enc_i(dec_i(ya) == e ? 1 : 0);
      else za = enc_i(dec_i(yb) == e ? 1 : 0);
    };
    auto res3 = w.round(r3);
    std::vector<char> is_heavy(N, 0);
    for (int v = 0; v < N; ++v)
      if (!res3.agg_of(v).empty()) is_heavy[v] = dec_i(res3.agg_of(v)) == 1;

    // light lists inside receiver parts (joiners compute the same lists they had)
    std::vector<Message> rec(N);
    for (int v = 0; v < N; ++v) {
      int p = f.parent(w, v);
      if (p >= 0 && F[f.parent_edge[v]] && !is_heavy[v])
        rec[v] = detail::enc_recs({{w.id(p), w.id(v), f.info[p].depth, f.info[v].depth}});
    }
    auto lists = hl_ancestor_sum(w, f, rec, ops::concat());

    // joiners learn the attach node's label, then spread it through the part
    std::vector<HLInfo> fresh(N);
    for (int v = 0; v < N; ++v) {
      fresh[v] = f.info[v];
      fresh[v].light = detail::dec_recs(lists[v]);
    }
    RoundSpec r4;
    r4.input = [&](int v) { return encode_hl(fresh[v]); };
    r4.edge = [&](int e, const Message& ya, const Message& yb, Message& za, Message& zb) {
      const auto& ed = w.edge(e);
      if (f.parent_edge[ed.b] == e && joins(ed.b)) zb = ya;
      if (f.parent_edge[ed.a] == e && joins(ed.a)) za = yb;
    };
    auto res4 = w.round(r4);
    RoundSpec r5;
    r5.contract = [&](int e) { return F[e] != 0; };
    r5.input = [&](int v) {
      if (!joins(v)) return Message{};
      return Writer().raw(res4.agg_of(v)).u(is_heavy[v]).u(w.id(v)).str();
    };
    auto res5 = w.round(r5);
    for (int v = 0; v < N; ++v) {
      if (!sm.joiner[v] || !sm.in_O[v]) continue;
      const Message& m = res5.y_of(v);
      if (m.empty()) continue;
      Reader rd(m);
      HLInfo att = decode_hl(rd.raw());
      bool heavy_top = rd.u() != 0;
      NodeId top = rd.u();
      int shift = att.depth + 1;
      HLInfo nv;
      nv.id = w.id(v);
      nv.depth = fresh[v].depth + shift;
      nv.light = att.light;
      if (!heavy_top) nv.light.push_back({att.id, top, att.depth, shift});
      for (auto rr : fresh[v].light) nv.light.push_back({rr.upper, rr.lower, rr.du + shift, rr.dl + shift});
      fresh[v] = nv;
    }
    for (int v = 0; v < N; ++v) {
      f.info[v] = fresh[v];
      f.heavy_edge[v] = heavy[v];
      if (f.info[v].hl_depth() > log_cap) w.ctx->fidelity_failure("HL light-list longer than floor(log2 n)");
    }
    F = newF;
  }
}

// ---------- orienting an unrooted tree ----------

// Parts grow by star merges; every part keeps a root and an HL of its own.
// A joiner part is rerooted at the endpoint of its out-edge: the nodes on
// the path from its old root reverse their parent edges, found through the
// LCA labels of the part.
inline Forest orient_and_hl(Network& w, const std::vector<char>& tree_edge, int r) {
  Phase ph(w.ledger, "orient");
  const int N = w.n();
  Forest f = forest_from_parents(w, std::vector<int>(N, -1));
  build_hl_rooted(w, f);
  std::vector<char> F(w.m(), 0);
  while (true) {
    // each part not holding r picks its min-index tree edge leaving the part
    RoundSpec s;
    s.contract = [&](int e) { return F[e] != 0; };
    s.input = [&](int v) { return v == r ? enc_u(1) : Message{}; };
    s.consensus = ops::bit_or();
    s.edge = [&](int e, const Message&, const Message&, Message& za, Message& zb) {
      if (tree_edge[e] && !F[e]) za = zb = enc_i(e);
    };
    s.aggregate = ops::min();
    auto res = w.round(s);
    bool any = false;
    for (int v = 0; v < N; ++v) any = any || !res.agg_of(v).empty();
    if (!any) break;
    std::vector<int> out_tail(N, -1);
    for (int v = 0; v < N; ++v) {
      if (!res.y_of(v).empty() || res.agg_of(v).empty()) continue;
      int e = static_cast<int>(dec_i(res.agg_of(v)));
      if (w.edge(e).a == v || w.edge(e).b == v) out_tail[v] = e;
    }
    auto sm = star_merge(w, F, out_tail);
    // joiners: the tail broadcasts its label through the part
    RoundSpec s2;
    s2.contract = [&](int e) { return F[e] != 0; };
    s2.input = [&](int v) { return out_tail[v] >= 0 && sm.joiner[v] ? encode_hl(f.info[v]) : Message{}; };
    auto res2 = w.round(s2);
    std::vector<char> anc(N, 0);
    for (int v = 0; v < N; ++v)
      if (sm.joiner[v] && !res2.y_of(v).empty()) anc[v] = is_ancestor(f.info[v], decode_hl(res2.y_of(v)));
    // parents on the reversed path learn which child edge leads to the tail
    RoundSpec s3;
    s3.input = [&](int v) { return enc_i(anc[v]); };
    s3.edge = [&](int e, const Message& ya, const Message& yb, Message& za, Message& zb) {
      if (!F[e]) return;
      const auto& ed = w.edge(e);
      if (f.parent_edge[ed.b] == e && dec_i(yb)) za = enc_i(e);
      if (f.parent_edge[ed.a] == e && dec_i(ya)) zb = enc_i(e);
    };
    s3.aggregate = ops::min();
    auto res3 = w.round(s3);
    std::vector<int> pe = f.parent_edge;
    for (int v = 0; v < N; ++v) {
      if (!anc[v]) continue;
      if (out_tail[v] >= 0) pe[v] = out_tail[v];
      else pe[v] = static_cast<int>(dec_i(res3.agg_of(v)));
    }
    for (int v = 0; v < N; ++v)
      if (out_tail[v] >= 0 && sm.joiner[v]) F[out_tail[v]] = 1;
    f = forest_from_parents(w, pe);
    build_hl_rooted(w, f);
  }
  return f;
}

// Rerooting a tree that already has an HL: ancestors of c reverse.
inline Forest reroot(Network& w, const Forest& f, int c) {
  Phase ph(w.ledger, "reroot");
  const int N = w.n();
  RoundSpec s;
  s.contract = [&](int e) { return f.is_tree_edge(w, e); };
  s.input = [&](int v) { return v == c ? encode_hl(f.info[v]) : Message{}; };
  auto res = w.round(s);
  std::vector<char> anc(N, 0);
  for (int v = 0; v < N; ++v)
    if (!res.y_of(v).empty()) anc[v] = is_ancestor(f.info[v], decode_hl(res.y_of(v)));
  RoundSpec s2;
  s2.input = [&](int v) { return enc_i(anc[v]); };
  s2.edge = [&](int e, const Message& ya, const Message& yb, Message& za, Message& zb) {
    const auto& ed = w.edge(e);
    if (f.parent_edge[ed.b] == e && dec_i(yb)) za = enc_i(e);
    if (f.parent_edge[ed.a] == e && dec_i(ya)) zb = enc_i(e);
  };
  s2.aggregate = ops::min();
  auto res2 = w.round(s2);
  std::vector<int> pe = f.parent_edge;
  for (int v = 0; v < N; ++v) {
    if (!anc[v]) continue;
    pe[v] = v == c ? -1 : static_cast<int>(dec_i(res2.agg_of(v)));
  }
  Forest g = forest_from_parents(w, pe);
  build_hl_rooted(w, g);
  return g;
}

// ---------- centroid ----------

inline int find_centroid(Network& w, const Forest& f) {
  Phase ph(w.ledger, "find-centroid");
  const int N = w.n();
  std::vector<Message> one(N, enc_i(1));
  auto sz = hl_subtree_sum(w, f, one, ops::sum());
  std::int64_t total = global_max(w, [&](int v) { return dec_i(sz[v]); });
  RoundSpec s;
  s.input = [&](int v) { return sz[v]; };
  s.edge = [&](int e, const Message& ya, const Message& yb, Message& za, Message& zb) {
    const auto& ed = w.edge(e);
    if (f.parent_edge[ed.b] == e) za = yb;
    if (f.parent_edge[ed.a] == e) zb = ya;
  };
  s.aggregate = ops::max();
  auto res = w.round(s);
  RoundSpec s2;
  s2.contract_all = true;
  s2.consensus = ops::min();
  s2.input = [&](int v) {
    std::int64_t mc = res.agg_of(v).empty() ? 0 : dec_i(res.agg_of(v));
    std::int64_t big = std::max(mc, total - dec_i(sz[v]));
    return 2 * big <= total ? enc_i(static_cast<std::int64_t>(w.id(v))) : Message{};
  };
  auto r2 = w.round(s2);
  return w.index_of(static_cast<NodeId>(dec_i(r2.y[0])));
}

}  // namespace minoragg
