#pragma once

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <vector>

#include "tree.hpp"

namespace minoragg {

inline constexpr int kPathBaseCase = 10;     // fixed-edge sweeps below this path length
inline constexpr std::size_t kInterestH = 4;  // heavy-hitter capacity for interest lists
// rounds(solve_two_respecting) <= C log2^6 n, calibrated at n = 2^8..2^12
inline constexpr double kRoundEnvelopeC = 2.0;

namespace detail {

inline std::int64_t dec_i0(const Message& m) { return m.empty() ? 0 : dec_i(m); }

inline Message enc_vec(const std::vector<std::int64_t>& xs) {
  Writer w;
  for (auto x : xs) w.i(x);
  return std::move(w).str();
}

// Componentwise sum; the shorter tuple is padded with zeros.
inline OpPtr vec_sum() {
  static OpPtr p = ops::make("vec-sum", "", [](const Message& a, const Message& b) {
    auto x = dec_tuple(a), y = dec_tuple(b);
    if (x.size() < y.size()) std::swap(x, y);
    for (std::size_t i = 0; i < y.size(); ++i) x[i] += y[i];
    return enc_vec(x);
  });
  return p;
}

// Lexicographic min over the whole (connected) world, one round.
inline std::vector<std::int64_t> global_min(Network& w, const std::function<Message(int)>& in) {
  RoundSpec s;
  s.contract_all = true;
  s.consensus = ops::tuple_min();
  s.input = in;
  auto r = w.round(s);
  if (r.y.empty() || r.y[0].empty()) return {};
  return dec_tuple(r.y[0]);
}

// One node's value to everyone.
inline Message broadcast(Network& w, int from, const Message& m) {
  RoundSpec s;
  s.contract_all = true;
  s.input = [&](int v) { return v == from ? m : Message{}; };
  auto r = w.round(s);
  return r.y_of(from);
}

inline long tree_ref(const Network& w, const Forest& f, int v) { return w.edge(f.parent_edge[v]).ref; }

// Finds the world edge child-parent carrying ref (ref < 0: the merged
// synthetic edge).
inline int find_edge(const Network& w, int child, int parent, long ref) {
  for (int e : w.inc(child))
    if (w.other(e, child) == parent && (ref >= 0 ? w.edge(e).ref == ref : w.edge(e).ref < 0)) return e;
  throw InputViolation("tree edge missing from derived world");
}

}  // namespace detail

// ---------- stars and their HL ----------

// HL of a tree made of a root and descending paths, in two rounds: every
// path learns its length and top, then the root keeps the longest path
// (ties to the smaller top id) as its heavy child.
inline Forest star_forest(Network& w, std::vector<int> parent_edge) {
  Forest f = forest_from_parents(w, std::move(parent_edge));
  const int N = w.n();
  int root = -1;
  std::vector<std::vector<int>> kids(N);
  for (int v = 0; v < N; ++v) {
    if (f.parent_edge[v] < 0) {
      if (root >= 0) throw InputViolation("star needs a single root");
      root = v;
    } else {
      kids[f.parent(w, v)].push_back(v);
    }
  }
  if (root < 0) throw InputViolation("star needs a root");
  std::vector<int> pos(N, 0), top(N, -1);
  for (int c : kids[root]) {
    int x = c, k = 1;
    while (true) {
      pos[x] = k++;
      top[x] = c;
      if (kids[x].empty()) break;
      if (kids[x].size() > 1) throw InputViolation("tree is not a star");
      x = kids[x][0];
    }
  }
  for (int v = 0; v < N; ++v)
    if (v != root && top[v] < 0) throw InputViolation("tree does not span the world");

  RoundSpec s1;
  s1.contract = [&](int e) { return f.is_tree_edge(w, e) && f.parent(w, f.lower(w, e)) != root; };
  auto po = ops::pair(ops::max(), ops::min());
  s1.consensus = po;
  s1.input = [&](int v) {
    if (v == root) return po->identity;
    return enc_pair(enc_i(pos[v]), pos[v] == 1 ? enc_i(static_cast<std::int64_t>(w.id(v))) : Message{});
  };
  auto r1 = w.round(s1);
  std::vector<std::int64_t> len(N, 0);
  std::vector<NodeId> topid(N, 0);
  for (int v = 0; v < N; ++v) {
    if (v == root) continue;
    auto [a, b] = dec_pair(r1.y_of(v));
    len[v] = dec_i(a);
    topid[v] = static_cast<NodeId>(dec_i(b));
  }
  auto best = detail::global_min(w, [&](int v) {
    if (v == root || pos[v] != 1) return Message{};
    return enc_tuple({-len[v], static_cast<std::int64_t>(w.id(v))});
  });
  NodeId heavy_top = best.empty() ? 0 : static_cast<NodeId>(best[1]);

  f.heavy_edge.assign(N, -1);
  f.size.assign(N, 1);
  f.info.assign(N, {});
  for (int v = 0; v < N; ++v) {
    f.info[v].id = w.id(v);
    f.info[v].depth = pos[v];
    if (v == root) {
      f.size[v] = N;
      continue;
    }
    f.size[v] = len[v] - pos[v] + 1;
    if (!kids[v].empty()) f.heavy_edge[v] = f.parent_edge[kids[v][0]];
    if (pos[v] == 1 && w.id(v) == heavy_top) f.heavy_edge[root] = f.parent_edge[v];
    if (topid[v] != heavy_top) f.info[v].light.push_back({w.id(root), topid[v], 0, 1});
  }
  f.has_hl = true;
  return f;
}

// ---------- 1-respecting cuts ----------

// cut[v] = Cut(parent edge of v). A(y) is the weighted degree of y minus
// twice the weight of edges whose LCA is y; the subtree sum of A at x is the
// cut of x's parent edge. LCA corrections travel as keyed entries through a
// subtree sum that only keeps keys naming a light-edge upper endpoint on the
// node's root path, so entries stay O(log n).
inline std::vector<Weight> one_respecting_cuts(Network& w, const Forest& f) {
  if (!f.has_hl) throw InputViolation("1-respecting cuts need HL info");
  Phase ph(w.ledger, "1-respecting");
  const int N = w.n();
  auto po = ops::pair(ops::sum(), ops::assoc_sum());
  RoundSpec r1;
  r1.input = [&](int v) { return encode_hl(f.info[v]); };
  r1.edge = [&](int e, const Message& ya, const Message& yb, Message& za, Message& zb) {
    Weight wt = w.edge(e).w;
    if (wt == 0) return;
    HLInfo ha = decode_hl(ya), hb = decode_hl(yb);
    auto [l, dl] = lca_from_hl(ha, hb);
    std::int64_t sa = wt, sb = wt;
    KV ka, kb;
    if (l == ha.id) {
      sa -= 2 * wt;
    } else if (l == hb.id) {
      sb -= 2 * wt;
    } else {
      auto light_below = [&](const HLInfo& h) {
        return std::any_of(h.light.begin(), h.light.end(), [&](const LightRec& r) { return r.upper == l; });
      };
      (light_below(ha) ? ka : kb).push_back({l, -2 * wt});
    }
    za = enc_pair(enc_i(sa), enc_kv(ka));
    zb = enc_pair(enc_i(sb), enc_kv(kb));
  };
  r1.aggregate = po;
  auto res = w.round(r1);
  std::vector<std::int64_t> scal(N, 0);
  std::vector<Message> kv(N);
  for (int v = 0; v < N; ++v) {
    const Message& m = res.agg_of(v);
    if (m == po->identity) continue;
    auto [a, b] = dec_pair(m);
    scal[v] = detail::dec_i0(a);
    kv[v] = b;
  }
  auto restrict = [&](int v, const Message& m) {
    if (m.empty()) return m;
    KV out;
    for (auto& [k, val] : dec_kv(m)) {
      bool keep = k == w.id(v);
      for (auto& r : f.info[v].light) keep = keep || r.upper == k;
      if (keep) out.push_back({k, val});
    }
    return enc_kv(out);
  };
  auto M = hl_subtree_sum(w, f, kv, ops::assoc_sum(), restrict);
  std::vector<Message> A(N);
  for (int v = 0; v < N; ++v) {
    std::int64_t a = scal[v];
    for (auto& [k, val] : dec_kv(M[v]))
      if (k == w.id(v)) a += val;
    A[v] = enc_i(a);
  }
  auto S = hl_subtree_sum(w, f, A, ops::sum());
  std::vector<Weight> cut(N, 0);
  for (int v = 0; v < N; ++v)
    if (f.parent_edge[v] >= 0) cut[v] = detail::dec_i0(S[v]);
  return cut;
}

// Minimum over the parent edges of the eligible nodes, one round.
inline CutResult best_one_respecting(Network& w, const Forest& f, const std::vector<Weight>& cut,
                                     const std::function<bool(int)>& eligible) {
  auto t = detail::global_min(w, [&](int v) {
    if (f.parent_edge[v] < 0 || !eligible(v) || detail::tree_ref(w, f, v) < 0) return Message{};
    return enc_tuple({cut[v], detail::tree_ref(w, f, v)});
  });
  if (t.empty()) return {};
  return CutResult::one(t[0], static_cast<int>(t[1]));
}

// ---------- path-to-path ----------

// Root r with two descending paths. P[0] = top(P) hangs from r; edge e_i
// (i >= 1) is the parent edge of P[i]. The edges from r to the tops are not
// part of E(P), E(Q).
struct PathToPathInstance {
  Network* g = nullptr;
  Forest f;
  int r = -1;
  std::vector<int> P, Q;
  int lp() const { return static_cast<int>(P.size()) - 1; }
  int lq() const { return static_cast<int>(Q.size()) - 1; }
};

inline PathToPathInstance path_to_path_from_parents(Network& w, std::vector<int> parent_edge) {
  PathToPathInstance in;
  in.g = &w;
  in.f = star_forest(w, std::move(parent_edge));
  for (int v = 0; v < w.n(); ++v)
    if (in.f.parent_edge[v] < 0) in.r = v;
  std::vector<int> tops;
  for (int v = 0; v < w.n(); ++v)
    if (in.f.parent(w, v) == in.r) tops.push_back(v);
  if (tops.size() != 2) throw InputViolation("path-to-path instance needs exactly two paths");
  for (int k = 0; k < 2; ++k) {
    auto& X = k ? in.Q : in.P;
    int x = tops[k];
    while (true) {
      X.push_back(x);
      if (in.f.heavy_edge[x] < 0) break;
      x = w.other(in.f.heavy_edge[x], x);
    }
  }
  return in;
}

namespace detail {

// side 0 fixes edges of P and reports over Q, side 1 the reverse.
struct Sides {
  const std::vector<int>& A;
  const std::vector<int>& B;
};
inline Sides sides(const PathToPathInstance& in, int side) { return side == 0 ? Sides{in.P, in.Q} : Sides{in.Q, in.P}; }

inline PathLayout layout_of(const Network& w, const Forest& f, const std::vector<std::vector<int>>& paths) {
  PathLayout L;
  L.index.assign(w.n(), -1);
  L.next_edge.assign(w.n(), -1);
  L.prev_edge.assign(w.n(), -1);
  for (auto& p : paths)
    for (std::size_t i = 0; i < p.size(); ++i) {
      L.index[p[i]] = static_cast<int>(i);
      if (i > 0) L.prev_edge[p[i]] = f.parent_edge[p[i]];
      if (i + 1 < p.size()) L.next_edge[p[i]] = f.parent_edge[p[i + 1]];
    }
  return L;
}

}  // namespace detail

// Cov(e_{fixed[t]}, b_j) for every fixed edge of side A and every edge of
// side B: cross edges whose A endpoint lies below the fixed edge credit
// their B endpoint, then suffix sums run along B. Several fixed edges share
// the rounds as a tuple.
inline std::vector<std::vector<Weight>> cov_fixed_batch(PathToPathInstance& in, int side, const std::vector<int>& fixed) {
  Network& w = *in.g;
  auto [A, B] = detail::sides(in, side);
  const int la = static_cast<int>(A.size()) - 1;
  for (int i : fixed)
    if (i < 1 || i > la) throw InputViolation("fixed edge is not on the path");
  const int N = w.n();
  std::vector<int> lab(N, 0), idx(N, -1);
  for (std::size_t i = 0; i < A.size(); ++i) lab[A[i]] = 1, idx[A[i]] = static_cast<int>(i);
  for (std::size_t i = 0; i < B.size(); ++i) lab[B[i]] = 2, idx[B[i]] = static_cast<int>(i);
  const std::size_t T = fixed.size();
  RoundSpec s;
  s.input = [&](int v) { return enc_tuple({lab[v], idx[v]}); };
  s.edge = [&](int e, const Message& ya, const Message& yb, Message& za, Message& zb) {
    auto ta = dec_tuple(ya), tb = dec_tuple(yb);
    Weight wt = w.edge(e).w;
    auto credit = [&](std::int64_t x, Message& z) {
      std::vector<std::int64_t> v(T, 0);
      bool any = false;
      for (std::size_t t = 0; t < T; ++t)
        if (x >= fixed[t]) v[t] = wt, any = true;
      if (any) z = detail::enc_vec(v);
    };
    if (ta[0] == 1 && tb[0] == 2) credit(ta[1], zb);
    if (tb[0] == 1 && ta[0] == 2) credit(tb[1], za);
  };
  s.aggregate = detail::vec_sum();
  auto r = w.round(s);
  std::vector<Message> x(N);
  for (int v : B) x[v] = r.agg_of(v);
  auto L = detail::layout_of(w, in.f, {B});
  auto ps = path_prefix_suffix(w, L, x, detail::vec_sum(), false, true);
  std::vector<std::vector<Weight>> out(T, std::vector<Weight>(B.size(), 0));
  for (std::size_t j = 0; j < B.size(); ++j) {
    auto v = dec_tuple(ps.suffix[B[j]]);
    for (std::size_t t = 0; t < T && t < v.size(); ++t) out[t][j] = v[t];
  }
  return out;
}

// Cov(e_fix, f_j) for j = 0..|Q| (entry 0 unused).
inline std::vector<Weight> cov_fixed_edge(PathToPathInstance& in, int e_fix) { return cov_fixed_batch(in, 0, {e_fix})[0]; }

// Separable: no cross edge avoids {r, top(P), bottom(P), top(Q), bottom(Q)}.
// Two rounds: edges flag themselves, then a global OR.
inline bool is_separable(PathToPathInstance& in) {
  Network& w = *in.g;
  std::vector<int> lab(w.n(), 0);
  for (std::size_t i = 1; i + 1 < in.P.size(); ++i) lab[in.P[i]] = 1;
  for (std::size_t i = 1; i + 1 < in.Q.size(); ++i) lab[in.Q[i]] = 2;
  RoundSpec s;
  s.input = [&](int v) { return enc_i(lab[v]); };
  s.edge = [&](int, const Message& ya, const Message& yb, Message& za, Message&) {
    if (dec_i(ya) * dec_i(yb) == 2) za = enc_i(1);
  };
  s.aggregate = ops::max();
  auto r = w.round(s);
  return global_max(w, [&](int v) { return detail::dec_i0(r.agg_of(v)); }) == 0;
}

namespace detail {

// Cut(e_i, f_j) = F_P(i) + F_Q(j) once only D-incident cross edges remain.
inline CutResult separable_core(PathToPathInstance& in, const std::vector<Weight>& cut) {
  Network& w = *in.g;
  const int L = in.lp(), M = in.lq();
  if (L < 1 || M < 1) return {};
  const int N = w.n();
  std::vector<int> lab(N, 0), idx(N, -1);
  for (int i = 0; i <= L; ++i) lab[in.P[i]] = 1, idx[in.P[i]] = i;
  for (int j = 0; j <= M; ++j) lab[in.Q[j]] = 2, idx[in.Q[j]] = j;
  RoundSpec s;
  s.input = [&](int v) { return enc_tuple({lab[v], idx[v]}); };
  s.edge = [&](int e, const Message& ya, const Message& yb, Message& za, Message& zb) {
    auto ta = dec_tuple(ya), tb = dec_tuple(yb);
    if (ta[0] + tb[0] != 3) return;
    bool a_on_p = ta[0] == 1;
    std::int64_t x = a_on_p ? ta[1] : tb[1], y = a_on_p ? tb[1] : ta[1];
    Message& zp = a_on_p ? za : zb;
    Message& zq = a_on_p ? zb : za;
    // bottom(P) edges depend on f only, bottom(Q) edges on e only
    if (x == L) zq = enc_i(w.edge(e).w);
    else if (y == M) zp = enc_i(w.edge(e).w);
  };
  s.aggregate = ops::sum();
  auto r = w.round(s);
  std::vector<Message> x(N);
  for (int v = 0; v < N; ++v)
    if (lab[v]) x[v] = r.agg_of(v);
  auto Lay = layout_of(w, in.f, {in.P, in.Q});
  auto ps = path_prefix_suffix(w, Lay, x, ops::sum(), false, true);
  auto po = ops::pair(ops::tuple_min(), ops::tuple_min());
  RoundSpec g;
  g.contract_all = true;
  g.consensus = po;
  g.input = [&](int v) {
    if (!lab[v] || idx[v] < 1) return po->identity;
    Message t = enc_tuple({cut[v] - 2 * dec_i0(ps.suffix[v]), tree_ref(w, in.f, v)});
    return lab[v] == 1 ? enc_pair(t, Message{}) : enc_pair(Message{}, t);
  };
  auto gr = w.round(g);
  auto [mp, mq] = dec_pair(gr.y[0]);
  auto tp = dec_tuple(mp), tq = dec_tuple(mq);
  return CutResult::two(tp[0] + tq[0], static_cast<int>(tp[1]), static_cast<int>(tq[1]));
}

}  // namespace detail

inline CutResult solve_separable(PathToPathInstance& in) {
  Phase ph(in.g->ledger, "path-to-path");
  if (!is_separable(in)) throw InputViolation("instance is not separable");
  auto cut = one_respecting_cuts(*in.g, in.f);
  return detail::separable_core(in, cut);
}

namespace detail {

// Fixed-edge sweep over every edge of the shorter side.
inline CutResult base_sweep(PathToPathInstance& in, const std::vector<Weight>& cut) {
  Network& w = *in.g;
  int side = in.lp() <= in.lq() ? 0 : 1;
  auto [A, B] = sides(in, side);
  std::vector<int> fixed;
  for (std::size_t i = 1; i < A.size(); ++i) fixed.push_back(static_cast<int>(i));
  auto cov = cov_fixed_batch(in, side, fixed);
  // the fixed edges' own cuts and refs reach everyone
  RoundSpec s;
  s.contract_all = true;
  s.consensus = ops::concat();
  s.input = [&](int v) {
    for (std::size_t i = 1; i < A.size(); ++i)
      if (A[i] == v) return Writer().i(static_cast<std::int64_t>(i)).i(cut[v]).i(tree_ref(w, in.f, v)).str();
    return Message{};
  };
  auto r = w.round(s);
  std::vector<std::int64_t> fc(A.size()), fr(A.size());
  Reader rd(r.y[0]);
  while (!rd.done()) {
    auto i = rd.i();
    fc[i] = rd.i();
    fr[i] = rd.i();
  }
  std::vector<int> jdx(w.n(), -1);
  for (std::size_t j = 1; j < B.size(); ++j) jdx[B[j]] = static_cast<int>(j);
  auto t = global_min(w, [&](int v) {
    int j = jdx[v];
    if (j < 0) return Message{};
    std::vector<std::int64_t> best;
    for (std::size_t k = 0; k < fixed.size(); ++k) {
      std::vector<std::int64_t> c{fc[fixed[k]] + cut[v] - 2 * cov[k][j], fr[fixed[k]], tree_ref(w, in.f, v)};
      if (best.empty() || c < best) best = c;
    }
    return enc_vec(best);
  });
  if (t.empty()) return {};
  return CutResult::two(t[0], static_cast<int>(t[1]), static_cast<int>(t[2]));
}

// Best response on side B to the fixed edge A[i]: (value, index, refs).
struct Response {
  Weight value;
  int index;
  CutResult cut;
};
inline Response best_response(PathToPathInstance& in, int side, int i, const std::vector<Weight>& cut) {
  Network& w = *in.g;
  auto [A, B] = sides(in, side);
  auto cov = cov_fixed_batch(in, side, {i})[0];
  Weight ce = dec_i(broadcast(w, A[i], enc_i(cut[A[i]])));
  std::vector<int> jdx(w.n(), -1);
  for (std::size_t j = 1; j < B.size(); ++j) jdx[B[j]] = static_cast<int>(j);
  auto t = global_min(w, [&](int v) {
    int j = jdx[v];
    if (j < 0) return Message{};
    return enc_tuple({ce + cut[v] - 2 * cov[j], j});
  });
  int j = static_cast<int>(t[1]);
  long ra = tree_ref(w, in.f, A[i]), rb = tree_ref(w, in.f, B[j]);
  return {t[0], j, CutResult::two(t[0], static_cast<int>(ra), static_cast<int>(rb))};
}

struct ChildSpec {
  std::unique_ptr<Network> net;
  std::vector<int> parent;  // per node of net
  std::vector<NodeId> P, Q;  // ids, top first
  NodeId r;
};

inline PathToPathInstance instance_of(ChildSpec& c) {
  Network& w = *c.net;
  PathToPathInstance in;
  in.g = &w;
  in.f = star_forest(w, c.parent);
  in.r = w.index_of(c.r);
  for (auto id : c.P) in.P.push_back(w.index_of(id));
  for (auto id : c.Q) in.Q.push_back(w.index_of(id));
  return in;
}

// Parent edges of a freshly built world from (child, parent, ref) triples.
inline std::vector<int> parents_in(const Network& w, const std::vector<std::tuple<NodeId, NodeId, long>>& tree) {
  std::vector<int> pe(w.n(), -1);
  for (auto [c, p, ref] : tree) {
    int ci = w.index_of(c), pi = w.index_of(p);
    pe[ci] = find_edge(w, ci, pi, ref);
  }
  return pe;
}

// G_up: everything from p_{a-1} down and from q_{b-1} down collapses into two
// virtual nodes; one round sums the weights each node sends into them.
inline ChildSpec build_up(PathToPathInstance& in, int a, int b) {
  Network& w = *in.g;
  const int N = w.n();
  std::vector<int> grp(N, -1);  // 0: lower P part, 1: lower Q part
  for (int i = a - 1; i <= in.lp(); ++i) grp[in.P[i]] = 0;
  for (int j = b - 1; j <= in.lq(); ++j) grp[in.Q[j]] = 1;
  // the tree edges entering the groups keep their identity
  const int ep = in.f.parent_edge[in.P[a - 1]], eq = in.f.parent_edge[in.Q[b - 1]];
  RoundSpec s;
  s.contract = [&](int e) {
    int x = grp[w.edge(e).a];
    return x >= 0 && x == grp[w.edge(e).b];
  };
  s.input = [&](int v) { return enc_i(grp[v]); };
  s.edge = [&](int e, const Message& ya, const Message& yb, Message& za, Message& zb) {
    if (e == ep || e == eq) return;
    auto ga = dec_i(ya), gb = dec_i(yb);
    Weight wt = w.edge(e).w;
    if (gb >= 0) za = enc_kv({{static_cast<std::uint64_t>(gb), wt}});
    if (ga >= 0) zb = enc_kv({{static_cast<std::uint64_t>(ga), wt}});
  };
  s.aggregate = ops::assoc_sum();
  auto r = w.round(s);
  ChildSpec c;
  NodeId sup[2] = {w.ctx->new_virtual_id(), w.ctx->new_virtual_id()};
  WorldBuilder bld;
  bld.node(sup[0], true);
  bld.node(sup[1], true);
  for (int v = 0; v < N; ++v)
    if (grp[v] < 0) bld.node(w.id(v), w.is_virtual(v));
  for (int e = 0; e < w.m(); ++e) {
    const auto& ed = w.edge(e);
    if (grp[ed.a] >= 0 || grp[ed.b] >= 0) continue;
    bool t = in.f.is_tree_edge(w, e);
    bld.edge(w.id(ed.a), w.id(ed.b), ed.w, t ? ed.ref : -1);
  }
  for (int v = 0; v < N; ++v) {
    int g = grp[v] < 0 ? -1 : grp[v];
    if (g >= 0 && r.sid(v) != w.id(v)) continue;  // one report per collapsed group
    for (auto& [k, wt] : dec_kv(r.agg_of(v))) {
      if (g >= 0 && static_cast<int>(k) == g) continue;
      if (g >= 0 && g > static_cast<int>(k)) continue;  // the sup-sup edge once
      bld.edge(g >= 0 ? sup[g] : w.id(v), sup[k], wt, -1);
    }
  }
  auto id_up = [&](int v) { return grp[v] >= 0 ? sup[grp[v]] : w.id(v); };
  for (int e : {ep, eq}) bld.edge(id_up(w.edge(e).a), id_up(w.edge(e).b), w.edge(e).w, w.edge(e).ref);
  std::vector<std::tuple<NodeId, NodeId, long>> tree;
  for (int k = 0; k < 2; ++k) {
    const auto& X = k ? in.Q : in.P;
    int cut_at = k ? b - 1 : a - 1;
    auto& ids = k ? c.Q : c.P;
    for (int i = 0; i <= cut_at; ++i) {
      ids.push_back(id_up(X[i]));
      NodeId par = i == 0 ? w.id(in.r) : id_up(X[i - 1]);
      long ref = w.edge(in.f.parent_edge[X[i]]).ref;
      tree.push_back({id_up(X[i]), par, ref});
    }
  }
  c.r = w.id(in.r);
  c.net = bld.build(w.ctx, &w.ledger, w.hidden_virtual());
  c.parent = parents_in(*c.net, tree);
  return c;
}

// Induced world on the given path pieces plus a virtual root carrying each
// node's weight to the rest of the world. Tree edges from the root to the
// tops exist only for orientation (weight 0, merged with the outside edge).
inline ChildSpec build_rooted_pair(Network& w, const Forest& f, const std::vector<int>& P, const std::vector<int>& Q,
                                   const std::vector<long>& top_ref, bool virtual_tops) {
  const int N = w.n();
  std::vector<char> in(N, 0);
  for (int v : P) in[v] = 1;
  for (int v : Q) in[v] = 1;
  RoundSpec s;
  s.input = [&](int v) { return enc_i(in[v]); };
  s.edge = [&](int e, const Message& ya, const Message& yb, Message& za, Message& zb) {
    bool ia = dec_i(ya), ib = dec_i(yb);
    if (ia && !ib) za = enc_i(w.edge(e).w);
    if (ib && !ia) zb = enc_i(w.edge(e).w);
  };
  s.aggregate = ops::sum();
  auto r = w.round(s);
  ChildSpec c;
  c.r = w.ctx->new_virtual_id();
  WorldBuilder bld;
  bld.node(c.r, true);
  for (int v = 0; v < N; ++v)
    if (in[v]) bld.node(w.id(v), w.is_virtual(v));
  for (int e = 0; e < w.m(); ++e) {
    const auto& ed = w.edge(e);
    if (!in[ed.a] || !in[ed.b]) continue;
    bld.edge(w.id(ed.a), w.id(ed.b), ed.w, f.is_tree_edge(w, e) ? ed.ref : -1);
  }
  for (int v = 0; v < N; ++v)
    if (in[v] && detail::dec_i0(r.agg_of(v)) > 0) bld.edge(w.id(v), c.r, dec_i(r.agg_of(v)), -1);
  std::vector<std::tuple<NodeId, NodeId, long>> tree;
  for (int k = 0; k < 2; ++k) {
    const auto& X = k ? Q : P;
    auto& ids = k ? c.Q : c.P;
    NodeId above = c.r;
    if (virtual_tops) {
      NodeId t = w.ctx->new_virtual_id();
      bld.node(t, true);
      bld.edge(c.r, t, 0, -1);
      tree.push_back({t, c.r, -1});
      ids.push_back(t);
      above = t;
    }
    for (std::size_t i = 0; i < X.size(); ++i) {
      ids.push_back(w.id(X[i]));
      if (i == 0) {
        bld.edge(above, w.id(X[0]), 0, virtual_tops ? top_ref[k] : -1);
        tree.push_back({w.id(X[0]), above, virtual_tops ? top_ref[k] : -1});
      } else {
        tree.push_back({w.id(X[i]), w.id(X[i - 1]), w.edge(f.parent_edge[X[i]]).ref});
      }
    }
  }
  c.net = bld.build(w.ctx, &w.ledger, w.hidden_virtual());
  c.parent = parents_in(*c.net, tree);
  return c;
}

}  // namespace detail

// Minimum over the 1-respecting cuts of E(P) u E(Q) and all pairs in
// E(P) x E(Q). Midpoint e_a, its best response f_b and the counter-response
// settle every pair touching e_a or f_b; by the Monge property an optimum
// sits in P_up x Q_up or P_down x Q_down, which recurse on cut-equivalent
// worlds in parallel.
inline CutResult solve_path_to_path(PathToPathInstance& in) {
  Network& w = *in.g;
  Phase ph(w.ledger, "path-to-path");
  const int L = in.lp(), M = in.lq();
  auto cut = one_respecting_cuts(w, in.f);
  std::vector<char> on(w.n(), 0);
  for (int i = 1; i <= L; ++i) on[in.P[i]] = 1;
  for (int j = 1; j <= M; ++j) on[in.Q[j]] = 1;
  CutResult best = best_one_respecting(w, in.f, cut, [&](int v) { return on[v] != 0; });
  if (L < 1 || M < 1) return best;
  if (L <= kPathBaseCase || M <= kPathBaseCase) {
    keep_min(best, detail::base_sweep(in, cut));
    return best;
  }
  if (is_separable(in)) {
    keep_min(best, detail::separable_core(in, cut));
    return best;
  }
  int a = L / 2;
  auto fb = detail::best_response(in, 0, a, cut);
  keep_min(best, fb.cut);
  int b = fb.index;
  auto ea = detail::best_response(in, 1, b, cut);
  keep_min(best, ea.cut);

  std::vector<detail::ChildSpec> kids;
  if (a > 1 && b > 1) kids.push_back(detail::build_up(in, a, b));
  if (a < L && b < M) {
    std::vector<int> P(in.P.begin() + a, in.P.end()), Q(in.Q.begin() + b, in.Q.end());
    kids.push_back(detail::build_rooted_pair(w, in.f, P, Q, {}, false));
  }
  std::vector<std::unique_ptr<Network>> nets;
  std::vector<PathToPathInstance> insts;
  for (auto& k : kids) insts.push_back(detail::instance_of(k));
  for (auto& k : kids) nets.push_back(std::move(k.net));
  std::vector<CutResult> res(insts.size());
  std::vector<std::function<void(Network&)>> algs;
  for (std::size_t i = 0; i < insts.size(); ++i)
    algs.push_back([&, i](Network&) { res[i] = solve_path_to_path(insts[i]); });
  run_worlds(w, nets, algs);
  for (auto& r : res) keep_min(best, r);
  return best;
}

// ---------- star instances ----------

// Root plus k descending paths. paths[i] lists the nodes top first; the edge
// from the root to the top belongs to E(P_i).
struct StarInstance {
  Network* g = nullptr;
  Forest f;
  int root = -1;
  std::vector<std::vector<int>> paths;
};

inline StarInstance star_from_parents(Network& w, std::vector<int> parent_edge) {
  StarInstance st;
  st.g = &w;
  st.f = star_forest(w, std::move(parent_edge));
  for (int v = 0; v < w.n(); ++v)
    if (st.f.parent_edge[v] < 0) st.root = v;
  for (int v = 0; v < w.n(); ++v) {
    if (st.f.parent(w, v) != st.root) continue;
    std::vector<int> p;
    for (int x = v;;) {
      p.push_back(x);
      if (st.f.heavy_edge[x] < 0) break;
      x = w.other(st.f.heavy_edge[x], x);
    }
    st.paths.push_back(std::move(p));
  }
  return st;
}

struct InterestLists {
  std::vector<NodeId> path_id;               // top node id per path
  std::vector<std::vector<NodeId>> lists;    // sorted ids of interesting paths
  bool overflow = false;
};

inline std::size_t interest_cap(const Context& ctx) {
  return ctx.cfg.interest_cap_factor *
         static_cast<std::size_t>(std::ceil(std::log2(static_cast<double>(std::max<std::size_t>(ctx.cfg.n_global, 2)))));
}

namespace detail {

inline std::vector<int> path_of(const StarInstance& st) {
  std::vector<int> pid(st.g->n(), -1);
  for (std::size_t i = 0; i < st.paths.size(); ++i)
    for (int v : st.paths[i]) pid[v] = static_cast<int>(i);
  return pid;
}

// Contract path edges; each node learns its path's id (top id).
inline std::vector<NodeId> learn_path_ids(StarInstance& st) {
  Network& w = *st.g;
  RoundSpec s;
  s.contract = [&](int e) { return st.f.is_tree_edge(w, e) && st.f.parent(w, st.f.lower(w, e)) != st.root; };
  s.consensus = ops::min();
  s.input = [&](int v) {
    return v != st.root && st.f.parent(w, v) == st.root ? enc_i(static_cast<std::int64_t>(w.id(v))) : Message{};
  };
  auto r = w.round(s);
  std::vector<NodeId> out(w.n(), 0);
  for (int v = 0; v < w.n(); ++v)
    if (v != st.root) out[v] = static_cast<NodeId>(dec_i(r.y_of(v)));
  return out;
}

}  // namespace detail

// Cross edges label each endpoint with the other endpoint's path; a
// heavy-hitter subtree sum (h = 4) at x then holds every path receiving more
// than half of the cross weight below x's parent edge, and only paths
// receiving more than a quarter. A union over each path finishes the list.
inline InterestLists compute_interest_lists(StarInstance& st) {
  Network& w = *st.g;
  Phase ph(w.ledger, "interest-lists");
  const int N = w.n();
  auto pid = detail::learn_path_ids(st);
  RoundSpec s;
  s.input = [&](int v) { return enc_u(pid[v]); };
  s.edge = [&](int e, const Message& ya, const Message& yb, Message& za, Message& zb) {
    auto a = dec_u(ya), b = dec_u(yb);
    if (!a || !b || a == b || w.edge(e).w <= 0) return;
    za = HeavyHitterSketch::single(kInterestH, b, w.edge(e).w).encode();
    zb = HeavyHitterSketch::single(kInterestH, a, w.edge(e).w).encode();
  };
  s.aggregate = ops::heavy_hitter(kInterestH);
  auto r = w.round(s);
  std::vector<Message> x(N);
  for (int v = 0; v < N; ++v)
    if (v != st.root) x[v] = r.agg_of(v);
  auto sk = hl_subtree_sum(w, st.f, x, ops::heavy_hitter(kInterestH));
  const std::size_t cap = interest_cap(*w.ctx);
  RoundSpec u;
  u.contract = [&](int e) { return st.f.is_tree_edge(w, e) && st.f.parent(w, st.f.lower(w, e)) != st.root; };
  u.consensus = ops::bounded_union(cap);
  u.input = [&](int v) {
    if (v == st.root) return Message{};
    auto o = HeavyHitterSketch::decode(kInterestH, sk[v]).output();
    return enc_ids(o);
  };
  auto ur = w.round(u);
  InterestLists out;
  for (auto& p : st.paths) {
    out.path_id.push_back(w.id(p[0]));
    auto ids = dec_ids(ur.y_of(p[0]));
    if (ops::union_overflowed(ids)) {
      out.overflow = true;
      ids.pop_back();
      w.ctx->fidelity_failure("interest list longer than " + std::to_string(cap));
    }
    out.lists.emplace_back(ids.begin(), ids.end());
  }
  return out;
}

namespace detail {

inline bool has_color(const std::vector<std::uint64_t>& m, int c) {
  return static_cast<std::size_t>(c / 64) < m.size() && (m[c / 64] >> (c % 64) & 1);
}
inline void set_color(std::vector<std::uint64_t>& m, int c) {
  if (m.size() <= static_cast<std::size_t>(c / 64)) m.resize(c / 64 + 1, 0);
  m[c / 64] |= 1ull << (c % 64);
}

}  // namespace detail

// Proper edge coloring with at most 2*Delta - 1 colors. Edges point to the
// larger id; a node's j-th out-edge goes to forest j, so each forest has out
// degree one. Forests are 3-colored (Cole-Vishkin, in parallel), then for
// each forest and each node color the parents pick colors for the edges of
// their children of that color, avoiding both endpoints' used colors.
inline std::vector<int> edge_coloring(Network& I) {
  const int N = I.n();
  std::vector<std::vector<int>> outs(N);
  for (int v = 0; v < N; ++v) {
    for (int e : I.inc(v))
      if (I.id(I.other(e, v)) > I.id(v)) outs[v].push_back(e);
    std::sort(outs[v].begin(), outs[v].end(), [&](int x, int y) { return I.id(I.other(x, v)) < I.id(I.other(y, v)); });
  }
  std::size_t D = 0;
  for (auto& o : outs) D = std::max(D, o.size());
  std::vector<std::vector<int>> cv(D);
  {
    RoundLedger saved = I.ledger;
    std::vector<RoundLedger> parts;
    for (std::size_t j = 0; j < D; ++j) {
      I.ledger = saved.child();
      std::vector<int> out(N, -1);
      for (int v = 0; v < N; ++v)
        if (outs[v].size() > j) out[v] = outs[v][j];
      cv[j] = detail::three_color(I, out);
      parts.push_back(I.ledger);
    }
    I.ledger = saved;
    std::vector<const RoundLedger*> ps;
    for (auto& p : parts) ps.push_back(&p);
    I.ledger.absorb_max(ps);
  }
  std::vector<int> color(I.m(), -1);
  std::vector<std::vector<std::uint64_t>> used(N);
  auto enc_mask = [](const std::vector<std::uint64_t>& m) { return enc_ids(m); };
  for (std::size_t j = 0; j < D; ++j)
    for (int c = 0; c < 3; ++c) {
      auto active = [&](int v) { return outs[v].size() > j && cv[j][v] == c; };
      RoundSpec a;
      a.input = [&](int v) { return active(v) ? enc_mask(used[v]) : Message{}; };
      a.edge = [&](int e, const Message& ya, const Message& yb, Message& za, Message& zb) {
        const auto& ed = I.edge(e);
        if (active(ed.a) && outs[ed.a][j] == e) zb = Writer().u(I.id(ed.a)).raw(ya).str();
        if (active(ed.b) && outs[ed.b][j] == e) za = Writer().u(I.id(ed.b)).raw(yb).str();
      };
      a.aggregate = ops::concat();
      auto ra = I.round(a);
      std::vector<Message> assign(N);
      for (int p = 0; p < N; ++p) {
        Reader rd(ra.agg_of(p));
        Writer out;
        while (!rd.done()) {
          NodeId child = rd.u();
          auto mask = dec_ids(rd.raw());
          int col = 0;
          while (detail::has_color(used[p], col) || detail::has_color(mask, col)) ++col;
          detail::set_color(used[p], col);
          out.u(child).u(static_cast<std::uint64_t>(col));
        }
        assign[p] = std::move(out).str();
      }
      RoundSpec b;
      b.input = [&](int v) { return assign[v]; };
      b.edge = [&](int e, const Message& ya, const Message& yb, Message& za, Message& zb) {
        const auto& ed = I.edge(e);
        auto pick = [&](const Message& y, NodeId child, Message& z) {
          Reader rd(y);
          while (!rd.done()) {
            NodeId ch = rd.u();
            auto col = rd.u();
            if (ch == child) z = enc_u(col);
          }
        };
        if (active(ed.a) && outs[ed.a][j] == e) pick(yb, I.id(ed.a), za);
        if (active(ed.b) && outs[ed.b][j] == e) pick(ya, I.id(ed.b), zb);
      };
      auto rb = I.round(b);
      for (int v = 0; v < N; ++v)
        if (active(v) && !rb.agg_of(v).empty()) {
          int col = static_cast<int>(dec_u(rb.agg_of(v)));
          detail::set_color(used[v], col);
          color[outs[v][j]] = col;
        }
    }
  return color;
}

namespace detail {

// The interest graph as its own world: one node per path, an edge per
// mutually interested pair. Built by one round on the star in which every
// cross edge compares its endpoints' lists.
inline std::unique_ptr<Network> interest_world(StarInstance& st, const InterestLists& il) {
  Network& w = *st.g;
  auto pid = learn_path_ids(st);
  std::map<NodeId, std::size_t> at;
  for (std::size_t i = 0; i < il.path_id.size(); ++i) at[il.path_id[i]] = i;
  RoundSpec s;
  s.input = [&](int v) {
    if (v == st.root) return Message{};
    const auto& l = il.lists[at[pid[v]]];
    return Writer().u(pid[v]).raw(enc_ids({l.begin(), l.end()})).str();
  };
  std::set<std::pair<NodeId, NodeId>> mutual;
  s.edge = [&](int, const Message& ya, const Message& yb, Message& za, Message&) {
    if (ya.empty() || yb.empty()) return;
    Reader ra(ya), rb(yb);
    NodeId a = ra.u(), b = rb.u();
    if (a == b) return;
    auto la = dec_ids(ra.raw()), lb = dec_ids(rb.raw());
    if (std::binary_search(la.begin(), la.end(), b) && std::binary_search(lb.begin(), lb.end(), a))
      za = enc_ids({std::min(a, b), std::max(a, b)});
  };
  s.aggregate = ops::bounded_union(2 * interest_cap(*w.ctx) + 2);
  auto r = w.round(s);
  WorldBuilder b;
  for (auto id : il.path_id) b.node(id, false);
  // each node learned the pairs of its incident cross edges
  for (int v = 0; v < w.n(); ++v) {
    auto ids = dec_ids(r.agg_of(v));
    if (ops::union_overflowed(ids)) ids.pop_back();
    for (std::size_t k = 0; k + 1 < ids.size(); k += 2) mutual.insert({ids[k], ids[k + 1]});
  }
  for (auto [a, c] : mutual) b.edge(a, c, 1, -2);
  return b.build(w.ctx, &w.ledger);
}

}  // namespace detail

// Minimum over 1-respecting cuts (optional) and pairs on different paths.
// Only mutually interested pairs can beat every 1-respecting cut; an edge
// coloring of the interest graph schedules them as disjoint path-to-path
// instances, one color class at a time.
inline CutResult solve_star(StarInstance& st, bool with_one_respecting = true) {
  Network& w = *st.g;
  Phase ph(w.ledger, "star");
  CutResult best;
  if (with_one_respecting) {
    auto cut = one_respecting_cuts(w, st.f);
    best = best_one_respecting(w, st.f, cut, [&](int v) { return v != st.root; });
  }
  if (st.paths.size() < 2) return best;
  auto il = compute_interest_lists(st);
  auto I = detail::interest_world(st, il);
  if (I->m() == 0) {
    w.ledger.absorb(I->ledger);
    return best;
  }
  auto color = edge_coloring(*I);
  w.ledger.absorb(I->ledger);
  int colors = color.empty() ? 0 : *std::max_element(color.begin(), color.end()) + 1;
  std::map<NodeId, std::size_t> at;
  for (std::size_t i = 0; i < il.path_id.size(); ++i) at[il.path_id[i]] = i;
  for (int c = 0; c < colors; ++c) {
    std::vector<std::unique_ptr<Network>> nets;
    std::vector<PathToPathInstance> insts;
    std::vector<detail::ChildSpec> kids;
    for (int e = 0; e < I->m(); ++e) {
      if (color[e] != c) continue;
      const auto& pi = st.paths[at[I->id(I->edge(e).a)]];
      const auto& pj = st.paths[at[I->id(I->edge(e).b)]];
      std::vector<long> refs{detail::tree_ref(w, st.f, pi[0]), detail::tree_ref(w, st.f, pj[0])};
      kids.push_back(detail::build_rooted_pair(w, st.f, pi, pj, refs, true));
    }
    for (auto& k : kids) insts.push_back(detail::instance_of(k));
    for (auto& k : kids) nets.push_back(std::move(k.net));
    std::vector<CutResult> res(insts.size());
    std::vector<std::function<void(Network&)>> algs;
    for (std::size_t i = 0; i < insts.size(); ++i)
      algs.push_back([&, i](Network&) { res[i] = solve_path_to_path(insts[i]); });
    run_worlds(w, nets, algs);
    for (auto& r : res) keep_min(best, r);
  }
  return best;
}

// ---------- subtree instances ----------

// One color assignment per bit of the largest id: assignment i colors id j
// by bit i, so any two distinct ids differ somewhere.
inline std::vector<std::vector<int>> pairwise_coloring(const std::vector<std::uint64_t>& ids) {
  std::uint64_t mx = 0;
  for (auto x : ids) mx = std::max(mx, x);
  int chi = static_cast<int>(std::bit_width(mx));
  std::vector<std::vector<int>> out(chi, std::vector<int>(ids.size()));
  for (int i = 0; i < chi; ++i)
    for (std::size_t j = 0; j < ids.size(); ++j) out[i][j] = static_cast<int>(ids[j] >> i & 1);
  return out;
}

// Root with k subtrees. Subtree j owns its edges and the edge e_j joining
// it to the root. For each color assignment and HL depths (d1, d2), every
// tree edge of a red subtree off depth d1 and of a blue subtree off depth d2
// is contracted, which leaves a star of depth-d1 and depth-d2 HL paths.
inline CutResult solve_subtree_instance(Network& w, const Forest& f, bool with_one_respecting = true) {
  if (!f.has_hl) throw InputViolation("subtree instance needs HL info");
  Phase ph(w.ledger, "subtree");
  const int N = w.n();
  int root = -1;
  for (int v = 0; v < N; ++v)
    if (f.parent_edge[v] < 0) root = v;
  CutResult best;
  if (with_one_respecting) {
    auto cut = one_respecting_cuts(w, f);
    best = best_one_respecting(w, f, cut, [](int) { return true; });
  }
  int k = 0;
  for (int v = 0; v < N; ++v) k += f.parent(w, v) == root;
  if (k < 2) return best;

  // subtree ids: minimum node id, one round with the subtree edges contracted
  RoundSpec s;
  s.contract = [&](int e) { return f.is_tree_edge(w, e) && f.parent(w, f.lower(w, e)) != root; };
  s.consensus = ops::min();
  s.input = [&](int v) { return v == root ? Message{} : enc_i(static_cast<std::int64_t>(w.id(v))); };
  auto r = w.round(s);
  std::vector<std::uint64_t> sid(N, 0);
  for (int v = 0; v < N; ++v)
    if (v != root) sid[v] = static_cast<std::uint64_t>(dec_i(r.y_of(v)));
  // bits on which the subtree ids differ, and the HL depths present per bit value
  std::int64_t any1 = global_max(w, [&](int v) { return v == root ? 0 : static_cast<std::int64_t>(sid[v]); });
  int chi = static_cast<int>(std::bit_width(static_cast<std::uint64_t>(any1)));
  auto edge_depth = [&](int v) { return f.info[v].hl_depth(); };
  RoundSpec dm;
  dm.contract_all = true;
  dm.consensus = ops::concat();
  auto pairs_op = ops::make("or-vec", "", [](const Message& a, const Message& b) {
    auto x = dec_ids(a), y = dec_ids(b);
    if (x.size() < y.size()) std::swap(x, y);
    for (std::size_t i = 0; i < y.size(); ++i) x[i] |= y[i];
    return enc_ids(x);
  });
  dm.consensus = pairs_op;
  dm.input = [&](int v) {
    if (v == root) return Message{};
    std::vector<std::uint64_t> m(2 * chi, 0);
    for (int i = 0; i < chi; ++i) m[2 * i + (sid[v] >> i & 1)] |= 1ull << edge_depth(v);
    return enc_ids(m);
  };
  auto dmr = w.round(dm);
  auto masks = dec_ids(dmr.y[0]);
  masks.resize(2 * chi, 0);

  for (int i = 0; i < chi; ++i) {
    std::uint64_t red = masks[2 * i + 1], blue = masks[2 * i];
    if (!red || !blue) continue;
    for (int d1 = 0; d1 < 64; ++d1) {
      if (!(red >> d1 & 1)) continue;
      for (int d2 = 0; d2 < 64; ++d2) {
        if (!(blue >> d2 & 1)) continue;
        std::vector<char> F(w.m(), 0);
        for (int v = 0; v < N; ++v) {
          if (v == root) continue;
          int want = (sid[v] >> i & 1) ? d1 : d2;
          if (edge_depth(v) != want) F[f.parent_edge[v]] = 1;
        }
        auto [mnet, mm] = materialize_minor(w, F);
        std::vector<int> pe(mnet->n(), -1);
        for (int v = 0; v < N; ++v)
          if (v != root && !F[f.parent_edge[v]]) pe[mm.comp[v]] = mm.edge_map[f.parent_edge[v]];
        auto st = star_from_parents(*mnet, pe);
        keep_min(best, solve_star(st, false));
        w.ledger.absorb(mnet->ledger);
      }
    }
  }
  return best;
}

// ---------- general 2-respecting cuts ----------

namespace detail {

// Tiny scopes: every pair and singleton in three rounds.
inline CutResult exhaustive_scope(Network& w, Forest f) {
  build_hl_rooted(w, f);
  const int N = w.n();
  RoundSpec s1;
  s1.contract_all = true;
  s1.consensus = ops::concat();
  s1.input = [&](int v) { return f.parent_edge[v] < 0 ? Message{} : Writer().raw(encode_hl(f.info[v])).i(tree_ref(w, f, v)).str(); };
  auto r1 = w.round(s1);
  std::vector<HLInfo> low;
  std::vector<long> ref;
  Reader rd(r1.y[0]);
  while (!rd.done()) {
    low.push_back(decode_hl(rd.raw()));
    ref.push_back(static_cast<long>(rd.i()));
  }
  const std::size_t K = low.size();
  RoundSpec s2;
  s2.input = [&](int v) { return encode_hl(f.info[v]); };
  s2.edge = [&](int e, const Message& ya, const Message& yb, Message& za, Message&) {
    HLInfo a = decode_hl(ya), b = decode_hl(yb);
    std::vector<char> cov(K);
    for (std::size_t i = 0; i < K; ++i) cov[i] = is_ancestor(low[i], a) != is_ancestor(low[i], b);
    std::vector<std::int64_t> out;
    for (std::size_t i = 0; i < K; ++i)
      for (std::size_t j = i; j < K; ++j) out.push_back((i == j ? cov[i] : cov[i] != cov[j]) ? w.edge(e).w : 0);
    za = enc_vec(out);
  };
  s2.aggregate = vec_sum();
  auto r2 = w.round(s2);
  RoundSpec s3;
  s3.contract_all = true;
  s3.consensus = vec_sum();
  s3.input = [&](int v) { return r2.agg_of(v); };
  auto r3 = w.round(s3);
  auto tot = dec_tuple(r3.y[0]);
  CutResult best;
  std::size_t t = 0;
  for (std::size_t i = 0; i < K; ++i)
    for (std::size_t j = i; j < K; ++j, ++t) {
      Weight val = t < tot.size() ? tot[t] : 0;
      if (ref[i] < 0 || ref[j] < 0) continue;
      keep_min(best, i == j ? CutResult::one(val, static_cast<int>(ref[i]))
                            : CutResult::two(val, static_cast<int>(ref[i]), static_cast<int>(ref[j])));
    }
  (void)N;
  return best;
}

struct ScopeSpec {
  std::unique_ptr<Network> net;
  std::vector<int> parent;
};

// H_i: T_i plus a virtual centroid copy c_i. Edges inside T_i stay, edges
// leaving T_i re-attach to c_i with their weight (summed per node), and e_i
// becomes the tree edge c_i - root_i.
inline std::vector<ScopeSpec> split_at_centroid(Network& w, const Forest& f, int c) {
  const int N = w.n();
  RoundSpec s1;
  s1.contract = [&](int e) { return f.is_tree_edge(w, e) && f.parent(w, f.lower(w, e)) != c; };
  s1.consensus = ops::min();
  s1.input = [&](int v) { return v == c ? Message{} : enc_i(static_cast<std::int64_t>(w.id(v))); };
  auto r1 = w.round(s1);
  std::vector<std::int64_t> lab(N, -1);
  for (int v = 0; v < N; ++v)
    if (v != c) lab[v] = dec_i(r1.y_of(v));
  RoundSpec s2;
  s2.input = [&](int v) { return enc_i(lab[v]); };
  s2.edge = [&](int e, const Message& ya, const Message& yb, Message& za, Message& zb) {
    if (ya == yb) return;
    const auto& ed = w.edge(e);
    if ((ed.a == c || ed.b == c) && f.is_tree_edge(w, e)) return;
    if (dec_i(ya) >= 0) za = enc_i(ed.w);
    if (dec_i(yb) >= 0) zb = enc_i(ed.w);
  };
  s2.aggregate = ops::sum();
  auto r2 = w.round(s2);
  std::map<std::int64_t, std::size_t> at;
  std::vector<int> tops;
  for (int v = 0; v < N; ++v)
    if (f.parent(w, v) == c) at[lab[v]] = tops.size(), tops.push_back(v);
  std::vector<WorldBuilder> bs(tops.size());
  std::vector<NodeId> ci(tops.size());
  for (std::size_t i = 0; i < tops.size(); ++i) {
    ci[i] = w.ctx->new_virtual_id();
    bs[i].node(ci[i], true);
  }
  for (int v = 0; v < N; ++v) {
    if (v == c) continue;
    auto& b = bs[at[lab[v]]];
    b.node(w.id(v), w.is_virtual(v));
    Weight sw = detail::dec_i0(r2.agg_of(v));
    if (sw > 0) b.edge(w.id(v), ci[at[lab[v]]], sw, -1);
  }
  for (int e = 0; e < w.m(); ++e) {
    const auto& ed = w.edge(e);
    if (ed.a == c || ed.b == c) continue;
    if (lab[ed.a] != lab[ed.b]) continue;
    bs[at[lab[ed.a]]].edge(w.id(ed.a), w.id(ed.b), ed.w, f.is_tree_edge(w, e) ? ed.ref : -1);
  }
  std::vector<ScopeSpec> out;
  for (std::size_t i = 0; i < tops.size(); ++i) {
    int t = tops[i];
    const auto& te = w.edge(f.parent_edge[t]);
    long tref = te.ref >= 0 ? te.ref : -2;
    bs[i].edge(ci[i], w.id(t), te.w, tref);
    ScopeSpec sc;
    sc.net = bs[i].build(w.ctx, &w.ledger);
    Network& h = *sc.net;
    sc.parent.assign(h.n(), -1);
    for (int v = 0; v < N; ++v) {
      if (v == c || at[lab[v]] != i) continue;
      int hv = h.index_of(w.id(v));
      if (v == t) {
        sc.parent[hv] = find_edge(h, hv, h.index_of(ci[i]), te.ref >= 0 ? te.ref : -1);
      } else {
        int p = f.parent(w, v);
        sc.parent[hv] = find_edge(h, hv, h.index_of(w.id(p)), w.edge(f.parent_edge[v]).ref);
      }
    }
    out.push_back(std::move(sc));
  }
  return out;
}

inline CutResult centroid_scope(Network& w, Forest f, int level) {
  Phase ph(w.ledger, "centroid-recursion");
  int real = 0;
  for (int v = 0; v < w.n(); ++v) real += !w.is_virtual(v);
  if (w.n() < 2) return {};
  if (real < 3) return exhaustive_scope(w, std::move(f));
  int cap = static_cast<int>(std::ceil(std::log2(static_cast<double>(std::max<std::size_t>(w.ctx->cfg.n_global, 2))))) + 1;
  if (level > cap) w.ctx->fidelity_failure("centroid recursion deeper than log2 n + 1");
  if (!f.has_hl) build_hl_rooted(w, f);
  int c = find_centroid(w, f);
  Forest fc = reroot(w, f, c);
  CutResult best = solve_subtree_instance(w, fc);
  auto scopes = split_at_centroid(w, fc, c);
  std::vector<std::unique_ptr<Network>> nets;
  std::vector<Forest> forests;
  for (auto& s : scopes) forests.push_back(forest_from_parents(*s.net, s.parent));
  for (auto& s : scopes) nets.push_back(std::move(s.net));
  std::vector<CutResult> res(nets.size());
  std::vector<std::function<void(Network&)>> algs;
  for (std::size_t i = 0; i < nets.size(); ++i)
    algs.push_back([&, i](Network& h) { res[i] = centroid_scope(h, std::move(forests[i]), level + 1); });
  run_worlds(w, nets, algs);
  for (auto& r : res) keep_min(best, r);
  return best;
}

}  // namespace detail

// Minimum over all singletons and pairs of tree edges: orient the tree, then
// recurse on centroids with cut-equivalent private scopes.
inline CutResult solve_two_respecting(Network& w, const std::vector<char>& tree_edge, int root = 0) {
  Forest f = orient_and_hl(w, tree_edge, root);
  return detail::centroid_scope(w, std::move(f), 0);
}

struct OneRespectingRun {
  CutResult cut;
  std::vector<Weight> per_edge;  // cut value per tree edge, in t.edges() order
  RoundLedger ledger;
};

inline OneRespectingRun solve_one_respecting(const WeightedGraph& g, const RootedTree& t, Config cfg = {}) {
  auto w = Network::from_graph(make_context(g, cfg), g);
  std::vector<char> te(w->m(), 0);
  for (int e : t.edges()) te[e] = 1;
  Forest f = orient_and_hl(*w, te, g.index(t.root()));
  auto cut = one_respecting_cuts(*w, f);
  OneRespectingRun run;
  run.cut = best_one_respecting(*w, f, cut, [](int) { return true; });
  for (int e : t.edges()) run.per_edge.push_back(cut[t.lower(e)]);
  if (run.cut.found()) run.cut.cut_edges = cut_edge_set(g, t, run.cut);
  run.ledger = w->ledger;
  return run;
}

struct TwoRespectingRun {
  CutResult cut;
  RoundLedger ledger;
  std::vector<std::string> fidelity;
};

inline TwoRespectingRun solve_two_respecting(const WeightedGraph& g, const RootedTree& t, Config cfg = {}) {
  auto w = Network::from_graph(make_context(g, cfg), g);
  std::vector<char> te(w->m(), 0);
  for (int e : t.edges()) te[e] = 1;
  TwoRespectingRun run;
  run.cut = solve_two_respecting(*w, te, g.index(t.root()));
  if (run.cut.found()) run.cut.cut_edges = cut_edge_set(g, t, run.cut);
  run.ledger = w->ledger;
  run.fidelity = w->ctx->fidelity;
  return run;
}

}  // namespace minoragg
