#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace minoragg {

using NodeId = std::uint64_t;
using Weight = std::int64_t;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InvalidTreeEdge : Error { using Error::Error; };
struct OracleLimitExceeded : Error { using Error::Error; };
struct ScopeNotConnected : Error { using Error::Error; };
struct SchedulingViolation : Error { using Error::Error; };
struct MustUseSeparableFallback : Error { using Error::Error; };
struct SamplingFailed : Error { using Error::Error; };
struct InputViolation : Error { using Error::Error; };
struct BudgetViolation : Error { using Error::Error; };
struct ParseError : Error {
  int line;
  ParseError(int l, const std::string& what)
      : Error("line " + std::to_string(l) + ": " + what), line(l) {}
};

struct Edge {
  NodeId u, v;
  Weight w;
};

// Undirected multigraph. Node ids are kept sorted; edges keep insertion order.
class WeightedGraph {
 public:
  WeightedGraph() = default;
  WeightedGraph(std::vector<NodeId> nodes, std::vector<Edge> edges)
      : nodes_(std::move(nodes)), edges_(std::move(edges)) {
    std::sort(nodes_.begin(), nodes_.end());
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
      if (i && nodes_[i] == nodes_[i - 1]) throw InputViolation("duplicate node id " + std::to_string(nodes_[i]));
      index_[nodes_[i]] = static_cast<int>(i);
    }
    for (const auto& e : edges_) {
      if (!index_.count(e.u) || !index_.count(e.v)) throw InputViolation("edge endpoint not a node");
      if (e.u == e.v) throw InputViolation("self-loop at " + std::to_string(e.u));
      if (e.w < 1) throw InputViolation("non-positive weight");
    }
  }

  std::size_t n() const { return nodes_.size(); }
  std::size_t m() const { return edges_.size(); }
  const std::vector<NodeId>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(std::size_t i) const { return edges_[i]; }
  int index(NodeId id) const {
    auto it = index_.find(id);
    return it == index_.end() ? -1 : it->second;
  }
  bool has_node(NodeId id) const { return index_.count(id) > 0; }

  bool connected() const {
    if (nodes_.empty()) return true;
    std::vector<int> p(n());
    for (std::size_t i = 0; i < n(); ++i) p[i] = static_cast<int>(i);
    auto find = [&](int x) {
      while (p[x] != x) x = p[x] = p[p[x]];
      return x;
    };
    std::size_t comps = n();
    for (const auto& e : edges_) {
      int a = find(index(e.u)), b = find(index(e.v));
      if (a != b) p[a] = b, --comps;
    }
    return comps == 1;
  }

  // Weight bound 1 <= w <= n^C.
  void validate(double weight_exponent = 4.0) const {
    if (!connected()) throw InputViolation("graph is not connected");
    long double cap = std::pow(static_cast<long double>(std::max<std::size_t>(n(), 2)), static_cast<long double>(weight_exponent));
    for (const auto& e : edges_)
      if (static_cast<long double>(e.w) > cap) throw InputViolation("weight exceeds n^C");
  }

  Weight total_weight() const {
    Weight s = 0;
    for (const auto& e : edges_) s += e.w;
    return s;
  }

 private:
  std::vector<NodeId> nodes_;
  std::vector<Edge> edges_;
  std::unordered_map<NodeId, int> index_;
};

// Spanning tree given as a set of graph edge indices plus a root. The
// orientation (parent of each node) is derived, and every tree edge knows its
// lower endpoint.
class RootedTree {
 public:
  RootedTree() = default;
  RootedTree(const WeightedGraph& g, std::vector<int> tree_edges, NodeId root)
      : root_(root), edges_(std::move(tree_edges)) {
    const std::size_t n = g.n();
    if (g.index(root) < 0) throw InputViolation("root is not a node");
    if (edges_.size() + 1 != n) throw InputViolation("tree must have n-1 edges");
    std::vector<std::vector<std::pair<int, int>>> adj(n);
    for (int id : edges_) {
      if (id < 0 || static_cast<std::size_t>(id) >= g.m()) throw InvalidTreeEdge("tree edge index out of range");
      const Edge& e = g.edge(id);
      adj[g.index(e.u)].push_back({g.index(e.v), id});
      adj[g.index(e.v)].push_back({g.index(e.u), id});
    }
    parent_.assign(n, -1);
    parent_edge_.assign(n, -1);
    depth_.assign(n, 0);
    order_.clear();
    std::vector<char> seen(n, 0);
    int r = g.index(root);
    order_.push_back(r);
    seen[r] = 1;
    for (std::size_t h = 0; h < order_.size(); ++h) {
      int x = order_[h];
      for (auto [y, id] : adj[x]) {
        if (seen[y]) continue;
        seen[y] = 1;
        parent_[y] = x;
        parent_edge_[y] = id;
        depth_[y] = depth_[x] + 1;
        order_.push_back(y);
      }
    }
    if (order_.size() != n) throw InputViolation("tree edges do not span the graph");
    lower_.clear();
    for (std::size_t v = 0; v < n; ++v)
      if (parent_edge_[v] >= 0) lower_[parent_edge_[v]] = static_cast<int>(v);
    // Euler intervals for descendant tests.
    tin_.assign(n, 0);
    tout_.assign(n, 0);
    std::vector<std::vector<int>> kids(n);
    for (std::size_t v = 0; v < n; ++v)
      if (parent_[v] >= 0) kids[parent_[v]].push_back(static_cast<int>(v));
    int clock = 0;
    std::vector<std::pair<int, std::size_t>> st{{r, 0}};
    tin_[r] = clock++;
    while (!st.empty()) {
      auto& [x, i] = st.back();
      if (i < kids[x].size()) {
        int y = kids[x][i++];
        tin_[y] = clock++;
        st.push_back({y, 0});
      } else {
        tout_[x] = clock;
        st.pop_back();
      }
    }
  }

  NodeId root() const { return root_; }
  const std::vector<int>& edges() const { return edges_; }
  bool is_tree_edge(int id) const { return lower_.count(id) > 0; }
  // Local indices (graph.index order).
  int parent(int v) const { return parent_[v]; }
  int parent_edge(int v) const { return parent_edge_[v]; }
  int depth(int v) const { return depth_[v]; }
  int lower(int edge_id) const {
    auto it = lower_.find(edge_id);
    if (it == lower_.end()) throw InvalidTreeEdge("edge " + std::to_string(edge_id) + " is not a tree edge");
    return it->second;
  }
  bool in_subtree(int v, int top) const { return tin_[top] <= tin_[v] && tin_[v] < tout_[top]; }
  const std::vector<int>& bfs_order() const { return order_; }

 private:
  NodeId root_ = 0;
  std::vector<int> edges_;
  std::vector<int> parent_, parent_edge_, depth_, order_, tin_, tout_;
  std::map<int, int> lower_;
};

enum class CutKind { one_respecting, two_respecting };

struct CutResult {
  Weight value = std::numeric_limits<Weight>::max();
  CutKind kind = CutKind::one_respecting;
  std::vector<int> tree_edges;  // graph edge indices
  std::vector<int> cut_edges;

  bool found() const { return !tree_edges.empty(); }
  bool better_than(const CutResult& o) const {
    if (value != o.value) return value < o.value;
    return tree_edges < o.tree_edges && !tree_edges.empty();
  }
  static CutResult one(Weight v, int e) { return {v, CutKind::one_respecting, {e}, {}}; }
  static CutResult two(Weight v, int e, int f) {
    if (e > f) std::swap(e, f);
    return {v, CutKind::two_respecting, {e, f}, {}};
  }
};

inline void keep_min(CutResult& best, const CutResult& c) {
  if (c.found() && (!best.found() || c.better_than(best))) best = c;
}

// Tree path of (u,v) contains tree edge e iff exactly one endpoint is below e.
inline bool covers(const RootedTree& t, int a, int b, int low) {
  return t.in_subtree(a, low) != t.in_subtree(b, low);
}

inline Weight cut_value_pair(const WeightedGraph& g, const RootedTree& t, int e, int f = -1) {
  int le = t.lower(e);
  if (f == e) throw InvalidTreeEdge("pair operations need two distinct tree edges");
  int lf = f >= 0 ? t.lower(f) : -1;
  Weight s = 0;
  for (const auto& ed : g.edges()) {
    int a = g.index(ed.u), b = g.index(ed.v);
    bool ce = covers(t, a, b, le);
    bool cf = lf >= 0 && covers(t, a, b, lf);
    if (ce != cf) s += ed.w;
  }
  return s;
}

inline Weight cov_value_pair(const WeightedGraph& g, const RootedTree& t, int e, int f) {
  int le = t.lower(e), lf = t.lower(f);
  Weight s = 0;
  for (const auto& ed : g.edges()) {
    int a = g.index(ed.u), b = g.index(ed.v);
    if (covers(t, a, b, le) && covers(t, a, b, lf)) s += ed.w;
  }
  return s;
}

// Recomputes the cut edge set of a CutResult.
inline std::vector<int> cut_edge_set(const WeightedGraph& g, const RootedTree& t, const CutResult& r) {
  std::vector<int> out;
  for (std::size_t i = 0; i < g.m(); ++i) {
    int a = g.index(g.edge(i).u), b = g.index(g.edge(i).v);
    int k = 0;
    for (int e : r.tree_edges) k += covers(t, a, b, t.lower(e));
    if (k == 1) out.push_back(static_cast<int>(i));
  }
  return out;
}

// ---------- file format ----------

struct GraphFile {
  WeightedGraph graph;
  std::vector<std::pair<NodeId, NodeId>> tree_pairs;
  bool has_root = false;
  NodeId root = 0;

  bool has_tree() const { return !tree_pairs.empty(); }

  // Matches t-lines to graph edges (first unused edge with those endpoints).
  RootedTree tree() const {
    if (!has_root) throw InputViolation("tree given without an r line");
    std::map<std::pair<NodeId, NodeId>, std::vector<int>> by_pair;
    for (std::size_t i = 0; i < graph.m(); ++i) {
      auto [u, v, w] = graph.edge(i);
      by_pair[{std::min(u, v), std::max(u, v)}].push_back(static_cast<int>(i));
    }
    std::vector<int> ids;
    for (auto [u, v] : tree_pairs) {
      auto& lst = by_pair[{std::min(u, v), std::max(u, v)}];
      if (lst.empty()) throw InvalidTreeEdge("tree edge " + std::to_string(u) + "-" + std::to_string(v) + " is not a graph edge");
      ids.push_back(lst.front());
      lst.erase(lst.begin());
    }
    return RootedTree(graph, ids, root);
  }
};

inline GraphFile parse_graph(std::istream& in, double weight_exponent = 4.0) {
  GraphFile gf;
  std::string line;
  int lineno = 0;
  long long n_decl = -1, m_decl = -1;
  std::vector<Edge> edges;
  std::vector<NodeId> seen;
  auto num = [&](std::istringstream& ss, const char* what) {
    std::string tok;
    if (!(ss >> tok)) throw ParseError(lineno, std::string("missing ") + what);
    std::size_t pos = 0;
    unsigned long long v;
    try {
      if (!tok.empty() && tok[0] == '-') throw std::invalid_argument("neg");
      v = std::stoull(tok, &pos);
    } catch (const std::exception&) {
      throw ParseError(lineno, std::string("bad ") + what + " '" + tok + "'");
    }
    if (pos != tok.size()) throw ParseError(lineno, std::string("bad ") + what + " '" + tok + "'");
    return v;
  };
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    std::istringstream ss(line);
    std::string kind;
    if (!(ss >> kind)) continue;
    if (kind == "p") {
      if (n_decl >= 0) throw ParseError(lineno, "duplicate p line");
      n_decl = static_cast<long long>(num(ss, "n"));
      m_decl = static_cast<long long>(num(ss, "m"));
    } else if (kind == "e") {
      if (n_decl < 0) throw ParseError(lineno, "edge before p line");
      NodeId u = num(ss, "u"), v = num(ss, "v");
      auto w = num(ss, "weight");
      if (u == v) throw ParseError(lineno, "self-loop");
      if (w < 1) throw ParseError(lineno, "weight must be positive");
      if (w > static_cast<unsigned long long>(std::numeric_limits<Weight>::max() / 4)) throw ParseError(lineno, "weight too large");
      edges.push_back({u, v, static_cast<Weight>(w)});
      seen.push_back(u);
      seen.push_back(v);
    } else if (kind == "t") {
      NodeId u = num(ss, "u"), v = num(ss, "v");
      gf.tree_pairs.push_back({u, v});
    } else if (kind == "r") {
      if (gf.has_root) throw ParseError(lineno, "duplicate r line");
      gf.root = num(ss, "root");
      gf.has_root = true;
    } else {
      throw ParseError(lineno, "unknown line type '" + kind + "'");
    }
    std::string extra;
    if (ss >> extra) throw ParseError(lineno, "trailing token '" + extra + "'");
  }
  if (n_decl < 0) throw ParseError(lineno, "missing p line");
  if (static_cast<long long>(edges.size()) != m_decl)
    throw ParseError(lineno, "declared " + std::to_string(m_decl) + " edges, found " + std::to_string(edges.size()));
  std::sort(seen.begin(), seen.end());
  seen.erase(std::unique(seen.begin(), seen.end()), seen.end());
  if (static_cast<long long>(seen.size()) != n_decl)
    throw ParseError(lineno, "declared " + std::to_string(n_decl) + " nodes, found " + std::to_string(seen.size()));
  gf.graph = WeightedGraph(seen, edges);
  gf.graph.validate(weight_exponent);
  if (gf.has_root && !gf.graph.has_node(gf.root)) throw ParseError(lineno, "root is not a node");
  if (!gf.tree_pairs.empty() && !gf.has_root) throw ParseError(lineno, "t lines need an r line");
  return gf;
}

inline void write_graph(std::ostream& out, const WeightedGraph& g, const RootedTree* t = nullptr) {
  out << "p " << g.n() << " " << g.m() << "\n";
  for (const auto& e : g.edges()) out << "e " << e.u << " " << e.v << " " << e.w << "\n";
  if (t) {
    for (int id : t->edges()) out << "t " << g.edge(id).u << " " << g.edge(id).v << "\n";
    out << "r " << t->root() << "\n";
  }
}

}  // namespace minoragg
