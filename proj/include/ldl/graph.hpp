#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "ldl/rational.hpp"

namespace ldl {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Undirected simple graph with exact rational edge weights. Vertices are the
// dense ids 0..n-1. Immutable after construction; all algorithms share it
// read-only.
class Graph {
 public:
  struct Edge {
    int u;
    int v;
    Rational weight;
  };

  Graph() : n_(0), unit_(true) {}

  Graph(int n, std::vector<Edge> edges, bool unit_hint = false)
      : n_(n), edges_(std::move(edges)) {
    if (n_ < 0) throw std::invalid_argument("graph: negative vertex count");
    incident_.assign(n_, {});
    std::set<std::pair<int, int>> seen;
    unit_ = true;
    for (std::size_t i = 0; i < edges_.size(); ++i) {
      Edge& e = edges_[i];
      if (e.u > e.v) std::swap(e.u, e.v);
      if (e.u == e.v)
        throw std::invalid_argument("graph: self-loop at edge " +
                                    std::to_string(i));
      if (e.u < 0 || e.v >= n_)
        throw std::invalid_argument("graph: vertex id out of range at edge " +
                                    std::to_string(i));
      if (!seen.insert({e.u, e.v}).second)
        throw std::invalid_argument("graph: duplicate edge " +
                                    std::to_string(e.u) + "-" +
                                    std::to_string(e.v));
      if (!(e.weight > Rational(0)))
        throw std::invalid_argument("graph: nonpositive weight at edge " +
                                    std::to_string(i));
      if (e.weight != Rational(1)) unit_ = false;
      incident_[e.u].push_back(static_cast<int>(i));
      incident_[e.v].push_back(static_cast<int>(i));
    }
    (void)unit_hint;
  }

  int n() const { return n_; }
  int m() const { return static_cast<int>(edges_.size()); }
  bool unit_weight() const { return unit_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(int e) const { return edges_[e]; }
  const std::vector<int>& incident(int v) const { return incident_[v]; }
  int other_end(int e, int v) const {
    return edges_[e].u == v ? edges_[e].v : edges_[e].u;
  }

  Rational total_weight() const {
    Rational s(0);
    for (const Edge& e : edges_) s += e.weight;
    return s;
  }

  std::vector<int> bfs_depths(int source) const {
    std::vector<int> depth(n_, -1);
    std::deque<int> queue{source};
    depth[source] = 0;
    while (!queue.empty()) {
      int v = queue.front();
      queue.pop_front();
      for (int e : incident_[v]) {
        int w = other_end(e, v);
        if (depth[w] < 0) {
          depth[w] = depth[v] + 1;
          queue.push_back(w);
        }
      }
    }
    return depth;
  }

  // Connected components as vertex lists, ordered by smallest member id.
  std::vector<std::vector<int>> components() const {
    std::vector<std::vector<int>> comps;
    std::vector<char> seen(n_, 0);
    for (int s = 0; s < n_; ++s) {
      if (seen[s]) continue;
      std::vector<int> comp;
      std::deque<int> queue{s};
      seen[s] = 1;
      while (!queue.empty()) {
        int v = queue.front();
        queue.pop_front();
        comp.push_back(v);
        for (int e : incident_[v]) {
          int w = other_end(e, v);
          if (!seen[w]) {
            seen[w] = 1;
            queue.push_back(w);
          }
        }
      }
      std::sort(comp.begin(), comp.end());
      comps.push_back(std::move(comp));
    }
    return comps;
  }

  bool connected() const { return n_ <= 1 || components().size() == 1; }

 private:
  int n_;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> incident_;
  bool unit_;
};

// Vertex-induced subgraph, keeping references into the parent's id space.
struct Subgraph {
  const Graph* parent = nullptr;
  std::vector<int> vertices;   // sorted parent ids
  std::vector<int> edge_ids;   // parent edge indices, both endpoints inside

  bool contains(int v) const {
    return std::binary_search(vertices.begin(), vertices.end(), v);
  }

  // Standalone copy with dense ids 0..k-1 (position in `vertices`).
  Graph materialize() const {
    std::vector<Graph::Edge> edges;
    edges.reserve(edge_ids.size());
    for (int e : edge_ids) {
      const Graph::Edge& pe = parent->edge(e);
      int u = static_cast<int>(std::lower_bound(vertices.begin(),
                                                vertices.end(), pe.u) -
                               vertices.begin());
      int v = static_cast<int>(std::lower_bound(vertices.begin(),
                                                vertices.end(), pe.v) -
                               vertices.begin());
      edges.push_back({u, v, pe.weight});
    }
    return Graph(static_cast<int>(vertices.size()), std::move(edges));
  }
};

inline Subgraph induced_subgraph(const Graph& g, std::vector<int> vertices) {
  std::sort(vertices.begin(), vertices.end());
  vertices.erase(std::unique(vertices.begin(), vertices.end()),
                 vertices.end());
  Subgraph s;
  s.parent = &g;
  s.vertices = std::move(vertices);
  for (int e = 0; e < g.m(); ++e) {
    if (s.contains(g.edge(e).u) && s.contains(g.edge(e).v))
      s.edge_ids.push_back(e);
  }
  return s;
}

inline Subgraph whole_graph(const Graph& g) {
  std::vector<int> all(g.n());
  for (int v = 0; v < g.n(); ++v) all[v] = v;
  return induced_subgraph(g, std::move(all));
}

// All vertices at hop distance <= k from v, with induced edges.
inline Subgraph khop_subgraph(const Graph& g, int v, int k) {
  if (v < 0 || v >= g.n()) throw std::invalid_argument("khop: bad vertex");
  if (k < 0) throw std::invalid_argument("khop: negative hop count");
  std::vector<int> depth = g.bfs_depths(v);
  std::vector<int> ball;
  for (int u = 0; u < g.n(); ++u)
    if (depth[u] >= 0 && depth[u] <= k) ball.push_back(u);
  return induced_subgraph(g, std::move(ball));
}

// ---------------------------------------------------------------------------
// Edge-list text format. Header "n m unit|weighted", then one edge per line:
// "u v" (unit) or "u v weight".
// ---------------------------------------------------------------------------

inline Graph load_graph(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto fail = [&](const std::string& what) {
    throw ParseError("line " + std::to_string(lineno) + ": " + what);
  };

  int n = -1, m = -1;
  bool weighted = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    std::string mode;
    if (!(ls >> n >> m)) fail("expected header 'n m [unit|weighted]'");
    if (ls >> mode) {
      if (mode == "weighted")
        weighted = true;
      else if (mode != "unit")
        fail("unknown mode '" + mode + "'");
    }
    break;
  }
  if (n < 0 || m < 0) throw ParseError("missing header line");

  std::vector<Graph::Edge> edges;
  std::set<std::pair<int, int>> seen;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream ls(line);
    int u, v;
    if (!(ls >> u >> v)) fail("expected edge 'u v [weight]'");
    Rational w(1);
    std::string wtext;
    if (ls >> wtext) {
      if (!weighted) fail("weight given in unit-mode file");
      try {
        w = Rational::parse(wtext);
      } catch (const std::exception&) {
        fail("bad weight '" + wtext + "'");
      }
    }
    if (u == v) fail("self-loop");
    if (u < 0 || v < 0 || u >= n || v >= n) fail("vertex id out of range");
    if (!(w > Rational(0))) fail("nonpositive weight");
    auto key = std::minmax(u, v);
    if (!seen.insert(key).second) fail("duplicate edge");
    edges.push_back({key.first, key.second, w});
  }
  if (static_cast<int>(edges.size()) != m)
    throw ParseError("header declared " + std::to_string(m) + " edges, got " +
                     std::to_string(edges.size()));
  return Graph(n, std::move(edges));
}

inline std::string serialize_graph(const Graph& g) {
  std::ostringstream out;
  out << g.n() << " " << g.m() << (g.unit_weight() ? " unit" : " weighted")
      << "\n";
  for (const Graph::Edge& e : g.edges()) {
    out << e.u << " " << e.v;
    if (!g.unit_weight()) out << " " << e.weight.str();
    out << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Deterministic generators.
// ---------------------------------------------------------------------------

namespace detail {
// Unbiased bounded draw; avoids std::uniform_int_distribution, whose output
// is implementation-defined. mt19937_64 itself is pinned by the standard.
inline std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t bound) {
  if (bound == 0) throw std::invalid_argument("bounded_draw: zero bound");
  std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                        std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}
}  // namespace detail

inline Graph make_clique(int c) {
  if (c <= 0) throw std::invalid_argument("clique: need positive size");
  std::vector<Graph::Edge> edges;
  for (int u = 0; u < c; ++u)
    for (int v = u + 1; v < c; ++v) edges.push_back({u, v, Rational(1)});
  return Graph(c, std::move(edges));
}

inline Graph make_path(int p) {
  if (p <= 0) throw std::invalid_argument("path: need positive size");
  std::vector<Graph::Edge> edges;
  for (int v = 0; v + 1 < p; ++v) edges.push_back({v, v + 1, Rational(1)});
  return Graph(p, std::move(edges));
}

// K_{1,s}: vertex 0 is the center.
inline Graph make_star(int s) {
  if (s <= 0) throw std::invalid_argument("star: need positive leaf count");
  std::vector<Graph::Edge> edges;
  for (int v = 1; v <= s; ++v) edges.push_back({0, v, Rational(1)});
  return Graph(s + 1, std::move(edges));
}

// K_c with a path of p extra vertices attached to clique vertex 0.
inline Graph make_lollipop(int c, int p) {
  if (c <= 0 || p < 0) throw std::invalid_argument("lollipop: bad parameters");
  std::vector<Graph::Edge> edges;
  for (int u = 0; u < c; ++u)
    for (int v = u + 1; v < c; ++v) edges.push_back({u, v, Rational(1)});
  int prev = 0;
  for (int i = 0; i < p; ++i) {
    int v = c + i;
    edges.push_back({prev, v, Rational(1)});
    prev = v;
  }
  return Graph(c + p, std::move(edges));
}

// Uniform simple graph with n vertices and m edges, fixed by the seed.
inline Graph make_gnm(int n, std::int64_t m, std::uint64_t seed) {
  if (n <= 0) throw std::invalid_argument("gnm: need positive n");
  std::int64_t max_edges = static_cast<std::int64_t>(n) * (n - 1) / 2;
  if (m < 0 || m > max_edges)
    throw std::invalid_argument("gnm: infeasible edge count");
  std::vector<std::pair<int, int>> pool;
  pool.reserve(max_edges);
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) pool.push_back({u, v});
  std::mt19937_64 rng(seed);
  // Partial Fisher-Yates: the first m slots become the sample.
  for (std::int64_t i = 0; i < m; ++i) {
    std::uint64_t j =
        i + detail::bounded_draw(rng, static_cast<std::uint64_t>(
                                          pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  std::vector<Graph::Edge> edges;
  edges.reserve(m);
  for (std::int64_t i = 0; i < m; ++i)
    edges.push_back({pool[i].first, pool[i].second, Rational(1)});
  std::sort(edges.begin(), edges.end(), [](const auto& a, const auto& b) {
    return std::pair(a.u, a.v) < std::pair(b.u, b.v);
  });
  return Graph(n, std::move(edges));
}

// Spec strings: clique(4), path(10), star(3), lollipop(4,3), gnm(10,15,7).
inline Graph generate(const std::string& spec) {
  auto open = spec.find('(');
  auto close = spec.rfind(')');
  if (open == std::string::npos || close == std::string::npos || close < open)
    throw std::invalid_argument("generate: expected name(args), got '" + spec +
                                "'");
  std::string name = spec.substr(0, open);
  std::string args = spec.substr(open + 1, close - open - 1);
  std::vector<std::int64_t> nums;
  std::istringstream as(args);
  std::string tok;
  while (std::getline(as, tok, ',')) nums.push_back(std::stoll(tok));
  auto want = [&](std::size_t k) {
    if (nums.size() != k)
      throw std::invalid_argument("generate: " + name + " wants " +
                                  std::to_string(k) + " arguments");
  };
  if (name == "clique") {
    want(1);
    return make_clique(static_cast<int>(nums[0]));
  }
  if (name == "path") {
    want(1);
    return make_path(static_cast<int>(nums[0]));
  }
  if (name == "star") {
    want(1);
    return make_star(static_cast<int>(nums[0]));
  }
  if (name == "lollipop") {
    want(2);
    return make_lollipop(static_cast<int>(nums[0]), static_cast<int>(nums[1]));
  }
  if (name == "gnm") {
    want(3);
    return make_gnm(static_cast<int>(nums[0]), nums[1],
                    static_cast<std::uint64_t>(nums[2]));
  }
  throw std::invalid_argument("generate: unknown family '" + name + "'");
}

}  // namespace ldl
