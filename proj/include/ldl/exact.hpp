#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "ldl/graph.hpp"
#include "ldl/orientation.hpp"

namespace ldl {

struct GuardError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline constexpr int kBruteForceLimit = 24;

namespace detail {

inline void check_guard(const Graph& g) {
  if (g.n() > kBruteForceLimit)
    throw GuardError("exact oracle limited to n <= " +
                     std::to_string(kBruteForceLimit) + ", got n = " +
                     std::to_string(g.n()));
}

// Integer edge weights over a common denominator, so subset sums stay in
// int64 and densities come out as exact rationals.
struct ScaledWeights {
  std::int64_t denom = 1;
  std::vector<std::int64_t> w;  // per edge

  static ScaledWeights of(const Graph& g) {
    ScaledWeights s;
    for (const Graph::Edge& e : g.edges())
      s.denom = std::lcm(s.denom, e.weight.den());
    for (const Graph::Edge& e : g.edges())
      s.w.push_back(e.weight.num() * (s.denom / e.weight.den()));
    return s;
  }
};

}  // namespace detail

// rho(H) = total edge weight / vertex count.
inline Rational density(const Graph& g, const Subgraph& h) {
  if (h.vertices.empty()) throw std::invalid_argument("density: empty subgraph");
  Rational sum(0);
  for (int e : h.edge_ids) sum += g.edge(e).weight;
  return sum / Rational(static_cast<std::int64_t>(h.vertices.size()));
}

// Quotient density rho_B(X): edges with one endpoint in X and the other in
// X or B, divided by |X|.
inline Rational quotient_density(const Graph& g, const std::vector<int>& B,
                                 const std::vector<int>& X) {
  if (X.empty()) throw std::invalid_argument("quotient_density: empty X");
  std::vector<char> inB(g.n(), 0), inX(g.n(), 0);
  for (int v : B) inB[v] = 1;
  for (int v : X) {
    if (inB[v])
      throw std::invalid_argument("quotient_density: X intersects B");
    inX[v] = 1;
  }
  Rational sum(0);
  for (const Graph::Edge& e : g.edges()) {
    bool touches = inX[e.u] || inX[e.v];
    bool closed = (inX[e.u] || inB[e.u]) && (inX[e.v] || inB[e.v]);
    if (touches && closed) sum += e.weight;
  }
  return sum / Rational(static_cast<std::int64_t>(X.size()));
}

struct DensestResult {
  std::vector<int> vertices;  // unique maximal maximizer
  Rational density;
};

// Exhaustive maximum subgraph density; returns the union of all maximizing
// subsets (maximizers are closed under union, asserted below).
inline DensestResult densest_subgraph_bruteforce(const Graph& g) {
  detail::check_guard(g);
  if (g.n() == 0) throw std::invalid_argument("densest: empty graph");
  auto sw = detail::ScaledWeights::of(g);
  const std::uint32_t full = (1u << g.n()) - 1;
  std::int64_t best_num = -1;
  std::int64_t best_cnt = 1;
  std::uint32_t best_union = 0;
  for (std::uint32_t mask = 1; mask <= full; ++mask) {
    std::int64_t num = 0;
    for (int e = 0; e < g.m(); ++e) {
      const Graph::Edge& ed = g.edge(e);
      if ((mask >> ed.u & 1u) && (mask >> ed.v & 1u)) num += sw.w[e];
    }
    std::int64_t cnt = std::popcount(mask);
    // num/cnt vs best_num/best_cnt, exact cross-multiplication.
    __int128 lhs = static_cast<__int128>(num) * best_cnt;
    __int128 rhs = static_cast<__int128>(best_num) * cnt;
    if (lhs > rhs) {
      best_num = num;
      best_cnt = cnt;
      best_union = mask;
    } else if (lhs == rhs) {
      best_union |= mask;
    }
  }
  // The union must itself achieve the maximum.
  std::int64_t union_num = 0;
  for (int e = 0; e < g.m(); ++e) {
    const Graph::Edge& ed = g.edge(e);
    if ((best_union >> ed.u & 1u) && (best_union >> ed.v & 1u))
      union_num += sw.w[e];
  }
  std::int64_t union_cnt = std::popcount(best_union);
  if (static_cast<__int128>(union_num) * best_cnt !=
      static_cast<__int128>(best_num) * union_cnt)
    throw std::logic_error("densest: maximizers not closed under union");

  DensestResult r;
  for (int v = 0; v < g.n(); ++v)
    if (best_union >> v & 1u) r.vertices.push_back(v);
  r.density = Rational(union_num, sw.denom * union_cnt);
  return r;
}

struct DecompositionLevel {
  std::vector<int> slice;     // S_i
  std::vector<int> before;    // B_{i-1}
  Rational density;           // quotient density of the slice
};

struct Decomposition {
  std::vector<DecompositionLevel> levels;

  int level_of(int v) const {
    for (std::size_t i = 0; i < levels.size(); ++i)
      if (std::binary_search(levels[i].slice.begin(), levels[i].slice.end(), v))
        return static_cast<int>(i);
    return -1;
  }
};

// Iterative peeling by maximum quotient density. At each step the argmax is
// the unique maximal maximizer (union of all maximizing sets), which makes
// the densities strictly decrease.
inline Decomposition diminishing_decomposition(const Graph& g) {
  detail::check_guard(g);
  auto sw = detail::ScaledWeights::of(g);
  Decomposition dec;
  std::uint32_t peeled = 0;
  const std::uint32_t full = g.n() == 0 ? 0 : ((1u << g.n()) - 1);
  while (peeled != full) {
    std::uint32_t rest = full & ~peeled;
    std::int64_t best_num = -1;
    std::int64_t best_cnt = 1;
    std::uint32_t best_union = 0;
    for (std::uint32_t x = rest; x != 0; x = (x - 1) & rest) {
      std::int64_t num = 0;
      for (int e = 0; e < g.m(); ++e) {
        const Graph::Edge& ed = g.edge(e);
        bool u_in = x >> ed.u & 1u, v_in = x >> ed.v & 1u;
        bool u_closed = u_in || (peeled >> ed.u & 1u);
        bool v_closed = v_in || (peeled >> ed.v & 1u);
        if ((u_in || v_in) && u_closed && v_closed) num += sw.w[e];
      }
      std::int64_t cnt = std::popcount(x);
      __int128 lhs = static_cast<__int128>(num) * best_cnt;
      __int128 rhs = static_cast<__int128>(best_num) * cnt;
      if (lhs > rhs) {
        best_num = num;
        best_cnt = cnt;
        best_union = x;
      } else if (lhs == rhs) {
        best_union |= x;
      }
    }
    DecompositionLevel level;
    for (int v = 0; v < g.n(); ++v) {
      if (best_union >> v & 1u) level.slice.push_back(v);
      if (peeled >> v & 1u) level.before.push_back(v);
    }
    level.density = quotient_density(g, level.before, level.slice);
    if (!dec.levels.empty() && !(level.density < dec.levels.back().density))
      throw std::logic_error("decomposition: densities not strictly decreasing");
    dec.levels.push_back(std::move(level));
    peeled |= best_union;
  }
  return dec;
}

struct LocalDensityMap {
  std::vector<Rational> rho_star;

  Rational max() const {
    Rational best(0);
    for (const Rational& r : rho_star) best = std::max(best, r);
    return best;
  }
};

inline LocalDensityMap local_density_exact(const Graph& g) {
  Decomposition dec = diminishing_decomposition(g);
  LocalDensityMap map;
  map.rho_star.assign(g.n(), Rational(0));
  for (const DecompositionLevel& level : dec.levels)
    for (int v : level.slice) map.rho_star[v] = level.density;
  return map;
}

// ---------------------------------------------------------------------------
// FO^2: minimize sum of squared out-degrees by pairwise rebalancing sweeps.
// Each sweep visits edges in a fixed order and, when the heavier tail has
// positive mass toward the lighter head, transfers half the gap (capped by
// the available mass). Convergence is monitored, not assumed.
// ---------------------------------------------------------------------------

enum class SweepOrder { kForward, kReversed };

struct SolveStats {
  std::int64_t sweeps = 0;
  double max_violation = 0.0;
};

struct SolveError : std::runtime_error {
  double residual;
  SolveError(const std::string& what, double r)
      : std::runtime_error(what), residual(r) {}
};

inline FractionalOrientation solve_fo2(const Graph& g, double tol = kFairTol,
                                       SweepOrder order = SweepOrder::kForward,
                                       std::int64_t max_sweeps = 1000000,
                                       SolveStats* stats = nullptr) {
  if (!(tol > 0)) throw std::invalid_argument("solve_fo2: need tol > 0");
  FractionalOrientation o = init_half(g);
  std::vector<int> edge_order(g.m());
  for (int e = 0; e < g.m(); ++e)
    edge_order[e] = order == SweepOrder::kForward ? e : g.m() - 1 - e;

  double violation = 0.0;
  std::int64_t sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    for (int e : edge_order) {
      int u = g.edge(e).u, v = g.edge(e).v;
      double gu = o.out_degree(u), gv = o.out_degree(v);
      if (gu > gv && o.mass_from(e, u) > 0.0) {
        o.flip(e, u, std::min(o.mass_from(e, u), (gu - gv) / 2.0));
      } else if (gv > gu && o.mass_from(e, v) > 0.0) {
        o.flip(e, v, std::min(o.mass_from(e, v), (gv - gu) / 2.0));
      }
    }
    violation = 0.0;
    for (int e = 0; e < g.m(); ++e) {
      int u = g.edge(e).u, v = g.edge(e).v;
      if (o.mass_from(e, u) > tol)
        violation = std::max(violation, o.out_degree(u) - o.out_degree(v));
      if (o.mass_from(e, v) > tol)
        violation = std::max(violation, o.out_degree(v) - o.out_degree(u));
    }
    if (violation <= tol) break;
  }
  if (violation > tol)
    throw SolveError("solve_fo2: no convergence after " +
                         std::to_string(max_sweeps) + " sweeps",
                     violation);
  if (stats) {
    stats->sweeps = sweep + 1;
    stats->max_violation = violation;
  }
  return o;
}

// ---------------------------------------------------------------------------
// Duality report: max_v g(v) from the quadratic program equals the
// brute-force maximum subgraph density, and per-vertex g(v) equals the local
// density from the decomposition.
// ---------------------------------------------------------------------------

struct DualityEntry {
  int v;
  Rational rho_star;
  double g;
};

struct DualityReport {
  bool pass = true;
  Rational rho_max{0};
  double max_g = 0.0;
  double max_residual = 0.0;  // worst |g(v) - rho*(v)|
  std::vector<DualityEntry> per_vertex;
  std::vector<int> failing_vertices;
};

inline DualityReport verify_duality(const Graph& g, double tol = 1e-6,
                                    double solver_tol = kFairTol) {
  detail::check_guard(g);
  DualityReport rep;
  if (g.n() == 0) return rep;
  DensestResult dense = densest_subgraph_bruteforce(g);
  LocalDensityMap local = local_density_exact(g);
  FractionalOrientation o = solve_fo2(g, solver_tol);
  rep.rho_max = dense.density;
  rep.max_g = o.max_out_degree();
  for (int v = 0; v < g.n(); ++v) {
    double residual = std::abs(o.out_degree(v) - local.rho_star[v].to_double());
    rep.max_residual = std::max(rep.max_residual, residual);
    rep.per_vertex.push_back({v, local.rho_star[v], o.out_degree(v)});
    if (residual > tol) {
      rep.pass = false;
      rep.failing_vertices.push_back(v);
    }
  }
  if (std::abs(rep.max_g - rep.rho_max.to_double()) > tol) rep.pass = false;
  if (local.max() != rep.rho_max) rep.pass = false;
  return rep;
}

}  // namespace ldl
