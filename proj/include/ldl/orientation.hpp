#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ldl/graph.hpp"

namespace ldl {

inline constexpr double kFairTol = 1e-9;
inline constexpr int kSentinelLevel = std::numeric_limits<int>::min() / 4;

// eta = eps^2 / (128 * log2 n). All schedule formulas use base-2 logs.
inline double eta_for(double eps, int n) {
  if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("eta_for: eps out of (0,1]");
  if (n < 2) throw std::invalid_argument("eta_for: need n >= 2");
  return eps * eps / (128.0 * std::log2(static_cast<double>(n)));
}

// k = ceil(eps^-2 * (log2 n)^2), the gathering radius / top schedule level.
inline std::int64_t schedule_k(double eps, int n, double multiplier = 1.0) {
  if (!(eps > 0.0 && eps <= 1.0)) throw std::invalid_argument("schedule_k: eps out of (0,1]");
  if (n < 2) throw std::invalid_argument("schedule_k: need n >= 2");
  double l = std::log2(static_cast<double>(n));
  return static_cast<std::int64_t>(std::ceil(multiplier * l * l / (eps * eps)));
}

enum class LevelMove { kNone, kUp, kDown };

// Level index of an out-degree value: i with value in [(1+eta/2)^i, (1+eta/2)^{i+1}].
// The intervals share endpoints; an exact power resolves by the direction of
// the last change (up -> lower level, down -> higher level). Values at or
// below tol get the sentinel level.
inline int level_of(double value, double eta, LevelMove move = LevelMove::kNone,
                    double tol = kFairTol) {
  if (value <= tol) return kSentinelLevel;
  double base = std::log1p(eta / 2.0);
  double raw = std::log(value) / base;
  int nearest = static_cast<int>(std::llround(raw));
  double boundary = std::exp(base * nearest);
  if (std::abs(value - boundary) <= tol) {
    return move == LevelMove::kUp ? nearest - 1 : nearest;
  }
  return static_cast<int>(std::floor(raw));
}

inline double level_floor(int level, double eta) {
  return std::exp(std::log1p(eta / 2.0) * level);
}

struct FairnessViolation {
  int edge;
  int from;  // tail carrying positive directed weight
  int to;
  double g_from;
  double g_to;
};

// Fractional orientation: each edge's weight split into two directed parts.
// Simulator-side arithmetic is double; per-edge conservation is maintained
// exactly by construction (both directions updated together).
class FractionalOrientation {
 public:
  FractionalOrientation() : g_(nullptr) {}

  explicit FractionalOrientation(const Graph& g)
      : g_(&g),
        to_head_(g.m(), 0.0),
        to_tail_(g.m(), 0.0),
        out_(g.n(), 0.0),
        removed_(g.m(), 0) {}

  const Graph& graph() const { return *g_; }

  // Directed weight from x across edge e.
  double mass_from(int e, int x) const {
    return g_->edge(e).u == x ? to_head_[e] : to_tail_[e];
  }
  void set_mass(int e, int x, double value) {
    if (g_->edge(e).u == x)
      to_head_[e] = value;
    else
      to_tail_[e] = value;
  }

  double out_degree(int v) const { return out_[v]; }
  const std::vector<double>& out_degrees() const { return out_; }
  bool edge_removed(int e) const { return removed_[e] != 0; }

  // Moves `amount` of directed weight x->y onto y->x.
  void flip(int e, int x, double amount) {
    int y = g_->other_end(e, x);
    set_mass(e, x, mass_from(e, x) - amount);
    set_mass(e, y, mass_from(e, y) + amount);
    out_[x] -= amount;
    out_[y] += amount;
  }

  void remove_edge(int e) {
    out_[g_->edge(e).u] -= to_head_[e];
    out_[g_->edge(e).v] -= to_tail_[e];
    to_head_[e] = 0.0;
    to_tail_[e] = 0.0;
    removed_[e] = 1;
  }

  // Drops x's directed weight on e without moving it to the other side.
  void zero_direction(int e, int x) {
    out_[x] -= mass_from(e, x);
    set_mass(e, x, 0.0);
  }

  std::vector<double> recompute_out_degrees() const {
    std::vector<double> fresh(g_->n(), 0.0);
    for (int e = 0; e < g_->m(); ++e) {
      fresh[g_->edge(e).u] += to_head_[e];
      fresh[g_->edge(e).v] += to_tail_[e];
    }
    return fresh;
  }

  void sync_out_degrees() { out_ = recompute_out_degrees(); }

  double max_out_degree() const {
    double best = 0.0;
    for (double v : out_) best = std::max(best, v);
    return best;
  }

 private:
  const Graph* g_;
  std::vector<double> to_head_;  // mass edge.u -> edge.v
  std::vector<double> to_tail_;  // mass edge.v -> edge.u
  std::vector<double> out_;
  std::vector<char> removed_;
};

// Every edge split evenly; g(u) = weighted-degree(u)/2.
inline FractionalOrientation init_half(const Graph& g) {
  FractionalOrientation o(g);
  for (int e = 0; e < g.m(); ++e) {
    double half = g.edge(e).weight.to_double() / 2.0;
    o.set_mass(e, g.edge(e).u, half);
    o.set_mass(e, g.edge(e).v, half);
  }
  o.sync_out_degrees();
  return o;
}

// Edges with g(u->v) > tol and g(u) > (1+eta) g(v) + tol. eta = 0 gives the
// locally-fair predicate.
inline std::vector<FairnessViolation> is_eta_fair(
    const FractionalOrientation& o, double eta, double tol = kFairTol) {
  std::vector<FairnessViolation> out;
  const Graph& g = o.graph();
  for (int e = 0; e < g.m(); ++e) {
    if (o.edge_removed(e)) continue;
    for (int x : {g.edge(e).u, g.edge(e).v}) {
      int y = g.other_end(e, x);
      if (o.mass_from(e, x) > tol &&
          o.out_degree(x) > (1.0 + eta) * o.out_degree(y) + tol) {
        out.push_back({e, x, y, o.out_degree(x), o.out_degree(y)});
      }
    }
  }
  return out;
}

inline std::vector<FairnessViolation> is_locally_fair(
    const FractionalOrientation& o, double tol = kFairTol) {
  return is_eta_fair(o, 0.0, tol);
}

// ---------------------------------------------------------------------------
// Deletion-only rebalancing.
//
// decrease() is the recursive cascade: before flipping `amount` of g(x->y),
// in-edges of x whose tails would exceed (1+eta) times x's prospective final
// out-degree are flipped onto x first, largest tail first. Each compensating
// flip raises g(x) and shrinks the uncompensated remainder. The recursion
// never revisits a vertex already on the call path, which pins the depth at
// the path length.
//
// delete_edge_maintaining_fairness() additionally caps every compensating
// transfer so the reverse direction of the flipped edge stays eta-fair;
// uncapped transfers can overshoot and leave the flipped edge violating in
// the other direction.
// ---------------------------------------------------------------------------

struct DecreaseStats {
  int depth = 0;       // max recursion nesting below the top-level call
  int transfers = 0;   // compensating flips performed
};

namespace detail {

struct DecreaseCtx {
  FractionalOrientation* o;
  double eta;
  double tol;
  bool reverse_safe_caps;
  std::vector<char> on_path;
  int skip_edge = -1;  // edge being deleted; never used for compensation
  DecreaseStats stats;
};

inline void decrease_rec(DecreaseCtx& ctx, int x, int via_edge, double amount,
                         int depth);

// Compensation loop for a prospective drop of `amount` at x: while some
// in-neighbor would exceed (1+eta) times x's final out-degree, flip mass
// from that in-edge onto x. Each flip raises the prospective final
// g(x) - amount; total compensation never exceeds `amount`, so x cannot end
// above its entry value (which would break x's own out-edges).
inline void compensate(DecreaseCtx& ctx, int x, double amount, int depth) {
  FractionalOrientation& o = *ctx.o;
  const Graph& g = o.graph();
  ctx.stats.depth = std::max(ctx.stats.depth, depth);
  double rem = amount;  // compensation still allowed
  int guard = 0;
  while (rem > ctx.tol) {
    if (++guard > 64 * g.n() + 64)
      throw std::runtime_error("decrease: compensation loop exceeded bound");
    int best_edge = -1;
    int best_w = -1;
    for (int e : g.incident(x)) {
      if (e == ctx.skip_edge || o.edge_removed(e)) continue;
      int w = g.other_end(e, x);
      if (ctx.on_path[w]) continue;
      if (o.mass_from(e, w) <= ctx.tol) continue;
      if (best_w < 0 || o.out_degree(w) > o.out_degree(best_w) ||
          (o.out_degree(w) == o.out_degree(best_w) && w < best_w)) {
        best_w = w;
        best_edge = e;
      }
    }
    if (best_w < 0) break;
    double final_x = o.out_degree(x) - amount;
    if (o.out_degree(best_w) <= (1.0 + ctx.eta) * final_x + ctx.tol) break;
    double take = std::min(rem, o.mass_from(best_edge, best_w));
    if (ctx.reverse_safe_caps) {
      // Keep x's final out-degree at most (1+eta) times w's new one, so the
      // flipped edge cannot start violating in the other direction.
      double cap = ((1.0 + ctx.eta) * o.out_degree(best_w) - final_x) /
                   (2.0 + ctx.eta);
      take = std::min(take, std::max(0.0, cap));
    }
    if (take <= ctx.tol) break;
    decrease_rec(ctx, best_w, best_edge, take, depth + 1);
    rem -= take;
  }
}

inline void decrease_rec(DecreaseCtx& ctx, int x, int via_edge, double amount,
                         int depth) {
  ctx.on_path[x] = 1;
  compensate(ctx, x, amount, depth);
  ctx.on_path[x] = 0;
  ctx.o->flip(via_edge, x, amount);
  ctx.stats.transfers += 1;
}

}  // namespace detail

// Algorithm: flip `amount` of g(x->y) onto g(y->x), first repairing x's
// in-edges against the drop.
inline DecreaseStats decrease(FractionalOrientation& o, int x, int y,
                              double amount, double eta,
                              double tol = kFairTol) {
  const Graph& g = o.graph();
  int edge = -1;
  for (int e : g.incident(x))
    if (g.other_end(e, x) == y && !o.edge_removed(e)) edge = e;
  if (edge < 0) throw std::invalid_argument("decrease: no such edge");
  if (amount < 0 || amount > o.mass_from(edge, x) + tol)
    throw std::invalid_argument("decrease: amount exceeds directed weight");
  if (amount <= tol) return {};
  detail::DecreaseCtx ctx{&o, eta, tol, false,
                          std::vector<char>(g.n(), 0)};
  ctx.on_path[x] = 1;
  detail::compensate(ctx, x, amount, 0);
  ctx.on_path[x] = 0;
  o.flip(edge, x, amount);
  return ctx.stats;
}

// Pairwise rebalancing sweeps until no eta-violation remains. Transfers half
// the degree gap across each violating edge, which strictly decreases the
// sum of squared out-degrees, so the loop terminates; the cap converts a
// stall into an error. Returns the number of sweeps that did work.
inline int restore_eta_fairness(FractionalOrientation& o, double eta,
                                double tol = kFairTol, int max_sweeps = 100000) {
  const Graph& g = o.graph();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    bool dirty = false;
    for (int e = 0; e < g.m(); ++e) {
      if (o.edge_removed(e)) continue;
      for (int x : {g.edge(e).u, g.edge(e).v}) {
        int y = g.other_end(e, x);
        if (o.mass_from(e, x) > tol &&
            o.out_degree(x) > (1.0 + eta) * o.out_degree(y) + tol) {
          double t = std::min(o.mass_from(e, x),
                              (o.out_degree(x) - o.out_degree(y)) / 2.0);
          o.flip(e, x, t);
          dirty = true;
        }
      }
    }
    if (!dirty) return sweep;
  }
  throw std::runtime_error("restore_eta_fairness: no convergence");
}

// Removes edge e, repairing both endpoints so an eta-fair orientation stays
// eta-fair. Each endpoint's share is dropped right after its compensation
// cascade; deferring both drops would let the second cascade read stale
// degrees at the first endpoint. The cascades handle everything a single
// chain can reach; residual violations (helpers drained by several targets
// at once) are closed by bounded rebalancing sweeps afterwards. Returns the
// deeper of the two cascades.
inline DecreaseStats delete_edge_maintaining_fairness(FractionalOrientation& o,
                                                      int e, double eta,
                                                      double tol = kFairTol) {
  const Graph& g = o.graph();
  if (e < 0 || e >= g.m() || o.edge_removed(e))
    throw std::invalid_argument("delete_edge: no such edge");
  DecreaseStats stats;
  for (int x : {g.edge(e).u, g.edge(e).v}) {
    double drop = o.mass_from(e, x);
    if (drop > tol) {
      detail::DecreaseCtx ctx{&o, eta, tol, true,
                              std::vector<char>(g.n(), 0)};
      ctx.skip_edge = e;
      ctx.on_path[x] = 1;
      detail::compensate(ctx, x, drop, 0);
      stats.depth = std::max(stats.depth, ctx.stats.depth);
      stats.transfers += ctx.stats.transfers;
    }
    o.zero_direction(e, x);
  }
  o.remove_edge(e);
  restore_eta_fairness(o, eta, tol);
  return stats;
}

// ---------------------------------------------------------------------------
// Approximation check: eta-fair orientations sandwich the local density.
// ---------------------------------------------------------------------------

struct ApproxCheckEntry {
  int v;
  double g;
  double rho_star;
  bool pass;
};

struct ApproxCheckReport {
  bool pass = true;
  std::vector<ApproxCheckEntry> entries;
};

// rho_star given as exact rationals (from the exact oracle).
inline ApproxCheckReport approx_check(const FractionalOrientation& o,
                                      const std::vector<Rational>& rho_star,
                                      double eps, double tol = kFairTol) {
  ApproxCheckReport rep;
  for (int v = 0; v < o.graph().n(); ++v) {
    double rs = rho_star[v].to_double();
    double gv = o.out_degree(v);
    bool ok = gv >= rs / (1.0 + eps) - tol && gv <= rs * (1.0 + eps) + tol;
    rep.entries.push_back({v, gv, rs, ok});
    rep.pass = rep.pass && ok;
  }
  return rep;
}

// Per-vertex level assignment for a whole orientation (initial assignment
// uses the no-move rule: exact powers resolve to the higher level).
struct LevelIndex {
  double eta;
  std::vector<int> level;

  static LevelIndex of(const FractionalOrientation& o, double eta,
                       double tol = kFairTol) {
    LevelIndex idx;
    idx.eta = eta;
    idx.level.resize(o.graph().n());
    for (int v = 0; v < o.graph().n(); ++v)
      idx.level[v] = level_of(o.out_degree(v), eta, LevelMove::kNone, tol);
    return idx;
  }

  int top_level() const {
    int best = kSentinelLevel;
    for (int l : level) best = std::max(best, l);
    return best;
  }
  int bottom_level() const {
    int best = std::numeric_limits<int>::max();
    for (int l : level) best = std::min(best, l);
    return best == std::numeric_limits<int>::max() ? kSentinelLevel : best;
  }
};

}  // namespace ldl
