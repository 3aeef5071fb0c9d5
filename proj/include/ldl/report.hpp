#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ldl/exact.hpp"
#include "ldl/graph.hpp"
#include "ldl/orientation.hpp"
#include "ldl/sim.hpp"

namespace ldl {

// ---------------------------------------------------------------------------
// Truncated-BFS leader election. Priority is the fractional out-degree under
// the given orientation (larger wins), ties by lower id. A vertex is a
// leader only if its whole t-hop ball acknowledges it after t rounds of
// flooding; acknowledgment takes t more rounds (convergecast up the BFS
// trees), confirmation another t (broadcast down).
// ---------------------------------------------------------------------------

struct LeaderElection {
  std::int64_t t = 0;
  std::vector<int> ack;        // acknowledged candidate per vertex
  std::vector<int> dist;       // hop distance to the acknowledged candidate
  std::vector<char> leader;    // elected leaders
  std::vector<char> informed;  // vertices that heard a confirmed leader
  Trace trace;
};

namespace detail {

inline int id_bits(int n) {
  int b = 1;
  while ((1 << b) < n) ++b;
  return b;
}

// 44-bit fixed point (12 integer + 32 fractional bits) used for priority
// keys on the wire.
inline std::uint64_t key_fixed(double v) {
  if (v < 0) v = 0;
  double scaled = std::floor(v * 4294967296.0);
  double cap = std::ldexp(1.0, 44) - 1.0;
  if (scaled > cap) scaled = cap;
  return static_cast<std::uint64_t>(scaled);
}

}  // namespace detail

inline std::int64_t election_radius(double eps, int n, int radius_constant) {
  if (!(eps > 0.0 && eps <= 1.0))
    throw std::invalid_argument("election: eps out of (0,1]");
  return static_cast<std::int64_t>(
      std::ceil(radius_constant * std::log2(std::max(2, n)) / eps));
}

inline LeaderElection elect_leaders(const Graph& g,
                                    const FractionalOrientation& o, double eps,
                                    int radius_constant = 32) {
  const int n = g.n();
  LeaderElection el;
  el.t = election_radius(eps, n, radius_constant);
  if (el.t > 4095)
    throw std::invalid_argument("election: radius exceeds wire format");
  el.ack.resize(n);
  el.dist.assign(n, 0);
  el.leader.assign(n, 0);
  el.informed.assign(n, 0);
  if (n == 0) return el;

  const int idb = detail::id_bits(std::max(2, n));
  constexpr std::uint64_t kTagFlood = 1, kTagAck = 2, kTagConfirm = 3;

  SyncNetwork net(g, SimMode::kCongest,
                  SyncNetwork::default_bandwidth(std::max(2, n)) + 64,
                  BandwidthPolicy::kStrict);

  struct Key {
    std::uint64_t g;
    int id;
    bool beats(const Key& other) const {
      if (g != other.g) return g > other.g;
      return id < other.id;
    }
  };
  std::vector<Key> best(n);
  std::vector<int> parent_edge(n, -1);
  for (int v = 0; v < n; ++v) {
    best[v] = {detail::key_fixed(o.out_degree(v)), v};
    el.dist[v] = 0;
  }

  // Phase 1: t rounds of priority flooding.
  for (std::int64_t r = 0; r < el.t; ++r) {
    for (int v = 0; v < n; ++v) {
      BitWriter w;
      w.put(kTagFlood, 3);
      w.put(best[v].g, 44);
      w.put(static_cast<std::uint64_t>(best[v].id), idb);
      w.put(static_cast<std::uint64_t>(el.dist[v]), 12);
      for (int e : g.incident(v)) net.send(e, v, Message{w.raw()});
    }
    net.exchange();
    for (int v = 0; v < n; ++v) {
      for (int e : g.incident(v)) {
        const auto& msg = net.recv(e, v);
        if (!msg) continue;
        BitReader rd(msg->bits);
        if (rd.get(3) != kTagFlood) continue;
        Key k{rd.get(44), static_cast<int>(rd.get(idb))};
        int d = static_cast<int>(rd.get(12)) + 1;
        if (k.beats(best[v])) {
          best[v] = k;
          el.dist[v] = d;
          parent_edge[v] = e;
        } else if (k.id == best[v].id && k.g == best[v].g &&
                   d < el.dist[v]) {
          el.dist[v] = d;
          parent_edge[v] = e;
        }
      }
    }
  }
  for (int v = 0; v < n; ++v) el.ack[v] = best[v].id;

  // Phase 2: t rounds of acknowledgment. A vertex objects when a neighbor
  // acknowledges someone else while the vertex sits strictly inside the
  // ball; subtree AND-aggregation flows toward the candidate.
  std::vector<char> ok(n, 1);
  std::vector<char> agg(n, 1);
  for (std::int64_t r = 0; r < el.t; ++r) {
    for (int v = 0; v < n; ++v) {
      for (int e : g.incident(v)) {
        BitWriter w;
        w.put(kTagAck, 3);
        w.put(static_cast<std::uint64_t>(el.ack[v]), idb);
        w.put(parent_edge[v] == e ? 1 : 0, 1);
        w.put(agg[v] ? 1 : 0, 1);
        net.send(e, v, Message{w.raw()});
      }
    }
    net.exchange();
    std::vector<char> next(n, 1);
    for (int v = 0; v < n; ++v) {
      bool value = ok[v];
      for (int e : g.incident(v)) {
        const auto& msg = net.recv(e, v);
        if (!msg) continue;
        BitReader rd(msg->bits);
        if (rd.get(3) != kTagAck) continue;
        int their_ack = static_cast<int>(rd.get(idb));
        bool to_parent = rd.get(1) != 0;
        bool their_agg = rd.get(1) != 0;
        if (their_ack != el.ack[v] && el.dist[v] <= el.t - 1) {
          ok[v] = 0;
          value = false;
        }
        if (to_parent && their_ack == el.ack[v] && !their_agg) value = false;
      }
      next[v] = value ? 1 : 0;
    }
    agg = std::move(next);
  }
  for (int v = 0; v < n; ++v) el.leader[v] = (el.ack[v] == v && agg[v]) ? 1 : 0;

  // Phase 3: t rounds of confirmation broadcast inside each leader's ball.
  std::vector<char> confirmed(n, 0);
  for (int v = 0; v < n; ++v)
    if (el.leader[v]) confirmed[v] = 1;
  for (std::int64_t r = 0; r < el.t; ++r) {
    for (int v = 0; v < n; ++v) {
      if (!confirmed[v]) continue;
      BitWriter w;
      w.put(kTagConfirm, 3);
      w.put(static_cast<std::uint64_t>(el.ack[v]), idb);
      for (int e : g.incident(v)) net.send(e, v, Message{w.raw()});
    }
    net.exchange();
    for (int v = 0; v < n; ++v) {
      if (confirmed[v]) continue;
      for (int e : g.incident(v)) {
        const auto& msg = net.recv(e, v);
        if (!msg) continue;
        BitReader rd(msg->bits);
        if (rd.get(3) != kTagConfirm) continue;
        if (static_cast<int>(rd.get(idb)) == el.ack[v]) confirmed[v] = 1;
      }
    }
  }
  el.informed = confirmed;
  el.trace = net.trace();
  return el;
}

// ---------------------------------------------------------------------------
// Subgraph reporting.
// ---------------------------------------------------------------------------

struct LeaderRecord {
  int leader = -1;
  bool active = false;
  double h_max = 0.0;
  int k = -1;
  double cutoff = 0.0;
};

struct ReportResult {
  std::vector<int> bits;
  std::vector<int> ones;  // vertices with bit 1
  std::optional<Rational> subgraph_density;
  std::vector<LeaderRecord> leaders;
  std::int64_t radius = 0;
  Trace trace;
};

namespace detail {

// Cut-off search shared by both reporting variants: thresholds
// base * (1+eta)^-i, smallest k with |T_{k+1}| < (1 + eps/16) |T_k|.
struct CutoffResult {
  int k;
  double cutoff;
};

inline CutoffResult find_cutoff(const std::vector<double>& ball_g, double base,
                                double eta, double eps, int n,
                                double tol = kFairTol) {
  auto tier_size = [&](int i) {
    double thr = base * std::pow(1.0 + eta, -i);
    std::size_t c = 0;
    for (double v : ball_g)
      if (v >= thr - tol) ++c;
    return c;
  };
  int imax = static_cast<int>(
                 std::ceil(std::log(std::max(2, n)) / std::log1p(eps / 16.0))) +
             1;
  std::size_t prev = tier_size(0);
  for (int i = 0; i <= imax; ++i) {
    std::size_t next = tier_size(i + 1);
    if (static_cast<double>(next) <
        (1.0 + eps / 16.0) * static_cast<double>(prev)) {
      return {i, base * std::pow(1.0 + eta, -(i + 1))};
    }
    prev = next;
  }
  throw std::logic_error("cutoff search found no stabilizing tier");
}

}  // namespace detail

// Problem variant with an oracle density estimate: every vertex gets
// Dtilde; leaders below it deactivate their ball; the rest report the
// cut-off tier of a ball-local fair orientation.
inline ReportResult report_subgraph(const Graph& g, double eps, double dtilde,
                                    int radius_constant = 32,
                                    double solver_tol = kFairTol) {
  if (!g.unit_weight())
    throw std::invalid_argument("report: unit-weight graphs only");
  const int n = g.n();
  ReportResult res;
  res.bits.assign(n, 0);
  if (n == 0) return res;
  double eta = n >= 2 ? eta_for(eps, n) : 0.0;

  FractionalOrientation global = solve_fo2(g, solver_tol);
  LeaderElection el = elect_leaders(g, global, eps, radius_constant);
  res.radius = el.t;
  res.trace = el.trace;

  std::vector<char> ball_seen(n, 0);
  for (int v = 0; v < n; ++v) {
    if (!el.leader[v]) continue;
    LeaderRecord rec;
    rec.leader = v;
    rec.active = global.out_degree(v) >= dtilde - kFairTol;
    if (rec.active) {
      Subgraph ball = khop_subgraph(g, v, static_cast<int>(el.t));
      for (int u : ball.vertices) {
        if (ball_seen[u])
          throw std::logic_error("report: active leader balls intersect");
        ball_seen[u] = 1;
      }
      Graph local = ball.materialize();
      FractionalOrientation bo = solve_fo2(local, solver_tol);
      std::vector<double> gvals(bo.out_degrees());
      rec.h_max = bo.max_out_degree();
      auto cut = detail::find_cutoff(gvals, rec.h_max, eta, eps, n);
      rec.k = cut.k;
      rec.cutoff = cut.cutoff;
      for (std::size_t i = 0; i < ball.vertices.size(); ++i)
        if (gvals[i] >= rec.cutoff - kFairTol) res.bits[ball.vertices[i]] = 1;
    }
    res.leaders.push_back(rec);
  }
  for (int v = 0; v < n; ++v)
    if (res.bits[v]) res.ones.push_back(v);
  if (!res.ones.empty()) {
    Subgraph h = induced_subgraph(g, res.ones);
    res.subgraph_density = density(g, h);
  }
  return res;
}

// Vertex-centred variant: v is the sole active leader over its
// schedule_k-hop ball; tiers are relative to g(v), so v always reports 1.
inline ReportResult report_local_subgraph(const Graph& g, double eps, int v,
                                          double solver_tol = kFairTol) {
  if (!g.unit_weight())
    throw std::invalid_argument("report: unit-weight graphs only");
  if (v < 0 || v >= g.n()) throw std::invalid_argument("report: bad vertex");
  const int n = g.n();
  ReportResult res;
  res.bits.assign(n, 0);
  double eta = n >= 2 ? eta_for(eps, n) : 0.0;
  res.radius = n >= 2 ? schedule_k(eps, n) : 0;

  Subgraph ball = khop_subgraph(g, v, static_cast<int>(res.radius));
  Graph local = ball.materialize();
  FractionalOrientation bo = solve_fo2(local, solver_tol);
  std::vector<double> gvals(bo.out_degrees());
  int vlocal = static_cast<int>(
      std::lower_bound(ball.vertices.begin(), ball.vertices.end(), v) -
      ball.vertices.begin());

  LeaderRecord rec;
  rec.leader = v;
  rec.active = true;
  rec.h_max = gvals[vlocal];  // tiers hang off g(v) here
  auto cut = detail::find_cutoff(gvals, gvals[vlocal], eta, eps, n);
  rec.k = cut.k;
  rec.cutoff = cut.cutoff;
  for (std::size_t i = 0; i < ball.vertices.size(); ++i)
    if (gvals[i] >= rec.cutoff - kFairTol) res.bits[ball.vertices[i]] = 1;
  res.leaders.push_back(rec);

  for (int u = 0; u < n; ++u)
    if (res.bits[u]) res.ones.push_back(u);
  Subgraph h = induced_subgraph(g, res.ones);
  res.subgraph_density = density(g, h);
  return res;
}

// Existence check behind the reporting guarantee: inside the
// ceil(2 log2 n / eps)-hop ball of v there is a subgraph of density at
// least (1-eps) rho*(v). Exhaustive search; n <= 24.
struct DenseWitness {
  std::int64_t t = 0;
  std::vector<int> vertices;
  Rational density{0};
  Rational rho_star{0};
  bool pass = false;
};

inline DenseWitness verify_t_hop_dense_subgraph(const Graph& g, int v,
                                                double eps) {
  DenseWitness w;
  w.t = static_cast<std::int64_t>(
      std::ceil(2.0 * std::log2(std::max(2, g.n())) / eps));
  LocalDensityMap exact = local_density_exact(g);
  w.rho_star = exact.rho_star[v];
  Subgraph ball = khop_subgraph(g, v, static_cast<int>(w.t));
  Graph local = ball.materialize();
  DensestResult best = densest_subgraph_bruteforce(local);
  for (int u : best.vertices) w.vertices.push_back(ball.vertices[u]);
  w.density = best.density;
  w.pass = best.density.to_double() >=
           (1.0 - eps) * w.rho_star.to_double() - kFairTol;
  return w;
}

}  // namespace ldl
