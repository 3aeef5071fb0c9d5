#pragma once

#include <cstdio>
#include <set>
#include <string>
#include <vector>

#include "ldl/exact.hpp"
#include "ldl/graph.hpp"
#include "ldl/orientation.hpp"
#include "ldl/sim.hpp"

namespace ldl {

// LOCAL-model algorithm: k rounds of neighborhood flooding, then every node
// solves the orientation program on its own k-hop ball and reports its own
// out-degree. k = ceil(eps^-2 (log2 n)^2); the multiplier scales k for
// experiments with truncated horizons.
struct LocalRunResult {
  std::vector<double> rho;
  Trace trace;
  std::int64_t k = 0;
};

namespace detail {

class GatherProgram : public NodeProgram {
 public:
  GatherProgram(std::int64_t k, double solver_tol)
      : k_(k), solver_tol_(solver_tol) {}

  void init(const LocalView& view) override {
    view_ = view;
    for (std::size_t i = 0; i < view_.neighbors.size(); ++i) {
      std::pair<int, int> p = std::minmax(view_.id, view_.neighbors[i]);
      known_.insert(p);
      fresh_.push_back(p);
    }
  }

  void step(RoundIO& io) override {
    if (io.round() > 0) {
      for (std::size_t i = 0; i < view_.incident_edges.size(); ++i) {
        const auto& msg = io.in(static_cast<int>(i));
        if (!msg) continue;
        BitReader rd(msg->bits);
        std::uint64_t count = rd.get(32);
        for (std::uint64_t j = 0; j < count; ++j) {
          int u = static_cast<int>(rd.get(32));
          int v = static_cast<int>(rd.get(32));
          if (known_.insert({u, v}).second) fresh_.push_back({u, v});
        }
      }
    }
    if (io.round() >= static_cast<std::uint64_t>(k_)) {
      io.halt(format_output(solve()));
      return;
    }
    if (!fresh_.empty()) {
      BitWriter w;
      w.put(static_cast<std::uint64_t>(fresh_.size()), 32);
      for (auto& [u, v] : fresh_) {
        w.put(static_cast<std::uint64_t>(u), 32);
        w.put(static_cast<std::uint64_t>(v), 32);
      }
      Message msg{w.raw()};
      for (std::size_t i = 0; i < view_.incident_edges.size(); ++i)
        io.out(static_cast<int>(i), msg);
      fresh_.clear();
    }
  }

 private:
  // Build H_k(self) from the gathered edges and solve FO^2 on it.
  double solve() const {
    // BFS distances over the gathered adjacency.
    std::set<int> verts;
    for (auto& [u, v] : known_) {
      verts.insert(u);
      verts.insert(v);
    }
    verts.insert(view_.id);
    std::vector<int> ids(verts.begin(), verts.end());
    auto idx = [&](int v) {
      return static_cast<int>(std::lower_bound(ids.begin(), ids.end(), v) -
                              ids.begin());
    };
    std::vector<std::vector<int>> adj(ids.size());
    for (auto& [u, v] : known_) {
      adj[idx(u)].push_back(idx(v));
      adj[idx(v)].push_back(idx(u));
    }
    std::vector<int> dist(ids.size(), -1);
    std::vector<int> queue{idx(view_.id)};
    dist[idx(view_.id)] = 0;
    for (std::size_t head = 0; head < queue.size(); ++head) {
      int v = queue[head];
      for (int w : adj[v])
        if (dist[w] < 0) {
          dist[w] = dist[v] + 1;
          queue.push_back(w);
        }
    }
    // Ball membership and induced edges.
    std::vector<int> ball_id(ids.size(), -1);
    int count = 0;
    for (std::size_t i = 0; i < ids.size(); ++i)
      if (dist[i] >= 0 && dist[i] <= k_) ball_id[i] = count++;
    std::vector<Graph::Edge> edges;
    for (auto& [u, v] : known_) {
      int iu = ball_id[idx(u)], iv = ball_id[idx(v)];
      if (iu >= 0 && iv >= 0) edges.push_back({iu, iv, Rational(1)});
    }
    Graph ball(count, std::move(edges));
    FractionalOrientation o = solve_fo2(ball, solver_tol_);
    return o.out_degree(ball_id[idx(view_.id)]);
  }

  static std::string format_output(double value) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
  }

  LocalView view_;
  std::int64_t k_;
  double solver_tol_;
  std::set<std::pair<int, int>> known_;
  std::vector<std::pair<int, int>> fresh_;
};

struct GatherFactory : ProgramFactory {
  std::int64_t k;
  double solver_tol;
  GatherFactory(std::int64_t k_, double tol) : k(k_), solver_tol(tol) {}
  std::unique_ptr<NodeProgram> make() const override {
    return std::make_unique<GatherProgram>(k, solver_tol);
  }
};

}  // namespace detail

inline LocalRunResult local_density_local_model(const Graph& g, double eps,
                                                double k_multiplier = 1.0,
                                                double solver_tol = kFairTol) {
  if (!g.unit_weight())
    throw std::invalid_argument("local model: unit-weight graphs only");
  LocalRunResult result;
  if (g.n() == 0) return result;
  if (g.n() == 1) {
    result.rho = {0.0};
    result.trace.all_halted = true;
    return result;
  }
  result.k = schedule_k(eps, g.n(), k_multiplier);
  detail::GatherFactory factory(result.k, solver_tol);
  RunOptions opts;
  opts.budget = static_cast<std::uint64_t>(result.k) + 2;
  result.trace = run(g, factory, SimMode::kLocal, opts);
  result.rho.assign(g.n(), 0.0);
  for (auto& [v, text] : result.trace.outputs) result.rho[v] = std::stod(text);
  return result;
}

}  // namespace ldl
