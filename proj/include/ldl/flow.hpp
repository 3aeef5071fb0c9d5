#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <vector>

#include "ldl/graph.hpp"

namespace ldl {

inline constexpr double kFlowTol = 1e-12;

// Capacitated DAG with designated source and sink. Built by the CONGEST
// protocol as D_s* (super-source over the per-source attachment edges,
// super-sink over the per-terminal ones) and by tests directly.
struct FlowNetwork {
  struct Arc {
    int from;
    int to;
    double capacity;
    double flow = 0.0;
    int tag = -1;  // caller-defined; the protocol stores graph edge ids

    double residual() const { return capacity - flow; }
    bool saturated(double tol = kFlowTol) const { return residual() <= tol; }
  };

  int nodes = 0;
  int source = -1;
  int sink = -1;
  std::vector<Arc> arcs;
  std::vector<std::vector<int>> out;  // arc indices per node

  int add_node() {
    out.emplace_back();
    return nodes++;
  }

  int add_arc(int from, int to, double capacity, int tag = -1) {
    if (capacity < 0) throw std::invalid_argument("flow: negative capacity");
    arcs.push_back({from, to, capacity, 0.0, tag});
    out[from].push_back(static_cast<int>(arcs.size()) - 1);
    return static_cast<int>(arcs.size()) - 1;
  }

  double flow_value() const {
    double total = 0.0;
    for (int a : out[source]) total += arcs[a].flow;
    return total;
  }

  // Topological order; throws if a cycle exists.
  std::vector<int> topo_order() const {
    std::vector<int> indeg(nodes, 0);
    for (const Arc& a : arcs) indeg[a.to]++;
    std::vector<int> order;
    order.reserve(nodes);
    std::vector<int> stack;
    for (int v = 0; v < nodes; ++v)
      if (indeg[v] == 0) stack.push_back(v);
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      order.push_back(v);
      for (int a : out[v])
        if (--indeg[arcs[a].to] == 0) stack.push_back(arcs[a].to);
    }
    if (static_cast<int>(order.size()) != nodes)
      throw std::logic_error("flow: network is not a DAG");
    return order;
  }

  // Length (in arcs) of the longest source-to-sink path.
  int height() const {
    std::vector<int> order = topo_order();
    std::vector<int> dist(nodes, -1);
    dist[source] = 0;
    for (int v : order) {
      if (dist[v] < 0) continue;
      for (int a : out[v])
        dist[arcs[a].to] = std::max(dist[arcs[a].to], dist[v] + 1);
    }
    return dist[sink];
  }
};

// One blocking-flow phase on a DAG: depth-first augmentation with dead-arc
// pruning. Afterwards every source-to-sink path over forward edges crosses a
// saturated arc. (This is the Dinic inner phase; the input is already
// acyclic, so no BFS level filter is needed or wanted -- skip-level arcs
// must participate for the flow to be blocking on the DAG itself.)
inline void blocking_flow(FlowNetwork& net, double tol = kFlowTol) {
  if (net.source < 0 || net.sink < 0)
    throw std::invalid_argument("blocking_flow: source/sink unset");
  net.topo_order();  // cycle check

  std::vector<std::size_t> cursor(net.nodes, 0);
  std::vector<int> path;  // arc indices from source toward sink

  while (true) {
    int v = path.empty() ? net.source : net.arcs[path.back()].to;
    if (v == net.sink) {
      double bottleneck = std::numeric_limits<double>::infinity();
      for (int a : path) bottleneck = std::min(bottleneck, net.arcs[a].residual());
      for (int a : path) {
        net.arcs[a].flow += bottleneck;
        if (net.arcs[a].residual() < 0) net.arcs[a].flow = net.arcs[a].capacity;
      }
      // Retreat to just below the first newly saturated arc.
      std::size_t keep = 0;
      while (keep < path.size() && !net.arcs[path[keep]].saturated(tol)) ++keep;
      path.resize(keep);
      continue;
    }
    bool advanced = false;
    while (cursor[v] < net.out[v].size()) {
      int a = net.out[v][cursor[v]];
      if (!net.arcs[a].saturated(tol)) {
        path.push_back(a);
        advanced = true;
        break;
      }
      ++cursor[v];
    }
    if (advanced) continue;
    if (path.empty()) break;  // source exhausted: flow is blocking
    // Dead end: drop the arc that led here.
    ++cursor[net.arcs[path.back()].from];
    path.pop_back();
  }
}

// Def-check: after a blocking flow, no source-to-sink path of unsaturated
// forward arcs may remain.
inline bool has_unsaturated_path(const FlowNetwork& net, double tol = kFlowTol) {
  std::vector<char> seen(net.nodes, 0);
  std::vector<int> stack{net.source};
  seen[net.source] = 1;
  while (!stack.empty()) {
    int v = stack.back();
    stack.pop_back();
    if (v == net.sink) return true;
    for (int a : net.out[v]) {
      if (net.arcs[a].saturated(tol)) continue;
      int w = net.arcs[a].to;
      if (!seen[w]) {
        seen[w] = 1;
        stack.push_back(w);
      }
    }
  }
  return false;
}

// Conservation check at every node except source and sink.
inline double max_conservation_error(const FlowNetwork& net) {
  std::vector<double> balance(net.nodes, 0.0);
  for (const FlowNetwork::Arc& a : net.arcs) {
    balance[a.from] -= a.flow;
    balance[a.to] += a.flow;
  }
  double worst = 0.0;
  for (int v = 0; v < net.nodes; ++v) {
    if (v == net.source || v == net.sink) continue;
    worst = std::max(worst, std::abs(balance[v]));
  }
  return worst;
}

}  // namespace ldl
