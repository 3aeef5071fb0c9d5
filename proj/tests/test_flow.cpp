#include <random>

#include "catch_amalgamated.hpp"
#include "ldl/flow.hpp"
#include "ldl/graph.hpp"

using namespace ldl;

namespace {

// Test-only max-flow oracle: Edmonds-Karp over an explicit residual graph.
double max_flow_bruteforce(const FlowNetwork& in) {
  int n = in.nodes;
  std::vector<std::vector<double>> cap(n, std::vector<double>(n, 0.0));
  for (const FlowNetwork::Arc& a : in.arcs) cap[a.from][a.to] += a.capacity;
  double total = 0.0;
  while (true) {
    std::vector<int> parent(n, -1);
    parent[in.source] = in.source;
    std::vector<int> queue{in.source};
    for (std::size_t head = 0; head < queue.size() && parent[in.sink] < 0;
         ++head) {
      int v = queue[head];
      for (int w = 0; w < n; ++w)
        if (parent[w] < 0 && cap[v][w] > kFlowTol) {
          parent[w] = v;
          queue.push_back(w);
        }
    }
    if (parent[in.sink] < 0) break;
    double bottleneck = std::numeric_limits<double>::infinity();
    for (int v = in.sink; v != in.source; v = parent[v])
      bottleneck = std::min(bottleneck, cap[parent[v]][v]);
    for (int v = in.sink; v != in.source; v = parent[v]) {
      cap[parent[v]][v] -= bottleneck;
      cap[v][parent[v]] += bottleneck;
    }
    total += bottleneck;
  }
  return total;
}

}  // namespace

TEST_CASE("blocking flow on a single path saturates the bottleneck") {
  FlowNetwork net;
  int s = net.add_node(), u = net.add_node(), v = net.add_node(),
      t = net.add_node();
  net.source = s;
  net.sink = t;
  int a0 = net.add_arc(s, u, 2.0);
  int a1 = net.add_arc(u, v, 1.0);
  int a2 = net.add_arc(v, t, 3.0);
  blocking_flow(net);
  CHECK(net.flow_value() == Catch::Approx(1.0));
  CHECK(net.arcs[a1].saturated());
  CHECK_FALSE(net.arcs[a0].saturated());
  CHECK_FALSE(net.arcs[a2].saturated());
  CHECK_FALSE(has_unsaturated_path(net));
}

TEST_CASE("blocking flow on two disjoint paths") {
  FlowNetwork net;
  int s = net.add_node(), a = net.add_node(), b = net.add_node(),
      t = net.add_node();
  net.source = s;
  net.sink = t;
  net.add_arc(s, a, 1.0);
  net.add_arc(a, t, 5.0);
  net.add_arc(s, b, 2.0);
  net.add_arc(b, t, 2.0);
  blocking_flow(net);
  CHECK(net.flow_value() == Catch::Approx(3.0));
  CHECK_FALSE(has_unsaturated_path(net));
}

TEST_CASE("blocking flow on the diamond equals max flow") {
  FlowNetwork net;
  int s = net.add_node(), a = net.add_node(), b = net.add_node(),
      c = net.add_node(), t = net.add_node();
  net.source = s;
  net.sink = t;
  net.add_arc(s, a, 2.0);
  net.add_arc(a, b, 1.0);
  net.add_arc(a, c, 1.0);
  net.add_arc(b, t, 1.0);
  net.add_arc(c, t, 2.0);
  FlowNetwork oracle = net;
  blocking_flow(net);
  CHECK(net.flow_value() == Catch::Approx(2.0));
  CHECK(net.flow_value() == Catch::Approx(max_flow_bruteforce(oracle)));
  CHECK(max_conservation_error(net) < 1e-12);
}

TEST_CASE("cycle detection") {
  FlowNetwork net;
  int a = net.add_node(), b = net.add_node();
  net.source = a;
  net.sink = b;
  net.add_arc(a, b, 1.0);
  net.add_arc(b, a, 1.0);
  CHECK_THROWS(blocking_flow(net));
}

TEST_CASE("random layered DAGs: blocking property, max flow on short nets") {
  std::mt19937_64 rng(2024);
  auto draw = [&](std::uint64_t bound) {
    return ldl::detail::bounded_draw(rng, bound);
  };
  int checked_short = 0;
  for (int trial = 0; trial < 200; ++trial) {
    int layers = 2 + static_cast<int>(draw(3));  // 2..4 vertex rows
    std::vector<std::vector<int>> row(layers);
    FlowNetwork net;
    int total_nodes = 0;
    for (int l = 0; l < layers; ++l) {
      int width = 1 + static_cast<int>(draw(3));
      if (total_nodes + width > 12) width = std::max(1, 12 - total_nodes);
      for (int i = 0; i < width; ++i) row[l].push_back(net.add_node());
      total_nodes += width;
    }
    net.source = net.add_node();
    net.sink = net.add_node();
    // Downward arcs, including layer skips.
    for (int l = 0; l < layers; ++l)
      for (int u : row[l])
        for (int l2 = l + 1; l2 < layers; ++l2)
          for (int v : row[l2])
            if (draw(100) < 55) {
              double cap = (1 + draw(8)) / 2.0;
              net.add_arc(u, v, cap);
            }
    for (int u : row[0]) net.add_arc(net.source, u, 1e9);
    for (int v : row[layers - 1]) net.add_arc(v, net.sink, 1e9);

    FlowNetwork oracle = net;
    blocking_flow(net);
    CHECK_FALSE(has_unsaturated_path(net));
    CHECK(max_conservation_error(net) < 1e-9);
    for (const auto& arc : net.arcs) {
      CHECK(arc.flow >= -1e-12);
      CHECK(arc.flow <= arc.capacity + 1e-12);
    }
    if (layers <= 3) {
      ++checked_short;
      CHECK(net.flow_value() ==
            Catch::Approx(max_flow_bruteforce(oracle)).margin(1e-7));
    }
  }
  CHECK(checked_short > 50);
}
