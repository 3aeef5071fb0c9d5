#include "catch_amalgamated.hpp"
#include "ldl/exact.hpp"
#include "ldl/graph.hpp"
#include "ldl/local_algo.hpp"

using namespace ldl;

TEST_CASE("whole-graph degeneration: K3 outputs exactly 1") {
  Graph k3 = make_clique(3);
  auto res = local_density_local_model(k3, 0.5);
  CHECK(res.trace.rounds == static_cast<std::uint64_t>(res.k));
  for (int v = 0; v < 3; ++v) CHECK(res.rho[v] == Catch::Approx(1.0).margin(1e-9));
}

TEST_CASE("round count equals the schedule exactly") {
  for (double eps : {1.0, 0.5}) {
    Graph g = make_gnm(9, 16, 4);
    auto res = local_density_local_model(g, eps);
    CHECK(res.k == schedule_k(eps, 9));
    CHECK(res.trace.rounds == static_cast<std::uint64_t>(res.k));
    CHECK(res.trace.all_halted);
  }
}

TEST_CASE("outputs sandwich the exact local density") {
  auto check_sandwich = [](const Graph& g, double eps) {
    auto res = local_density_local_model(g, eps);
    auto exact = local_density_exact(g);
    for (int v = 0; v < g.n(); ++v) {
      double rs = exact.rho_star[v].to_double();
      CHECK(res.rho[v] >= rs / (1.0 + eps) - 1e-7);
      CHECK(res.rho[v] <= rs * (1.0 + eps) + 1e-7);
    }
  };
  check_sandwich(make_lollipop(4, 3), 0.5);
  check_sandwich(make_path(10), 1.0);
  check_sandwich(make_star(3), 0.5);
}

TEST_CASE("k at or beyond the diameter reproduces the oracle exactly") {
  Graph lolli = make_lollipop(4, 3);
  auto res = local_density_local_model(lolli, 0.5);  // k = 32 >= diameter 4
  auto exact = local_density_exact(lolli);
  for (int v = 0; v < lolli.n(); ++v)
    CHECK(res.rho[v] ==
          Catch::Approx(exact.rho_star[v].to_double()).margin(1e-7));
}

TEST_CASE("monotone refinement: outputs stable once k covers the graph") {
  Graph g = make_gnm(8, 12, 11);
  auto base = local_density_local_model(g, 1.0);          // k >= diameter here
  auto refined = local_density_local_model(g, 1.0, 2.0);  // double the radius
  REQUIRE(refined.k > base.k);
  for (int v = 0; v < g.n(); ++v)
    CHECK(base.rho[v] == Catch::Approx(refined.rho[v]).margin(1e-9));
}

TEST_CASE("truncated horizons still output positive estimates") {
  // A tiny multiplier clamps the gathering radius below the diameter; the
  // estimates then see only part of the graph but stay positive and finite.
  Graph p10 = make_path(10);
  auto res = local_density_local_model(p10, 1.0, 0.1);
  REQUIRE(res.k < 9);
  for (int v = 0; v < 10; ++v) {
    CHECK(res.rho[v] > 0.0);
    CHECK(res.rho[v] <= 1.0);
  }
}

TEST_CASE("weighted graphs are rejected") {
  Graph w = load_graph("3 2 weighted\n0 1 2\n1 2 1\n");
  CHECK_THROWS(local_density_local_model(w, 0.5));
}
