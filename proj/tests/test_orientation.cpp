#include <cmath>
#include <random>

#include "catch_amalgamated.hpp"
#include "ldl/exact.hpp"
#include "ldl/graph.hpp"
#include "ldl/orientation.hpp"

using namespace ldl;

namespace {

double recompute_gap(const FractionalOrientation& o) {
  auto fresh = o.recompute_out_degrees();
  double worst = 0.0;
  for (int v = 0; v < o.graph().n(); ++v)
    worst = std::max(worst, std::abs(fresh[v] - o.out_degree(v)));
  return worst;
}

double conservation_gap(const FractionalOrientation& o) {
  const Graph& g = o.graph();
  double worst = 0.0;
  for (int e = 0; e < g.m(); ++e) {
    if (o.edge_removed(e)) continue;
    double sum = o.mass_from(e, g.edge(e).u) + o.mass_from(e, g.edge(e).v);
    worst = std::max(worst, std::abs(sum - g.edge(e).weight.to_double()));
  }
  return worst;
}

}  // namespace

TEST_CASE("init_half splits evenly") {
  Graph k3 = make_clique(3);
  auto o = init_half(k3);
  for (int v = 0; v < 3; ++v) CHECK(o.out_degree(v) == 1.0);

  Graph star = make_star(3);
  auto os = init_half(star);
  CHECK(os.out_degree(0) == 1.5);
  for (int v = 1; v <= 3; ++v) CHECK(os.out_degree(v) == 0.5);

  Graph k2 = make_path(2);
  auto ok2 = init_half(k2);
  CHECK(ok2.out_degree(0) == 0.5);
  CHECK(ok2.out_degree(1) == 0.5);
}

TEST_CASE("fairness predicates") {
  Graph star = make_star(3);

  SECTION("solver output is locally fair") {
    auto fair = solve_fo2(star, 1e-9);
    CHECK(is_locally_fair(fair).empty());
    CHECK(is_eta_fair(fair, 0.37).empty());
  }

  SECTION("init_half of the star violates local fairness center-out") {
    auto o = init_half(star);
    auto v = is_locally_fair(o);
    CHECK(v.size() == 3);
    for (auto& viol : v) CHECK(viol.from == 0);
  }

  SECTION("eta thresholds") {
    auto o = init_half(star);
    CHECK(is_eta_fair(o, 0.1).size() == 3);  // 3/2 > 1.1 * 1/2
    CHECK(is_eta_fair(o, 2.0).empty());      // 3/2 <= 3 * 1/2
  }

  SECTION("single edge fully oriented") {
    Graph k2 = make_path(2);
    auto o = init_half(k2);
    o.flip(0, 1, 0.5);  // all mass now points 0 -> 1
    auto v = is_locally_fair(o);
    REQUIRE(v.size() == 1);
    CHECK(v[0].from == 0);
  }
}

TEST_CASE("level_of") {
  double eta = 0.5;
  double base = 1.0 + eta / 2;

  CHECK(level_of(1.0, eta) == 0);
  CHECK(level_of(0.0, eta) == kSentinelLevel);
  CHECK(level_of(std::pow(base, 5) * 1.01, eta) == 5);
  CHECK(level_of(std::pow(base, 5) * 0.99, eta) == 4);

  // Boundary rule: exact powers resolve against the motion direction.
  double b3 = std::pow(base, 3);
  CHECK(level_of(b3, eta, LevelMove::kDown) == 3);
  CHECK(level_of(b3, eta, LevelMove::kUp) == 2);
  CHECK(level_of(b3, eta, LevelMove::kNone) == 3);

  // Monotone in value.
  int prev = kSentinelLevel;
  for (double v = 0.1; v < 40.0; v *= 1.07) {
    int l = level_of(v, eta);
    CHECK(l >= prev);
    prev = l;
  }

  // Negative levels for sub-unit values.
  CHECK(level_of(0.5, eta) < 0);
}

TEST_CASE("eta_for and schedule_k formulas") {
  CHECK(eta_for(0.5, 1024) == Catch::Approx(0.25 / 1280.0).epsilon(1e-12));
  CHECK(eta_for(1.0, 2) == Catch::Approx(1.0 / 128.0).epsilon(1e-12));
  CHECK(schedule_k(0.5, 1024) == 400);
  CHECK(schedule_k(1.0, 2) == 1);
  CHECK_THROWS(eta_for(0.0, 10));
  CHECK_THROWS(eta_for(1.5, 10));
  CHECK_THROWS(schedule_k(0.5, 1));
}

TEST_CASE("decrease flips a single fully oriented edge") {
  Graph k2 = make_path(2);
  auto o = init_half(k2);
  o.flip(0, 1, 0.5);  // g(0->1) = 1
  REQUIRE(o.out_degree(0) == 1.0);
  auto stats = decrease(o, 0, 1, 1.0, /*eta=*/1.0);
  CHECK(stats.depth == 0);
  CHECK(o.out_degree(0) == 0.0);
  CHECK(o.out_degree(1) == 1.0);
}

TEST_CASE("decrease cascades along a directed path") {
  // a -> b -> c, each edge fully oriented with unit weight.
  Graph p3 = make_path(3);
  auto o = init_half(p3);
  o.flip(0, 1, 0.5);  // g(a->b) = 1
  o.flip(1, 2, 0.5);  // g(b->c) = 1
  REQUIRE(o.out_degree(0) == 1.0);
  REQUIRE(o.out_degree(1) == 1.0);

  auto stats = decrease(o, 1, 2, 1.0, /*eta=*/0.1);
  CHECK(o.out_degree(0) == Catch::Approx(0.0).margin(1e-12));
  CHECK(o.out_degree(1) == Catch::Approx(1.0).margin(1e-12));
  CHECK(o.out_degree(2) == Catch::Approx(1.0).margin(1e-12));
  CHECK(stats.depth == 1);
  CHECK(conservation_gap(o) < 1e-12);
  CHECK(recompute_gap(o) < 1e-12);
}

TEST_CASE("decrease rejects overdraw and accepts zero") {
  Graph k2 = make_path(2);
  auto o = init_half(k2);
  CHECK_THROWS(decrease(o, 0, 1, 0.75, 0.1));
  auto before = o.out_degree(0);
  auto stats = decrease(o, 0, 1, 0.0, 0.1);
  CHECK(stats.transfers == 0);
  CHECK(o.out_degree(0) == before);
}

TEST_CASE("delete_edge_maintaining_fairness keeps eta-fairness") {
  double eta = 0.1;

  SECTION("fair P3, delete middle-to-end edge") {
    Graph p3 = make_path(3);
    auto o = solve_fo2(p3, 1e-12);
    REQUIRE(is_eta_fair(o, eta).empty());
    delete_edge_maintaining_fairness(o, 1, eta);
    CHECK(is_eta_fair(o, eta).empty());
    CHECK(conservation_gap(o) < 1e-9);
  }

  SECTION("two-vertex graph, delete the only edge") {
    Graph k2 = make_path(2);
    auto o = solve_fo2(k2, 1e-12);
    delete_edge_maintaining_fairness(o, 0, eta);
    CHECK(o.out_degree(0) == 0.0);
    CHECK(o.out_degree(1) == 0.0);
    CHECK(is_eta_fair(o, eta).empty());
  }

  SECTION("fair lollipop, delete a tail edge") {
    Graph lolli = make_lollipop(4, 3);
    auto o = solve_fo2(lolli, 1e-12);
    std::vector<double> clique_before;
    for (int v = 0; v < 4; ++v) clique_before.push_back(o.out_degree(v));
    int tail_edge = -1;
    for (int e = 0; e < lolli.m(); ++e)
      if (lolli.edge(e).u == 5 && lolli.edge(e).v == 6) tail_edge = e;
    REQUIRE(tail_edge >= 0);
    delete_edge_maintaining_fairness(o, tail_edge, eta);
    CHECK(is_eta_fair(o, eta).empty());
    for (int v = 0; v < 4; ++v)
      CHECK(o.out_degree(v) == Catch::Approx(clique_before[v]).margin(1e-9));
  }
}

TEST_CASE("random deletion sequences stay fair with bounded depth") {
  for (double eta : {0.1, 0.01}) {
    Graph g = make_gnm(12, 30, 5);
    auto o = solve_fo2(g, 1e-12);
    std::mt19937_64 rng(99);
    std::vector<int> alive(g.m());
    for (int e = 0; e < g.m(); ++e) alive[e] = e;
    int depth_bound =
        static_cast<int>(std::ceil(std::log2(12.0) / std::log2(1.0 + eta))) + 1;
    while (!alive.empty()) {
      std::size_t pick = detail::bounded_draw(rng, alive.size());
      int e = alive[pick];
      alive.erase(alive.begin() + pick);
      auto stats = delete_edge_maintaining_fairness(o, e, eta);
      CHECK(stats.depth <= depth_bound);
      REQUIRE(is_eta_fair(o, eta).empty());
    }
  }
}

TEST_CASE("approx_check sandwich") {
  Graph k3 = make_clique(3);
  LocalDensityMap exact = local_density_exact(k3);

  auto fair = solve_fo2(k3, 1e-10);
  CHECK(approx_check(fair, exact.rho_star, 0.5).pass);
  CHECK(approx_check(init_half(k3), exact.rho_star, 0.5).pass);

  // One edge fully one-way on a single-edge graph fails both vertices.
  Graph k2 = make_path(2);
  LocalDensityMap ek2 = local_density_exact(k2);
  auto o = init_half(k2);
  o.flip(0, 1, 0.5);
  auto rep = approx_check(o, ek2.rho_star, 0.1);
  CHECK_FALSE(rep.pass);
  CHECK_FALSE(rep.entries[0].pass);
  CHECK_FALSE(rep.entries[1].pass);
}

TEST_CASE("solver invariants on random graphs") {
  for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
    Graph g = make_gnm(9, 16, seed);
    auto o = solve_fo2(g, 1e-10);
    CHECK(conservation_gap(o) < 1e-9);
    CHECK(recompute_gap(o) < 1e-9);
    double total = 0.0;
    for (int v = 0; v < g.n(); ++v) total += o.out_degree(v);
    CHECK(total == Catch::Approx(g.total_weight().to_double()).margin(1e-9));
  }
}
