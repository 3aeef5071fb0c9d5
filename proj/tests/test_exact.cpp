#include <cmath>

#include "catch_amalgamated.hpp"
#include "ldl/exact.hpp"
#include "ldl/graph.hpp"

using namespace ldl;

TEST_CASE("density basics") {
  Graph k3 = make_clique(3);
  CHECK(density(k3, whole_graph(k3)) == Rational(1));

  Graph k2 = make_path(2);
  CHECK(density(k2, whole_graph(k2)) == Rational(1, 2));

  Graph lolli = make_lollipop(4, 3);
  CHECK(density(lolli, whole_graph(lolli)) == Rational(9, 7));

  Subgraph empty;
  empty.parent = &k3;
  CHECK_THROWS(density(k3, empty));
}

TEST_CASE("densest subgraph by enumeration") {
  Graph k3 = make_clique(3);
  auto r = densest_subgraph_bruteforce(k3);
  CHECK(r.vertices == std::vector<int>{0, 1, 2});
  CHECK(r.density == Rational(1));

  Graph lolli = make_lollipop(4, 3);
  auto rl = densest_subgraph_bruteforce(lolli);
  CHECK(rl.vertices == std::vector<int>{0, 1, 2, 3});
  CHECK(rl.density == Rational(3, 2));

  Graph p3 = make_path(3);
  auto rp = densest_subgraph_bruteforce(p3);
  CHECK(rp.vertices == std::vector<int>{0, 1, 2});
  CHECK(rp.density == Rational(2, 3));

  Graph big = make_gnm(25, 40, 1);
  CHECK_THROWS_AS(densest_subgraph_bruteforce(big), GuardError);
}

TEST_CASE("quotient density") {
  Graph k3 = make_clique(3);
  CHECK(quotient_density(k3, {}, {0, 1, 2}) == Rational(1));

  Graph lolli = make_lollipop(4, 3);
  std::vector<int> clique{0, 1, 2, 3};
  CHECK(quotient_density(lolli, clique, {4}) == Rational(1));
  CHECK(quotient_density(lolli, clique, {4, 5, 6}) == Rational(1));
  // {5} alone touches no edge closed under {5} + clique.
  CHECK(quotient_density(lolli, clique, {5}) == Rational(0));

  CHECK_THROWS(quotient_density(lolli, clique, {}));
  CHECK_THROWS(quotient_density(lolli, clique, {0}));
}

TEST_CASE("diminishing decomposition") {
  SECTION("K3 is one level") {
    auto dec = diminishing_decomposition(make_clique(3));
    REQUIRE(dec.levels.size() == 1);
    CHECK(dec.levels[0].slice == std::vector<int>{0, 1, 2});
    CHECK(dec.levels[0].density == Rational(1));
  }

  SECTION("lollipop peels clique then tail") {
    auto dec = diminishing_decomposition(make_lollipop(4, 3));
    REQUIRE(dec.levels.size() == 2);
    CHECK(dec.levels[0].slice == std::vector<int>{0, 1, 2, 3});
    CHECK(dec.levels[0].density == Rational(3, 2));
    CHECK(dec.levels[1].slice == std::vector<int>{4, 5, 6});
    CHECK(dec.levels[1].density == Rational(1));
    CHECK(dec.levels[1].before == std::vector<int>{0, 1, 2, 3});
  }

  SECTION("star is one level of density 3/4") {
    auto dec = diminishing_decomposition(make_star(3));
    REQUIRE(dec.levels.size() == 1);
    CHECK(dec.levels[0].density == Rational(3, 4));
  }

  SECTION("densities strictly decrease on random graphs") {
    for (std::uint64_t seed : {4ull, 9ull, 23ull}) {
      auto dec = diminishing_decomposition(make_gnm(10, 18, seed));
      for (std::size_t i = 1; i < dec.levels.size(); ++i)
        CHECK(dec.levels[i].density < dec.levels[i - 1].density);
    }
  }
}

TEST_CASE("local density map") {
  SECTION("P3 is uniform 2/3") {
    auto map = local_density_exact(make_path(3));
    for (int v = 0; v < 3; ++v) CHECK(map.rho_star[v] == Rational(2, 3));
  }

  SECTION("lollipop splits 3/2 vs 1") {
    auto map = local_density_exact(make_lollipop(4, 3));
    for (int v = 0; v < 4; ++v) CHECK(map.rho_star[v] == Rational(3, 2));
    for (int v = 4; v < 7; ++v) CHECK(map.rho_star[v] == Rational(1));
  }

  SECTION("single edge gives 1/2") {
    auto map = local_density_exact(make_path(2));
    CHECK(map.rho_star[0] == Rational(1, 2));
    CHECK(map.rho_star[1] == Rational(1, 2));
  }

  SECTION("max over vertices equals brute-force maximum") {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
      Graph g = make_gnm(9, 14, seed);
      CHECK(local_density_exact(g).max() ==
            densest_subgraph_bruteforce(g).density);
    }
  }
}

TEST_CASE("solve_fo2 matches local density") {
  SECTION("K3: symmetry forces out-degree 1") {
    auto o = solve_fo2(make_clique(3), 1e-9);
    for (int v = 0; v < 3; ++v)
      CHECK(o.out_degree(v) == Catch::Approx(1.0).margin(1e-9));
  }

  SECTION("star: all out-degrees 3/4") {
    auto o = solve_fo2(make_star(3), 1e-9);
    for (int v = 0; v < 4; ++v)
      CHECK(o.out_degree(v) == Catch::Approx(0.75).margin(1e-8));
  }

  SECTION("lollipop: 3/2 on the clique, 1 on the tail") {
    auto o = solve_fo2(make_lollipop(4, 3), 1e-9);
    for (int v = 0; v < 4; ++v)
      CHECK(o.out_degree(v) == Catch::Approx(1.5).margin(1e-8));
    for (int v = 4; v < 7; ++v)
      CHECK(o.out_degree(v) == Catch::Approx(1.0).margin(1e-8));
  }

  SECTION("orientation invariant: per-edge split sums to the weight") {
    Graph g = make_gnm(10, 20, 3);
    auto o = solve_fo2(g, 1e-9);
    for (int e = 0; e < g.m(); ++e) {
      double sum = o.mass_from(e, g.edge(e).u) + o.mass_from(e, g.edge(e).v);
      CHECK(sum == Catch::Approx(1.0).margin(1e-12));
      CHECK(o.mass_from(e, g.edge(e).u) >= 0.0);
      CHECK(o.mass_from(e, g.edge(e).v) >= 0.0);
    }
  }

  SECTION("sweep order does not change the out-degrees") {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      Graph g = make_gnm(9, 15, seed);
      auto fwd = solve_fo2(g, 1e-10, SweepOrder::kForward);
      auto rev = solve_fo2(g, 1e-10, SweepOrder::kReversed);
      for (int v = 0; v < g.n(); ++v)
        CHECK(fwd.out_degree(v) ==
              Catch::Approx(rev.out_degree(v)).margin(1e-8));
    }
  }

  SECTION("non-convergence carries the residual") {
    try {
      solve_fo2(make_lollipop(4, 3), 1e-9, SweepOrder::kForward, 1);
      FAIL("expected SolveError");
    } catch (const SolveError& e) {
      CHECK(e.residual > 0.0);
    }
  }
}

TEST_CASE("verify_duality") {
  SECTION("K4: max out-degree equals rho_max = 3/2") {
    auto rep = verify_duality(make_clique(4));
    CHECK(rep.pass);
    CHECK(rep.rho_max == Rational(3, 2));
    CHECK(rep.max_g == Catch::Approx(1.5).margin(1e-8));
  }

  SECTION("lollipop and gnm(8,14,1) pass at 1e-6") {
    CHECK(verify_duality(make_lollipop(4, 3), 1e-6).pass);
    CHECK(verify_duality(make_gnm(8, 14, 1), 1e-6).pass);
  }

  SECTION("weighted graphs work through the rational oracle") {
    Graph w = load_graph("4 4 weighted\n0 1 2\n1 2 1/2\n2 3 3/2\n0 3 1\n");
    auto rep = verify_duality(w, 1e-6);
    CHECK(rep.pass);
  }
}
