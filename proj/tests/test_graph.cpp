#include <set>

#include "catch_amalgamated.hpp"
#include "ldl/graph.hpp"

using namespace ldl;

TEST_CASE("load_graph accepts the smallest graphs") {
  Graph g = load_graph("2 1 unit\n0 1\n");
  CHECK(g.n() == 2);
  CHECK(g.m() == 1);
  CHECK(g.unit_weight());

  Graph k3 = load_graph("3 3 unit\n0 1\n1 2\n0 2\n");
  CHECK(k3.n() == 3);
  CHECK(k3.m() == 3);
}

TEST_CASE("load_graph rejects malformed input with line numbers") {
  CHECK_THROWS_WITH(load_graph("2 1 unit\n0 0\n"),
                    Catch::Matchers::ContainsSubstring("line 2"));
  CHECK_THROWS_WITH(load_graph("2 2 unit\n0 1\n0 1\n"),
                    Catch::Matchers::ContainsSubstring("duplicate"));
  CHECK_THROWS_WITH(load_graph("2 1 unit\n0 5\n"),
                    Catch::Matchers::ContainsSubstring("range"));
  CHECK_THROWS_WITH(load_graph("2 1 weighted\n0 1 -1\n"),
                    Catch::Matchers::ContainsSubstring("nonpositive"));
  CHECK_THROWS(load_graph("junk\n"));
}

TEST_CASE("serialize round-trips") {
  for (const char* spec : {"clique(4)", "path(7)", "star(3)", "lollipop(4,3)",
                           "gnm(9,14,3)"}) {
    Graph g = generate(spec);
    std::string text = serialize_graph(g);
    Graph back = load_graph(text);
    CHECK(serialize_graph(back) == text);
  }
  Graph w = load_graph("3 2 weighted\n0 1 3/2\n1 2 0.25\n");
  Graph back = load_graph(serialize_graph(w));
  CHECK(back.edge(0).weight == Rational(3, 2));
  CHECK(back.edge(1).weight == Rational(1, 4));
}

TEST_CASE("khop subgraphs") {
  Graph k3 = make_clique(3);
  Subgraph zero = khop_subgraph(k3, 0, 0);
  CHECK(zero.vertices == std::vector<int>{0});
  CHECK(zero.edge_ids.empty());

  Graph p4 = make_path(4);
  Subgraph two = khop_subgraph(p4, 0, 2);
  CHECK(two.vertices == std::vector<int>{0, 1, 2});
  CHECK(two.edge_ids.size() == 2);

  // Lollipop tail end, one hop: the tail vertex plus its neighbor.
  Graph lolli = make_lollipop(4, 3);
  Subgraph tail = khop_subgraph(lolli, 6, 1);
  CHECK(tail.vertices == std::vector<int>{5, 6});
  CHECK(tail.edge_ids.size() == 1);

  // k >= diameter covers the whole component.
  Graph p5 = make_path(5);
  CHECK(khop_subgraph(p5, 2, 4).vertices.size() == 5);
}

TEST_CASE("generators") {
  Graph k4 = make_clique(4);
  CHECK(k4.n() == 4);
  CHECK(k4.m() == 6);

  Graph lolli = make_lollipop(4, 3);
  CHECK(lolli.n() == 7);
  CHECK(lolli.m() == 9);

  Graph star = make_star(3);
  CHECK(star.n() == 4);
  CHECK(star.m() == 3);
  CHECK(star.incident(0).size() == 3);

  CHECK_THROWS(make_gnm(10, 100, 1));  // infeasible m
}

TEST_CASE("gnm determinism and uniqueness") {
  Graph a = make_gnm(10, 15, 7);
  Graph b = make_gnm(10, 15, 7);
  CHECK(serialize_graph(a) == serialize_graph(b));
  CHECK(a.m() == 15);
  std::set<std::pair<int, int>> seen;
  for (const Graph::Edge& e : a.edges()) CHECK(seen.insert({e.u, e.v}).second);
  // A different seed gives a different graph (with overwhelming margin).
  Graph c = make_gnm(10, 15, 8);
  CHECK(serialize_graph(a) != serialize_graph(c));
}

TEST_CASE("generate parses spec strings") {
  CHECK(generate("clique(4)").m() == 6);
  CHECK(generate("lollipop(4,3)").n() == 7);
  CHECK(generate("gnm(10,15,7)").m() == 15);
  CHECK_THROWS(generate("torus(3)"));
  CHECK_THROWS(generate("clique"));
}

TEST_CASE("components") {
  // Two triangles, disjoint.
  Graph g = load_graph("6 6 unit\n0 1\n1 2\n0 2\n3 4\n4 5\n3 5\n");
  auto comps = g.components();
  REQUIRE(comps.size() == 2);
  CHECK(comps[0] == std::vector<int>{0, 1, 2});
  CHECK(comps[1] == std::vector<int>{3, 4, 5});
  CHECK_FALSE(g.connected());
  CHECK(make_path(5).connected());
}
