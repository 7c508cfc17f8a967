#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <sstream>

#include "confdim/filling_graph.hpp"
#include "confdim/nets.hpp"
#include "confdim/point_cloud.hpp"

using namespace confdim;

namespace {
PointCloudSpace three_points() {
  // a,b,c on a line at 0, 1/4, 1/2 (already diameter 1/2)
  return PointCloudSpace::from_matrix(
      {"a", "b", "c"}, {{0.0, 0.25, 0.5}, {0.25, 0.0, 0.25}, {0.5, 0.25, 0.0}}, "line3");
}
}  // namespace

TEST_CASE("greedy nets on three points") {
  auto s = three_points();
  auto nets = build_nets(s, 8.0, 1);
  REQUIRE(nets.levels[0] == std::vector<int>{0});
  REQUIRE(nets.levels[1] == std::vector<int>{0, 1, 2});  // all gaps >= 1/8
  CHECK(check_nets(s, nets).ok());
}

TEST_CASE("net cardinalities on the interval grow like alpha^n") {
  auto s = generate_grid(1025);
  auto nets = build_nets(s, 4.0, 5);
  CHECK(check_nets(s, nets).ok());
  for (int n = 1; n <= 5; ++n) {
    const double ideal = std::pow(4.0, n);
    const double got = nets.level_size(n);
    CHECK(got >= ideal / 4.0);
    CHECK(got <= ideal * 4.0);
  }
}

TEST_CASE("levels below the minimum gap saturate to the whole point set") {
  auto s = generate_grid(17);  // min gap 1/32
  auto nets = build_nets(s, 2.0, 8);
  CHECK(nets.saturated_from > 0);
  CHECK(nets.level_size(8) == 17);
  CHECK(check_nets(s, nets).ok());
}

TEST_CASE("alpha below 2 is rejected; theory mode enforces the K_d bound") {
  auto s = generate_grid(17);
  CHECK_THROWS_AS(build_nets(s, 1.5, 3), config_error);
  Diagnostics strict(Mode::theory);
  CHECK_THROWS_AS(build_nets(s, 3.0, 3, &strict, /*K_d=*/2.0), construction_error);
  Diagnostics loose(Mode::practical);
  auto nets = build_nets(s, 3.0, 3, &loose, /*K_d=*/2.0);
  CHECK(loose.failures() == 1);
  CHECK(nets.L == 3);
}

TEST_CASE("three-point filling graph matches the forced adjacency") {
  auto s = three_points();
  auto nets = build_nets(s, 8.0, 1);
  auto g = build_graph(s, nets, 7.0);
  REQUIRE(g.vertex_count() == 4);
  // level-1 horizontal: all pairs within 2*7/8 = 7/4 -> complete triangle
  for (int i = 0; i < 3; ++i)
    CHECK(g.horiz[static_cast<size_t>(g.level_offset[1] + i)].size() == 2);
  // every level-1 vertex is a child of the root
  CHECK(g.children[0].size() == 3);
  CHECK(g.n2 == 3);
}

TEST_CASE("tau floor is always enforced") {
  auto s = three_points();
  auto nets = build_nets(s, 8.0, 1);
  CHECK_THROWS_AS(build_graph(s, nets, 5.0), config_error);
}

TEST_CASE("single-point space yields the chain graph") {
  auto s = PointCloudSpace::from_matrix({"0"}, {{0.0}});
  auto nets = build_nets(s, 3.0, 4);
  auto g = build_graph(s, nets, 7.0);
  REQUIRE(g.vertex_count() == 5);
  for (int v = 0; v < 4; ++v) {
    CHECK(g.children[static_cast<size_t>(v)] == std::vector<int>{v + 1});
    CHECK(g.horiz[static_cast<size_t>(v)].empty());
  }
}

TEST_CASE("attached tree is a connected spanning tree with forced self-parents") {
  auto s = generate_carpet(3);
  auto nets = build_nets(s, 3.0, 3);
  auto g = build_graph(s, nets, 7.0);
  attach_tree(g);
  int edges = 0;
  std::vector<int> comp(static_cast<size_t>(g.vertex_count()));
  for (int v = 0; v < g.vertex_count(); ++v) comp[static_cast<size_t>(v)] = v;
  std::function<int(int)> find = [&](int x) {
    while (comp[static_cast<size_t>(x)] != x) x = comp[static_cast<size_t>(x)] = comp[static_cast<size_t>(comp[static_cast<size_t>(x)])];
    return x;
  };
  for (int v = 1; v < g.vertex_count(); ++v) {
    const int par = g.tree_parent[static_cast<size_t>(v)];
    REQUIRE(par >= 0);
    ++edges;
    comp[static_cast<size_t>(find(v))] = find(par);
    // persisting points keep themselves as parent
    const int same = g.vertex(g.point_of(v), g.level_of(v) - 1);
    if (same >= 0) CHECK(par == same);
  }
  CHECK(edges == g.vertex_count() - 1);
  for (int v = 0; v < g.vertex_count(); ++v) CHECK(find(v) == find(0));
}

TEST_CASE("sibling and descendant combinatorics") {
  auto s = generate_carpet(2);
  auto nets = build_nets(s, 3.0, 2);
  auto g = build_graph(s, nets, 7.0);
  attach_tree(g);
  SECTION("root") {
    auto c = combinatorics(g, 0);
    CHECK(c.ancestry == std::vector<int>{0});
    CHECK(c.siblings == std::vector<int>{0});
    CHECK(c.immediate == std::vector<int>{0});
  }
  SECTION("membership and containments") {
    for (int v = 0; v < g.vertex_count(); ++v) {
      auto c = combinatorics(g, v);
      CHECK(std::find(c.immediate.begin(), c.immediate.end(), v) != c.immediate.end());
      for (int u : c.immediate)
        CHECK(std::find(c.siblings.begin(), c.siblings.end(), u) != c.siblings.end());
      if (g.level_of(v) < g.depth) {
        // graph children lie inside T(v); tree children inside graph children
        auto dg = descendants_graph(g, v, 1);
        for (int w : g.children[static_cast<size_t>(v)])
          CHECK(std::find(c.extended.begin(), c.extended.end(), w) != c.extended.end());
        auto d1 = descendants_tree(g, v, 1);
        for (int w : d1) CHECK(std::binary_search(dg.begin(), dg.end(), w));
      }
      if (g.level_of(v) >= 1) {
        auto chain = c.ancestry;
        REQUIRE(static_cast<int>(chain.size()) == g.level_of(v) + 1);
        CHECK(chain.front() == 0);
        CHECK(chain.back() == v);
      }
    }
  }
  SECTION("non-tree vertical edges satisfy the parent-adjacency conclusion") {
    Diagnostics diag(Mode::practical);
    check_vertical_parent_neighbors(g, diag);
    CHECK(diag.failures() == 0);
  }
}

TEST_CASE("resampling requires n0 within depth") {
  auto s = generate_grid(33);
  auto nets = build_nets(s, 2.0, 4);
  CHECK_THROWS_AS(resample_graph(s, nets, 5, 7.0), config_error);
  CHECK_THROWS_AS(resample_graph(s, nets, 0, 7.0), config_error);
}

TEST_CASE("edge list export format") {
  auto s = three_points();
  auto nets = build_nets(s, 8.0, 1);
  auto g = build_graph(s, nets, 7.0);
  attach_tree(g);
  std::ostringstream os;
  export_edge_list(g, os);
  const std::string text = os.str();
  CHECK(text.find("(a 0) (a 1) T") != std::string::npos);
  CHECK(text.find("(a 1) (b 1) H") != std::string::npos);
  CHECK(text.find("(a 0) (b 1) V") != std::string::npos);
  auto j = graph_summary_json(g);
  CHECK(j["vertices"] == 4);
  CHECK(j["n2"] == 3);
}
