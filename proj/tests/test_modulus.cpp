#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "confdim/dimension.hpp"
#include "confdim/modulus.hpp"
#include "confdim/point_cloud.hpp"

using namespace confdim;

namespace {

/// Synthetic family: a single chain of m vertices, source at one end, sink
/// at the other.
PathFamily make_chain(int m) {
  PathFamily f;
  f.vertices.resize(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i) f.vertices[static_cast<size_t>(i)] = i;
  f.adj.assign(static_cast<size_t>(m), {});
  for (int i = 0; i + 1 < m; ++i) {
    f.adj[static_cast<size_t>(i)].push_back(i + 1);
    f.adj[static_cast<size_t>(i + 1)].push_back(i);
  }
  f.is_source.assign(static_cast<size_t>(m), 0);
  f.is_sink.assign(static_cast<size_t>(m), 0);
  f.is_source[0] = 1;
  f.is_sink[static_cast<size_t>(m - 1)] = 1;
  return f;
}

/// Disjoint union of chains.
PathFamily make_chains(const std::vector<int>& lengths) {
  PathFamily f;
  int base = 0;
  for (int m : lengths) {
    for (int i = 0; i < m; ++i) {
      f.vertices.push_back(base + i);
      f.adj.push_back({});
      f.is_source.push_back(i == 0 ? 1 : 0);
      f.is_sink.push_back(i == m - 1 ? 1 : 0);
    }
    for (int i = 0; i + 1 < m; ++i) {
      f.adj[static_cast<size_t>(base + i)].push_back(base + i + 1);
      f.adj[static_cast<size_t>(base + i + 1)].push_back(base + i);
    }
    base += m;
  }
  return f;
}

/// Seeded random level-graph family for solver/oracle cross-checks.
PathFamily make_random_family(Rng& rng, int n) {
  PathFamily f;
  f.vertices.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) f.vertices[static_cast<size_t>(i)] = i;
  f.adj.assign(static_cast<size_t>(n), {});
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.below(100) < 30) {
        f.adj[static_cast<size_t>(i)].push_back(j);
        f.adj[static_cast<size_t>(j)].push_back(i);
      }
  f.is_source.assign(static_cast<size_t>(n), 0);
  f.is_sink.assign(static_cast<size_t>(n), 0);
  for (int i = 0; i < n; ++i) {
    const auto roll = rng.below(100);
    if (roll < 25) f.is_source[static_cast<size_t>(i)] = 1;
    else if (roll < 45) f.is_sink[static_cast<size_t>(i)] = 1;
  }
  return f;
}

}  // namespace

TEST_CASE("single-path families have modulus m^(1-p)") {
  for (int m = 1; m <= 12; ++m) {
    auto f = make_chain(m);
    for (double p : {1.0, 1.5, 2.0, 3.0}) {
      const double expect = std::pow(m, 1.0 - p);
      auto solved = solve_modulus(f, p);
      auto brute = brute_force_modulus(f, p);
      INFO("m=" << m << " p=" << p);
      CHECK(solved.status == ModulusStatus::optimal);
      CHECK(std::abs(solved.value - expect) < 1e-9);
      CHECK(std::abs(brute.value - expect) < 1e-9);
    }
  }
}

TEST_CASE("disjoint unions are additive") {
  auto f = make_chains({2, 3});
  auto solved = solve_modulus(f, 2.0);
  CHECK(std::abs(solved.value - (1.0 / 2.0 + 1.0 / 3.0)) < 1e-8);
  auto brute = brute_force_modulus(f, 2.0);
  CHECK(std::abs(brute.value - 5.0 / 6.0) < 1e-8);

  Rng rng(11);
  auto a = make_random_family(rng, 8);
  auto b = make_random_family(rng, 9);
  std::vector<int> lens;
  PathFamily uni;
  {
    uni = a;
    const int base = a.size();
    for (int i = 0; i < b.size(); ++i) {
      uni.vertices.push_back(base + i);
      uni.adj.push_back({});
      for (int w : b.adj[static_cast<size_t>(i)]) uni.adj.back().push_back(base + w);
      uni.is_source.push_back(b.is_source[static_cast<size_t>(i)]);
      uni.is_sink.push_back(b.is_sink[static_cast<size_t>(i)]);
    }
  }
  for (double p : {1.0, 1.5, 2.0}) {
    const double va = solve_modulus(a, p).value;
    const double vb = solve_modulus(b, p).value;
    const double vu = solve_modulus(uni, p).value;
    CHECK(std::abs(vu - (va + vb)) < 1e-8);
  }
}

TEST_CASE("empty families report exact zero") {
  PathFamily f = make_chain(4);
  std::fill(f.is_sink.begin(), f.is_sink.end(), 0);  // no sink anywhere
  auto r = solve_modulus(f, 2.0);
  CHECK(r.status == ModulusStatus::empty_family);
  CHECK(r.value == 0.0);
}

TEST_CASE("p=1 single path puts unit mass on one vertex") {
  auto f = make_chain(5);
  auto r = solve_modulus(f, 1.0);
  CHECK(std::abs(r.value - 1.0) < 1e-9);
  double total = 0.0, maxel = 0.0;
  for (double s : r.sigma) {
    total += s;
    maxel = std::max(maxel, s);
  }
  CHECK(std::abs(total - 1.0) < 1e-9);
  CHECK(maxel > 0.5);
}

TEST_CASE("p below 1 is rejected") {
  auto f = make_chain(3);
  CHECK_THROWS_AS(solve_modulus(f, 0.5), config_error);
  CHECK_THROWS_AS(brute_force_modulus(f, 0.9), config_error);
}

TEST_CASE("solver matches the brute-force oracle on random families") {
  Rng rng(17);
  int tested = 0;
  for (int trial = 0; trial < 120 && tested < 40; ++trial) {
    auto f = make_random_family(rng, 6 + static_cast<int>(rng.below(9)));
    auto count = count_paths(f, 200);
    if (!count || *count == 0) continue;
    ++tested;
    for (double p : {1.0, 1.5, 2.0, 3.0}) {
      auto solved = solve_modulus(f, p);
      auto brute = brute_force_modulus(f, p);
      INFO("trial=" << trial << " p=" << p << " paths=" << *count);
      const double scale = std::max({1e-12, solved.value, brute.value});
      CHECK(std::abs(solved.value - brute.value) / scale < 1e-6);
    }
  }
  CHECK(tested >= 40);
}

TEST_CASE("modulus is monotone nonincreasing in p") {
  Rng rng(23);
  for (int trial = 0; trial < 10; ++trial) {
    auto f = make_random_family(rng, 10);
    if (!detail::family_has_route(f)) continue;
    double prev = std::numeric_limits<double>::infinity();
    for (double p : {1.0, 1.5, 2.0, 3.0}) {
      const double v = solve_modulus(f, p).value;
      CHECK(v <= prev + 1e-8);
      prev = v;
    }
  }
}

TEST_CASE("solved densities stay feasible on random family paths") {
  Rng rng(29);
  auto f = make_random_family(rng, 12);
  if (!detail::family_has_route(f)) return;
  auto r = solve_modulus(f, 1.5);
  Rng sampler(31);
  int checked = 0;
  for (int t = 0; t < 1000; ++t) {
    auto path = sample_path(f, sampler);
    if (path.empty()) continue;
    ++checked;
    double s = 0.0;
    for (int w : path) s += r.sigma[static_cast<size_t>(w)];
    CHECK(s >= 1.0 - 1e-6);
  }
  CHECK(checked > 0);
}

TEST_CASE("graph families: single-point space has zero modulus at every scale") {
  auto space = PointCloudSpace::from_matrix({"0"}, {{0.0}}, "pt");
  auto nets = build_nets(space, 3.0, 4);
  auto g = build_graph(space, nets, 7.0);
  for (int k = 1; k <= 3; ++k) CHECK(mod_p_at_scale(g, 1.5, k).value == 0.0);
}

TEST_CASE("interval family modulus is positive at p=1") {
  auto space = generate_grid(257);
  auto nets = build_nets(space, 2.0, 6);
  auto g = build_graph(space, nets, 7.0);
  CHECK(mod_p_at_scale(g, 1.0, 2).value > 0.0);
}

TEST_CASE("cantor modulus decreases with scale offset at p=1") {
  auto space = generate_cantor(8, 1.0 / 3.0);
  auto nets = build_nets(space, 3.0, 8);
  auto g = build_graph(space, nets, 7.0);
  const double m1 = mod_p_at_scale(g, 1.0, 1).value;
  const double m2 = mod_p_at_scale(g, 1.0, 2).value;
  const double m3 = mod_p_at_scale(g, 1.0, 3).value;
  CHECK(m1 > m2);
  CHECK(m2 > m3);
}

TEST_CASE("find_n0 returns the first scale under the target") {
  auto space = generate_cantor(8, 1.0 / 3.0);
  auto nets = build_nets(space, 3.0, 8);
  auto g = build_graph(space, nets, 7.0);
  const double m1 = mod_p_at_scale(g, 1.0, 1).value;
  auto hit = find_n0(g, 1.0, m1 + 1.0, 1, 4);
  REQUIRE(hit.has_value());
  CHECK(*hit == 1);
  auto miss = find_n0(g, 1.0, 1e-12, 1, 2);
  CHECK_FALSE(miss.has_value());
}

TEST_CASE("resampled graph reproduces the original at n0=1 and matches k=2 moduli at n0=2") {
  auto space = generate_grid(65);
  auto nets = build_nets(space, 2.0, 4);
  auto g1 = build_graph(space, nets, 7.0);
  auto r1 = resample_graph(space, nets, 1, 7.0);
  REQUIRE(g1.vertex_count() == r1.vertex_count());
  for (int v = 0; v < g1.vertex_count(); ++v) CHECK(g1.horiz[static_cast<size_t>(v)] == r1.horiz[static_cast<size_t>(v)]);

  auto r2 = resample_graph(space, nets, 2, 7.0);
  // vertex sets: resampled level k equals A_{2k}
  for (int k = 0; k <= r2.depth; ++k)
    CHECK(r2.level_points[static_cast<size_t>(k)] == nets.levels[static_cast<size_t>(2 * k)]);
  // modulus at offset 1 on the resampled graph == offset 2 on the original
  for (int i = 0; i < r2.level_size(1); ++i) {
    const int vres = r2.level_offset[1] + i;
    const int vorig = g1.vertex(r2.point_of(vres), 2);
    REQUIRE(vorig >= 0);
    auto fres = build_family(r2, vres, 1);
    auto forig = build_family(g1, vorig, 2);
    const double a = solve_modulus(fres, 1.5).value;
    const double b = solve_modulus(forig, 1.5).value;
    CHECK(std::abs(a - b) <= 1e-9 * std::max(1.0, std::max(a, b)));
  }
}
