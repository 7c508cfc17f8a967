#include <catch2/catch_amalgamated.hpp>
#include <cmath>

#include "confdim/point_cloud.hpp"

using namespace confdim;

TEST_CASE("cantor generator endpoints") {
  auto two = generate_cantor(1, 1.0 / 3.0);
  REQUIRE(two.size() == 2);
  CHECK(two.dist(0, 1) == 0.5);  // normalization pins the diameter

  auto four = generate_cantor(2, 1.0 / 3.0);
  REQUIRE(four.size() == 4);
  // pre-normalization points {0, 2/9, 6/9, 8/9}; ratios survive scaling
  CHECK(four.dist(0, 1) / four.dist(0, 3) == Catch::Approx(0.25).epsilon(1e-12));
  CHECK(four.dist(1, 2) / four.dist(0, 3) == Catch::Approx(0.5).epsilon(1e-12));

  auto deep = generate_cantor(8, 1.0 / 3.0);
  REQUIRE(deep.size() == 256);
  const double norm = 0.5 / (1.0 - std::pow(3.0, -8.0));
  CHECK(deep.min_gap() == Catch::Approx(std::pow(3.0, -8.0) * norm).epsilon(1e-12));
}

TEST_CASE("grid generator distances") {
  auto g2 = generate_grid(2);
  CHECK(g2.dist(0, 1) == 0.5);
  auto g3 = generate_grid(3);
  CHECK(g3.dist(0, 1) == Catch::Approx(0.25).margin(1e-15));
  CHECK(g3.dist(1, 2) == Catch::Approx(0.25).margin(1e-15));
  CHECK(g3.dist(0, 2) == 0.5);
  auto big = generate_grid(1025);
  CHECK(big.min_gap() == Catch::Approx(1.0 / 2048.0).epsilon(1e-12));
}

TEST_CASE("carpet generator counts") {
  CHECK(generate_carpet(1).size() == 8);
  CHECK(generate_carpet(2).size() == 64);
  CHECK_THROWS_AS(generate_carpet(5), size_error);
  CHECK_THROWS_AS(generate_carpet(6), config_error);
}

TEST_CASE("normalization is idempotent bit-exactly") {
  auto s = generate_cantor(6, 0.3);
  std::vector<std::vector<double>> before(static_cast<size_t>(s.size()),
                                          std::vector<double>(static_cast<size_t>(s.size())));
  for (int i = 0; i < s.size(); ++i)
    for (int j = 0; j < s.size(); ++j) before[static_cast<size_t>(i)][static_cast<size_t>(j)] = s.dist(i, j);
  s.normalize();
  for (int i = 0; i < s.size(); ++i)
    for (int j = 0; j < s.size(); ++j)
      CHECK(s.dist(i, j) == before[static_cast<size_t>(i)][static_cast<size_t>(j)]);
}

TEST_CASE("snowflake with exponent one is the identity") {
  auto s = generate_grid(33);
  auto t = snowflake(s, 1.0);
  for (int i = 0; i < s.size(); ++i)
    for (int j = 0; j < s.size(); ++j) CHECK(t.dist(i, j) == s.dist(i, j));
  CHECK_THROWS_AS(snowflake(s, 0.0), config_error);
  CHECK_THROWS_AS(snowflake(s, 1.5), config_error);
}

TEST_CASE("snowflake composition preserves distance ratios") {
  auto s = generate_cantor(5, 1.0 / 3.0);
  auto ab = snowflake(snowflake(s, 0.7), 0.6);
  auto direct = snowflake(s, 0.42);
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    const int i = static_cast<int>(rng.below(static_cast<uint64_t>(s.size())));
    const int j = static_cast<int>(rng.below(static_cast<uint64_t>(s.size())));
    const int k = static_cast<int>(rng.below(static_cast<uint64_t>(s.size())));
    const int l = static_cast<int>(rng.below(static_cast<uint64_t>(s.size())));
    if (i == j || k == l) continue;
    const double r1 = ab.dist(i, j) / ab.dist(k, l);
    const double r2 = direct.dist(i, j) / direct.dist(k, l);
    CHECK(r1 == Catch::Approx(r2).epsilon(1e-10));
  }
}

TEST_CASE("snowflaked grid still satisfies the triangle inequality") {
  auto s = snowflake(generate_grid(513), 0.5);
  auto rep = s.validate();
  CHECK(rep.ok());
}

TEST_CASE("generated spaces pass exhaustive metric validation") {
  CHECK(generate_cantor(8, 1.0 / 3.0).validate().ok());
  CHECK(generate_carpet(2).validate().ok());
  CHECK(generate_grid(513).validate().ok());
}

TEST_CASE("constant estimation") {
  SECTION("two-point space: no annulus constraint is active") {
    auto s = PointCloudSpace::from_matrix({"a", "b"}, {{0.0, 1.0}, {1.0, 0.0}});
    auto sc = estimate_constants(s);
    CHECK(sc.doubling_N == 1);
    CHECK(sc.K_d == Catch::Approx(2.0 + 1e-9).margin(1e-12));
  }
  SECTION("grid: doubling at most 5, uniform perfectness at the clamp") {
    auto sc = estimate_constants(generate_grid(1025));
    CHECK(sc.doubling_N <= 5);
    CHECK(sc.K_d <= 2.0 + 1e-6);
    CHECK(sc.N1 == static_cast<long long>(std::pow(sc.doubling_N, 6)));
  }
  SECTION("cantor: finite doubling, K_d at most 4 at resolved scales") {
    auto sc = estimate_constants(generate_cantor(8, 1.0 / 3.0));
    CHECK(sc.doubling_N >= 2);
    CHECK(sc.K_d <= 4.0 + 1e-9);
  }
  SECTION("single point is rejected") {
    auto s = PointCloudSpace::from_matrix({"0"}, {{0.0}});
    CHECK_THROWS_AS(estimate_constants(s), config_error);
  }
}

TEST_CASE("json round trip") {
  auto s = generate_cantor(4, 0.25);
  auto j = s.to_json();
  auto t = PointCloudSpace::from_json(j, /*normalize=*/false);
  REQUIRE(t.size() == s.size());
  for (int i = 0; i < s.size(); ++i)
    for (int k = 0; k < s.size(); ++k) CHECK(t.dist(i, k) == s.dist(i, k));
  CHECK(t.to_json().dump() == j.dump());
}

TEST_CASE("coords ingestion with sup metric") {
  auto s = PointCloudSpace::from_coords({{0.0, 0.0}, {1.0, 0.5}, {0.25, 2.0}}, "sup", "", false);
  CHECK(s.dist(0, 1) == 1.0);
  CHECK(s.dist(0, 2) == 2.0);
  CHECK(s.dist(1, 2) == 1.5);
  CHECK_THROWS_AS(PointCloudSpace::from_coords({{0.0}}, "manhattan"), config_error);
}

TEST_CASE("size caps are enforced") {
  CHECK_THROWS_AS(generate_grid(5000), size_error);
  CHECK_THROWS_AS(generate_cantor(13, 1.0 / 3.0), size_error);
}
