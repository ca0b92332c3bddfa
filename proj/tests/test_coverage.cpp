#include <doctest.h>

#include <random>
#include <sstream>

#include "fonb/coverage.hpp"
#include "test_support.hpp"

using namespace fonb;
using fonb::testing::make_dataset;

TEST_CASE("max pure radius") {
  const Dataset ds = make_dataset({{0.0}, {0.2}, {0.5}}, {0, 0, 0});
  const std::vector<int> g{0, 0, 1};
  CHECK(max_pure_radius(1, ds, g) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(max_pure_radius(0, ds, g) == 0.5);

  const Dataset dup = make_dataset({{0.3}, {0.3}, {0.9}}, {0, 0, 0});
  CHECK(max_pure_radius(0, dup, std::vector<int>{0, 1, 0}) == 0.0);

  const std::vector<int> single{0, 0, 0};
  CHECK(max_pure_radius(1, ds, single) == doctest::Approx(1.3).epsilon(1e-12));  // farthest own (0.3) + 1
}

TEST_CASE("one ball covers a well separated group") {
  const Dataset ds = make_dataset({{0.0}, {0.1}, {0.2}, {1.0}}, {0, 0, 0, 0});
  const std::vector<int> g{0, 0, 0, 1};
  const Coverage cov = build_coverage(ds, g, {0});
  REQUIRE(cov.balls.size() == 1);
  CHECK(cov.balls[0].center_row == 0);
  CHECK(cov.balls[0].radius == 1.0);
  CHECK(cov.balls[0].covered_count == 3);
  CHECK(cov.balls[0].assigned_rows == std::vector<RowId>{0, 1, 2});
  const auto attrs = ball_attributes(cov);
  CHECK(attrs[0].density == 3.0);
  CHECK_FALSE(attrs[0].degenerate);

  // Same answer from the brute-force oracle.
  const auto oracle = testing::oracle_cover(ds, g, {0});
  REQUIRE(oracle.size() == 1);
  CHECK(oracle[0].center_row == 0);
  CHECK(oracle[0].radius == 1.0);
}

TEST_CASE("coincident points of different groups give radius-0 balls") {
  const Dataset ds = make_dataset({{0.0}, {0.0}}, {0, 0});
  const Coverage cov = build_coverage(ds, std::vector<int>{0, 1}, {0, 1});
  REQUIRE(cov.balls.size() == 2);
  for (const Ball& b : cov.balls) {
    CHECK(b.radius == 0.0);
    CHECK(b.covered_count == 1);
    CHECK(b.assigned_rows == std::vector<RowId>{b.center_row});
    CHECK(b.density == 0.0);
    CHECK(b.degenerate());
  }
}

TEST_CASE("ball attribute convention") {
  Coverage c;
  Ball b;
  b.radius = 0.5;
  b.covered_count = 10;
  c.balls.push_back(b);
  b.radius = 0.0;
  b.covered_count = 1;
  c.balls.push_back(b);
  const auto a = ball_attributes(c);
  CHECK(a[0].density == 20.0);
  CHECK(a[1].density == 0.0);
  CHECK(a[1].degenerate);
}

TEST_CASE("two interleaved classes") {
  // Alternating classes along a line, plus a second cluster.
  std::vector<std::vector<double>> rows;
  std::vector<int> g;
  for (int i = 0; i < 12; ++i) {
    rows.push_back({i / 12.0, 0.2});
    g.push_back(i % 2);
  }
  for (int i = 0; i < 6; ++i) {
    rows.push_back({0.1 + i / 60.0, 0.8});
    g.push_back(0);
  }
  const Dataset ds = make_dataset(rows, std::vector<int>(rows.size(), 0));
  const Coverage cov = build_coverage(ds, g, {0, 1});
  for (const Ball& b : cov.balls) {
    const auto center = ds.row(static_cast<std::size_t>(b.center_row));
    for (std::size_t i = 0; i < ds.num_rows(); ++i)
      if (g[i] != b.group_id) CHECK(distance(center, ds.row(i)) >= b.radius);
  }
  std::size_t total = 0;
  for (const Ball& b : cov.balls) total += b.covered_count;
  CHECK(total == ds.num_rows());
  // The 6-point cluster is pure and far from group 1: one ball holds it all.
  CHECK(cov.balls.front().covered_count >= 6);
}

TEST_CASE("coverage matches the brute-force greedy oracle") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    const std::size_t n = 5 + rng() % 60;
    const std::size_t d = 1 + rng() % 4;
    const int grid = trial % 3 == 0 ? 4 : 0;  // duplicates and ties
    const Dataset ds = testing::random_dataset(rng, n, d, 0, grid);
    const int groups = 2 + static_cast<int>(rng() % 4);
    std::vector<int> g(n);
    for (auto& x : g) x = static_cast<int>(rng() % static_cast<std::uint64_t>(groups));
    std::vector<int> present(g.begin(), g.end());
    std::sort(present.begin(), present.end());
    present.erase(std::unique(present.begin(), present.end()), present.end());

    const Coverage cov = build_coverage(ds, g, present);
    const auto oracle = testing::oracle_cover(ds, g, present);
    REQUIRE(cov.balls.size() == oracle.size());
    for (std::size_t b = 0; b < oracle.size(); ++b) {
      CHECK(cov.balls[b].center_row == oracle[b].center_row);
      CHECK(cov.balls[b].group_id == oracle[b].group);
      CHECK(cov.balls[b].radius == oracle[b].radius);
      CHECK(cov.balls[b].assigned_rows == oracle[b].assigned);
    }
    // Deterministic rebuild.
    const Coverage again = build_coverage(ds, g, present);
    for (std::size_t b = 0; b < cov.balls.size(); ++b)
      CHECK(again.balls[b].assigned_rows == cov.balls[b].assigned_rows);
    // Assignment consistent with assigned rows.
    CHECK(cov.assignment.size() == n);
    for (std::size_t b = 0; b < cov.balls.size(); ++b)
      for (RowId r : cov.balls[b].assigned_rows) CHECK(cov.ball_of(r) == b);
  }
}

TEST_CASE("coverage CSV dump") {
  const Dataset ds = make_dataset({{0.0}, {0.1}, {0.2}, {1.0}}, {0, 0, 0, 0});
  const Coverage cov = build_coverage(ds, std::vector<int>{0, 0, 0, 1}, {0, 1});
  std::ostringstream os;
  write_coverage_csv(cov, os);
  CHECK(os.str() ==
        "group_id,selection_order,center_row,radius,covered_count,density\n"
        "0,0,0,1,3,3\n"
        "1,0,3,0.8,1,1.25\n");
}

TEST_CASE("coverage errors") {
  const Dataset ds = make_dataset({{0.0}, {0.1}}, {0, 0});
  CHECK_THROWS_AS(build_coverage(ds, std::vector<int>{0, 0}, {}), ConfigError);
  CHECK_THROWS_AS(build_coverage(ds, std::vector<int>{0}, {0}), ConfigError);
  CHECK_THROWS_AS(build_coverage(ds, std::vector<int>{0, 0}, {3}), ConfigError);
}
