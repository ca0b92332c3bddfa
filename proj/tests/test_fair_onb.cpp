#include <doctest.h>

#include <algorithm>
#include <random>

#include "fonb/fair_onb.hpp"
#include "test_support.hpp"

using namespace fonb;
using fonb::testing::make_dataset;

namespace {

BallAttributes attr(double radius, std::size_t count, std::size_t index = 0) {
  return {index, 0, radius, count, radius > 0 ? static_cast<double>(count) / radius : 0.0, radius == 0.0};
}

// Independent removal rule: re-derives ball attributes from the oracle cover
// and applies the strict-OR elimination with its own percentile code.
std::vector<RowId> oracle_removed(const Dataset& ds, const std::vector<int>& group_of, const std::vector<int>& targets,
                                  const ThresholdConfig& cfg) {
  std::vector<int> present(group_of.begin(), group_of.end());
  std::sort(present.begin(), present.end());
  present.erase(std::unique(present.begin(), present.end()), present.end());
  const auto balls = testing::oracle_cover(ds, group_of, present);
  auto in_targets = [&](int g) { return std::find(targets.begin(), targets.end(), g) != targets.end(); };
  std::vector<double> r, c, d;
  for (const auto& b : balls) {
    if (cfg.population == ThresholdPopulation::kTargetBalls && !in_targets(b.group)) continue;
    r.push_back(b.radius);
    c.push_back(static_cast<double>(b.assigned.size()));
    d.push_back(b.radius > 0 ? b.assigned.size() / b.radius : 0.0);
  }
  auto pct = [](std::vector<double> v, int p) {
    std::sort(v.begin(), v.end());
    return v[static_cast<std::size_t>(std::floor(p / 100.0 * static_cast<double>(v.size() - 1) + 1e-9))];
  };
  std::vector<RowId> out;
  if (targets.empty() || r.empty()) return out;
  const double tr = pct(r, cfg.pct_radius), tc = pct(c, cfg.pct_count), td = pct(d, cfg.pct_density);
  for (const auto& b : balls) {
    if (!in_targets(b.group)) continue;
    const double density = b.radius > 0 ? b.assigned.size() / b.radius : 0.0;
    if (b.radius < tr || static_cast<double>(b.assigned.size()) < tc || density < td)
      out.insert(out.end(), b.assigned.begin(), b.assigned.end());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("nearest-rank-lower percentile") {
  CHECK(percentile_lower({5, 4, 3, 2, 1}, 0) == 1);
  CHECK(percentile_lower({1, 2, 3, 4, 5}, 20) == 1);  // floor(0.2 * 4) = 0
  CHECK(percentile_lower({1, 2, 3, 4, 5}, 50) == 3);
  CHECK(percentile_lower({1, 2, 3, 4, 5}, 100) == 5);
  std::vector<double> hundred(100);
  for (int i = 0; i < 100; ++i) hundred[i] = 100 - i;
  CHECK(percentile_lower(hundred, 5) == 5);  // index floor(0.05 * 99) = 4
  CHECK(percentile_lower(hundred, 20) == 20);
  CHECK_THROWS_AS(percentile_lower({}, 5), ConfigError);
}

TEST_CASE("resolve thresholds") {
  const std::vector<BallAttributes> a{attr(1, 5), attr(2, 4), attr(3, 3), attr(4, 2), attr(5, 1)};
  const auto t = resolve_thresholds(a, {0, 0, 0});
  CHECK(t.radius == 1);
  CHECK(t.count == 1);
  CHECK(t.density == 0.2);
  const auto u = resolve_thresholds(a, {50, 100, 20});
  CHECK(u.radius == 3);
  CHECK(u.count == 5);
  CHECK(u.density == 0.2);
  CHECK_THROWS_AS(resolve_thresholds({}, {0, 0, 0}), ConfigError);
  CHECK_THROWS_AS(resolve_thresholds(a, {101, 0, 0}), ConfigError);
}

TEST_CASE("undersample removes low-radius ball with its rows") {
  const Dataset ds = make_dataset(std::vector<std::vector<double>>(11, {0.5}), std::vector<int>(11, 1));
  Coverage cov;
  cov.group_ids = {0};
  Ball small;
  small.center_row = 0;
  small.radius = 0.1;
  small.assigned_rows = {0};
  small.covered_count = 1;
  small.density = 10.0;
  Ball big;
  big.center_row = 1;
  big.radius = 0.9;
  for (RowId r = 1; r <= 10; ++r) big.assigned_rows.push_back(r);
  big.covered_count = 10;
  big.density = 10.0 / 0.9;
  big.selection_order = 1;
  cov.balls = {small, big};
  for (RowId r = 0; r <= 10; ++r) cov.assignment[r] = r == 0 ? 0 : 1;

  const auto res = undersample(ds, cov, std::vector<int>{0}, {100, 0, 0});
  REQUIRE(res.resolved.has_value());
  CHECK(res.resolved->radius == 0.9);
  CHECK(res.removed_balls == std::vector<std::size_t>{0});
  CHECK(res.removed_rows == std::vector<RowId>{0});
  CHECK(res.kept_rows.size() == 10);
  CHECK(res.per_group_removed.at(0) == 1);

  const auto none = undersample(ds, cov, std::vector<int>{0}, {0, 0, 0});
  CHECK(none.removed_rows.empty());

  const auto everything = undersample(ds, cov, std::vector<int>{0}, {100, 100, 100});
  CHECK(everything.removed_rows.size() == 1);  // the larger ball sets every maximum

  const auto no_targets = undersample(ds, cov, std::vector<int>{}, {100, 100, 100});
  CHECK(no_targets.removed_rows.empty());
  CHECK_FALSE(no_targets.warnings.empty());
  CHECK_THROWS_AS(undersample(ds, cov, std::vector<int>{4}, {0, 0, 0}), ConfigError);
}

TEST_CASE("group extinction is reported") {
  const Dataset ds = make_dataset({{0.0}, {0.05}, {0.5}, {0.55}, {1.0}}, {1, 1, 0, 0, 0});
  Coverage cov = build_coverage(ds, std::vector<int>{1, 1, 0, 0, 0}, {0, 1});
  // Group 1 has one ball; demanding count >= 3 removes it.
  const auto res = undersample(ds, cov, std::vector<int>{1}, {0, 100, 0});
  CHECK(res.removed_rows == std::vector<RowId>{0, 1});
  CHECK(std::any_of(res.warnings.begin(), res.warnings.end(),
                    [](const std::string& w) { return w.find("removed entirely") != std::string::npos; }));
}

TEST_CASE("only target-group rows can be removed") {
  std::mt19937_64 rng(23);
  const Dataset ds = testing::random_dataset(rng, 160, 2, 2);
  const GroupTable table = enumerate_groups(ds.schema());
  const auto g = table.assign(ds);
  std::vector<int> present(g.begin(), g.end());
  std::sort(present.begin(), present.end());
  present.erase(std::unique(present.begin(), present.end()), present.end());
  const Coverage cov = build_coverage(ds, g, present);
  for (int p = 0; p <= 20; p += 5) {
    const auto res = undersample(ds, cov, std::vector<int>{5}, {p, p, p});
    for (RowId r : res.removed_rows) CHECK(g[static_cast<std::size_t>(r)] == 5);
    CHECK(res.kept_rows.size() + res.removed_rows.size() == ds.num_rows());
  }
}

TEST_CASE("undersample agrees with the brute-force removal rule") {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 12; ++trial) {
    const std::size_t n = 40 + rng() % 160;
    const Dataset ds = testing::random_dataset(rng, n, 2 + rng() % 3, 1 + rng() % 2, trial % 4 == 0 ? 5 : 0);
    FairOnbSampler sampler(ds);
    for (Strategy s : {Strategy::kUnion, Strategy::kIntersection}) {
      for (ThresholdPopulation pop : {ThresholdPopulation::kAllBalls, ThresholdPopulation::kTargetBalls}) {
        const ThresholdConfig cfg{static_cast<int>(5 * (rng() % 5)), static_cast<int>(5 * (rng() % 5)),
                                  static_cast<int>(5 * (rng() % 5)), s, pop};
        const auto res = sampler.run(cfg);
        const auto targets = sampler.targets(s).groups;
        CHECK(res.removed_rows == oracle_removed(ds, sampler.group_of(), targets, cfg));
      }
    }
  }
}

TEST_CASE("removal is monotone and intersection stays inside union") {
  std::mt19937_64 rng(41);
  const Dataset ds = testing::random_dataset(rng, 220, 3, 2);
  FairOnbSampler sampler(ds);
  const auto levels = default_percentile_levels();
  auto removed = [&](int r, int c, int d, Strategy s) { return sampler.run({r, c, d, s}).removed_rows; };
  for (int a : levels)
    for (int b : levels) {
      for (std::size_t i = 1; i < levels.size(); ++i) {
        CHECK(removed(levels[i], a, b, Strategy::kUnion).size() >= removed(levels[i - 1], a, b, Strategy::kUnion).size());
        CHECK(removed(a, levels[i], b, Strategy::kUnion).size() >= removed(a, levels[i - 1], b, Strategy::kUnion).size());
        CHECK(removed(a, b, levels[i], Strategy::kUnion).size() >= removed(a, b, levels[i - 1], Strategy::kUnion).size());
      }
      const auto u = removed(a, b, 10, Strategy::kUnion);
      const auto x = removed(a, b, 10, Strategy::kIntersection);
      CHECK(std::includes(u.begin(), u.end(), x.begin(), x.end()));
    }
}

TEST_CASE("preprocess") {
  SUBCASE("unbiased data is returned unchanged") {
    // p=0 and p=1 both have positive rate 1/2.
    const Dataset ds = make_dataset({{0.1}, {0.2}, {0.3}, {0.4}, {0.5}, {0.6}, {0.7}, {0.8}},
                                    {1, 0, 1, 0, 1, 0, 1, 0}, {{0, 0, 0, 0, 1, 1, 1, 1}});
    const auto out = preprocess(ds, {20, 20, 20, Strategy::kUnion});
    CHECK(out.data == ds);
    CHECK(out.targets.empty());
  }
  SUBCASE("biased fixture loses favored positives only") {
    const Dataset ds = testing::biased_blobs(400, 5);
    const GroupTable t = enumerate_groups(ds.schema());
    const auto before = t.assign(ds);
    const auto out = preprocess(ds, {20, 20, 20, Strategy::kUnion});
    CHECK(out.targets == std::vector<int>{1});  // (p=0, positive)
    const auto after = t.assign(out.data);
    for (int g = 0; g < 4; ++g) {
      const auto nb = std::count(before.begin(), before.end(), g);
      const auto na = std::count(after.begin(), after.end(), g);
      if (g == 1) {
        CHECK(na < nb);
        CHECK(static_cast<std::size_t>(nb - na) == out.result.removed_rows.size());
      } else {
        CHECK(na == nb);
      }
    }
  }
  SUBCASE("model-based assessment runs end to end") {
    const Dataset ds = testing::biased_blobs(200, 9);
    const auto out = preprocess(ds, {10, 10, 10, Strategy::kUnion}, AssessmentSource::kModel);
    CHECK(out.bias.source == AssessmentSource::kModel);
    CHECK(out.data.num_rows() + out.result.removed_rows.size() == ds.num_rows());
  }
}
