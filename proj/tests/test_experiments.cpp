#include <doctest.h>

#include <map>
#include <mutex>
#include <set>
#include <sstream>

#include "fonb/classifier.hpp"
#include "fonb/experiments.hpp"
#include "test_support.hpp"

using namespace fonb;

namespace {

ExperimentReport fake_report(const std::string& id, double di, double adi, double auc, double acc) {
  ExperimentReport r;
  r.config = ExperimentConfig::baseline();
  r.config.id = id;
  r.mean.features = {{"p", di, DiStatus::kFinite, adi, 0.0, 0.0}};
  r.mean.total_di_distance = std::abs(di - 1.0);
  r.mean.total_adi_distance = 1.0 - adi;
  r.mean.auc = auc;
  r.mean.accuracy = acc;
  return r;
}

}  // namespace

TEST_CASE("grid sizes") {
  const Dataset one = testing::biased_blobs(50, 1);
  const Dataset two = testing::two_feature_blobs(50, 1);
  CHECK(grid_configs(two.schema(), {}).size() == 250);
  CHECK(grid_configs(one.schema(), {}).size() == 125);
  GridOptions small;
  small.levels = {0, 10};
  CHECK(grid_configs(two.schema(), small).size() == 16);
  std::set<std::string> ids;
  for (const auto& c : grid_configs(two.schema(), {})) ids.insert(c.id);
  CHECK(ids.size() == 250);
  CHECK(ids.count("onb-intersection-r005-c010-d020") == 1);
  CHECK(ExperimentConfig::fawos_config({{0.0, 0.4, 0.6}, 0.8}).strategy_label() == "fawos");
}

TEST_CASE("baseline equals a direct fit on each fold") {
  const Dataset ds = testing::biased_blobs(240, 3);
  const FoldPlan plan = stratified_folds(ds, 5, 30);
  const auto reports = run_configs(ds, plan, {ExperimentConfig::baseline()}, {});
  REQUIRE(reports.size() == 1);
  const auto& r = reports.front();
  CHECK_FALSE(r.failed);
  REQUIRE(r.folds.size() == 5);
  double auc_sum = 0.0;
  for (int f = 0; f < 5; ++f) {
    const Dataset raw = ds.take(plan.train_positions(f));
    const MinMaxScaler sc = MinMaxScaler::fit(raw);
    const Dataset train = sc.transform(raw);
    const Dataset test = sc.transform(ds.take(plan.test_positions(f)));
    const auto tree = DecisionTree::fit(train, 30);
    const auto preds = tree.predict(test);
    const double a = auc(tree.score(test), test.labels());
    const auto fr = fairness_report(test, preds);
    CHECK(r.folds[f].auc == a);
    CHECK(r.folds[f].accuracy == accuracy(preds, test.labels()));
    CHECK(r.folds[f].features[0].di == fr.features[0].di.value);
    CHECK(r.folds[f].removed == 0);
    auc_sum += a;
  }
  CHECK(r.mean.auc == doctest::Approx(auc_sum / 5));
}

TEST_CASE("test splits never change and training rows come from the fold") {
  const Dataset ds = testing::biased_blobs(200, 4);
  const FoldPlan plan = stratified_folds(ds, 5, 30);
  GridOptions opt;
  opt.levels = {0, 20};
  std::mutex mu;
  std::map<int, std::set<std::vector<RowId>>> tests;
  bool leak = false;
  opt.audit = [&](int fold, const std::string&, std::span<const RowId> train, std::span<const RowId> test) {
    std::lock_guard<std::mutex> lock(mu);
    tests[fold].insert(std::vector<RowId>(test.begin(), test.end()));
    const std::set<RowId> t(test.begin(), test.end());
    for (RowId id : train) leak = leak || t.count(id) > 0;
  };
  opt.jobs = 2;
  const auto reports = run_grid(ds, plan, opt);
  CHECK(reports.size() == 9);
  CHECK_FALSE(leak);
  for (const auto& [fold, sets] : tests) CHECK(sets.size() == 1);

  std::size_t fawos_calls = 0;
  const auto fawos = run_fawos_grid(ds, plan, fawos_default_configs(), 30, 1,
                                    [&](int, const std::string&, std::span<const RowId> train, std::span<const RowId> test) {
                                      ++fawos_calls;
                                      const std::set<RowId> t(test.begin(), test.end());
                                      for (RowId id : train) leak = leak || t.count(id) > 0;
                                    });
  CHECK(fawos.size() == 13);
  CHECK(fawos_calls == 65);
  CHECK_FALSE(leak);
  for (const auto& r : fawos)
    if (r.config.kind == ConfigKind::kFawos) CHECK(r.mean.added > 0);
}

TEST_CASE("grid results do not depend on the job count") {
  const Dataset ds = testing::two_feature_blobs(150, 6);
  const FoldPlan plan = stratified_folds(ds, 3, 30);
  GridOptions a;
  a.levels = {0, 15};
  GridOptions b = a;
  b.jobs = 3;
  std::ostringstream ra, rb;
  write_report_csv(run_grid(ds, plan, a), ra);
  write_report_csv(run_grid(ds, plan, b), rb);
  CHECK(ra.str() == rb.str());
}

TEST_CASE("report csv round trip") {
  const Dataset ds = testing::two_feature_blobs(120, 8);
  const FoldPlan plan = stratified_folds(ds, 3, 30);
  GridOptions opt;
  opt.levels = {5, 10};
  const auto reports = run_grid(ds, plan, opt);
  std::ostringstream first;
  write_report_csv(reports, first);
  CHECK(first.str().rfind(
            "config_id,strategy,pct_radius,pct_count,pct_density,fold,feature,di,adi,spd,eod,auc,accuracy,removed,added\n",
            0) == 0);
  std::istringstream in(first.str());
  const auto back = read_report_csv(in);
  std::ostringstream second;
  write_report_csv(back, second);
  CHECK(first.str() == second.str());
  REQUIRE(back.size() == reports.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].config.id == reports[i].config.id);
    CHECK(back[i].mean.auc == reports[i].mean.auc);
  }
  std::ostringstream summary;
  write_summary_csv(reports, summary);
  CHECK(summary.str().find("baseline") != std::string::npos);
  std::ostringstream plot;
  write_plotdata_csv(reports, "p", plot);
  CHECK(plot.str().find("\nunion,") != std::string::npos);

  SUBCASE("rebuilt summaries match") {
    std::ostringstream thr;
    write_thresholds_csv(reports, thr);
    std::istringstream report_in(first.str()), thr_in(thr.str());
    auto rebuilt = read_report_csv(report_in);
    read_thresholds_csv(thr_in, rebuilt);
    std::ostringstream summary2, plot2;
    write_summary_csv(rebuilt, summary2);
    write_plotdata_csv(rebuilt, "p", plot2);
    CHECK(summary2.str() == summary.str());
    CHECK(plot2.str() == plot.str());
  }
  SUBCASE("unknown config in thresholds") {
    std::istringstream report_in(first.str()), thr_in("config_id,fold,radius,count,density\nnope,0,1,1,1\n");
    auto rebuilt = read_report_csv(report_in);
    CHECK_THROWS_AS(read_thresholds_csv(thr_in, rebuilt), ParseError);
  }
}

TEST_CASE("select_best") {
  std::vector<ExperimentReport> rs{fake_report("a", 1.5, 0.5, 0.80, 0.8), fake_report("b", 0.75, 0.75, 0.70, 0.75),
                                   fake_report("c", 1.25, 0.75, 0.75, 0.7), fake_report("d", 1.0, 1.0, 0.60, 0.6)};
  rs[3].failed = true;
  const auto s = select_best(rs);
  CHECK(s.best_global == "c");  // ties with b on distance, higher AUC
  CHECK(s.best_performance == "a");
  CHECK(s.best_per_feature.at("p") == "c");
  CHECK(select_best(rs, PerformanceMetric::kAccuracy, FairnessMeasure::kAdi).best_global == "b");
  rs[1].mean.eligible = rs[2].mean.eligible = false;
  CHECK(select_best(rs).best_global == "a");
  rs[0].failed = true;
  CHECK_THROWS_AS(select_best(rs), InfeasibleError);
}

TEST_CASE("method comparison uses ADI") {
  const Dataset ds = testing::biased_blobs(200, 12);
  const FoldPlan plan = stratified_folds(ds, 5, 30);
  GridOptions opt;
  opt.levels = {0, 20};
  const auto onb = run_grid(ds, plan, opt);
  const auto fawos = run_fawos_grid(ds, plan, fawos_default_configs(), 30);
  const auto rows = compare_methods(onb, fawos);
  REQUIRE(rows.size() >= 3);
  CHECK(rows.front().method == "Baseline");
  for (const auto& row : rows) {
    REQUIRE(row.adi.size() == 1);
    CHECK(row.adi[0].second >= 0.0);
    CHECK(row.adi[0].second <= 1.0);
    CHECK(row.total_adi_distance == doctest::Approx(1.0 - row.adi[0].second));
  }
  std::ostringstream csv;
  write_comparison_csv(rows, csv);
  CHECK(csv.str().find("fawos") != std::string::npos);
  CHECK_FALSE(render_comparison(rows).empty());
  CHECK(render_summary(onb).find("baseline") != std::string::npos);
}

TEST_CASE("baseline is shared by both grids") {
  const Dataset ds = testing::biased_blobs(200, 6);
  const FoldPlan plan = stratified_folds(ds, 4, 30);
  GridOptions opt;
  opt.levels = {0};
  const auto onb = run_grid(ds, plan, opt);
  const auto fawos = run_fawos_grid(ds, plan, {fawos_default_configs().front()}, 30);
  REQUIRE(onb.front().config.id == "baseline");
  REQUIRE(fawos.front().config.id == "baseline");
  std::ostringstream a, b;
  write_report_csv(std::span(onb).first(1), a);
  write_report_csv(std::span(fawos).first(1), b);
  CHECK(a.str() == b.str());
}

TEST_CASE("select_best over two features") {
  auto two = [](const std::string& id, double di_a, double di_b) {
    ExperimentReport r = fake_report(id, di_a, 1.0, 0.7, 0.7);
    r.mean.features.push_back({"q", di_b, DiStatus::kFinite, 1.0, 0.0, 0.0});
    r.mean.total_di_distance = std::abs(di_a - 1.0) + std::abs(di_b - 1.0);
    return r;
  };
  const std::vector<ExperimentReport> rs{two("near", 0.881, 1.016), two("far", 0.9, 1.2)};
  const auto s = select_best(rs);
  CHECK(s.best_global == "near");
  CHECK(s.best_per_feature.at("p") == "far");
  CHECK(s.best_per_feature.at("q") == "near");

  const std::vector<ExperimentReport> single{two("only", 0.5, 2.0)};
  const auto t = select_best(single);
  CHECK(t.best_global == "only");
  CHECK(t.best_performance == "only");
  CHECK(t.best_per_feature.at("p") == "only");
  CHECK(t.best_per_feature.at("q") == "only");
}
