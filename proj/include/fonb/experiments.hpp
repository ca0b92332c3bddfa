#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fonb/dataset.hpp"
#include "fonb/fair_onb.hpp"
#include "fonb/fawos.hpp"
#include "fonb/metrics.hpp"

namespace fonb {

enum class ConfigKind { kBaseline, kFairOnb, kFawos };

/// One evaluated preprocessing configuration.
struct ExperimentConfig {
  std::string id;
  ConfigKind kind = ConfigKind::kBaseline;
  ThresholdConfig onb;
  FawosConfig fawos;

  static ExperimentConfig baseline();
  static ExperimentConfig fair_onb(const ThresholdConfig& cfg);
  static ExperimentConfig fawos_config(const FawosConfig& cfg);
  /// "none", "union", "intersection" or "fawos".
  std::string strategy_label() const;
};

struct FeatureMetrics {
  std::string feature;
  double di = 1.0;
  DiStatus di_status = DiStatus::kFinite;
  double adi = 1.0;
  double spd = 0.0;
  double eod = 0.0;
};

struct FoldRecord {
  int fold = 0;
  bool ok = true;
  std::string error;
  std::vector<FeatureMetrics> features;
  double auc = 0.0;
  double accuracy = 0.0;
  std::size_t removed = 0;
  std::size_t added = 0;
  std::optional<ResolvedThresholds> thresholds;
};

struct AggregateMetrics {
  std::vector<FeatureMetrics> features;  // arithmetic means over folds
  double auc = 0.0;
  double accuracy = 0.0;
  double removed = 0.0;
  double added = 0.0;
  /// Sum of |mean DI - 1| and of (1 - mean ADI) over features.
  double total_di_distance = 0.0;
  double total_adi_distance = 0.0;
  std::optional<ResolvedThresholds> thresholds;  // fold mean, Fair-ONB only
  /// False when a fold failed or a DI was a sentinel; such configs are not
  /// selectable.
  bool eligible = true;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<FoldRecord> folds;
  AggregateMetrics mean;
  bool failed = false;
  std::string failure;
};

/// Arithmetic means of the successful folds of `folds`.
AggregateMetrics aggregate(std::span<const FoldRecord> folds);

/// Called once per (fold, config) evaluation with the row ids used for
/// training (after sampling) and for testing.
using SplitAudit = std::function<void(int fold, const std::string& config_id, std::span<const RowId> train_ids,
                                      std::span<const RowId> test_ids)>;

struct GridOptions {
  std::vector<int> levels = default_percentile_levels();
  std::vector<Strategy> strategies = {Strategy::kUnion, Strategy::kIntersection};
  ThresholdPopulation population = ThresholdPopulation::kAllBalls;
  AssessmentSource source = AssessmentSource::kDataset;
  std::uint64_t seed = 30;
  int jobs = 1;
  SplitAudit audit;
};

/// Fair-ONB configurations of the grid: levels^3 per strategy, with the
/// strategies collapsed to union when there is a single protected feature.
std::vector<ExperimentConfig> grid_configs(const Schema& schema, const GridOptions& options);

/// Cross-validated evaluation of the baseline and every Fair-ONB grid
/// configuration. Each fold's training split is normalized, covered once and
/// reused by every configuration; test splits are never resampled. Reports
/// are sorted by config id.
std::vector<ExperimentReport> run_grid(const Dataset& ds, const FoldPlan& folds, const GridOptions& options);

/// Same protocol for the baseline and the given FAWOS configurations.
/// Oversampling targets are the disadvantaged positive-class groups.
std::vector<ExperimentReport> run_fawos_grid(const Dataset& ds, const FoldPlan& folds,
                                             const std::vector<FawosConfig>& configs, std::uint64_t seed,
                                             int jobs = 1, const SplitAudit& audit = {});

/// Evaluate arbitrary configurations with the shared protocol.
std::vector<ExperimentReport> run_configs(const Dataset& ds, const FoldPlan& folds,
                                          const std::vector<ExperimentConfig>& configs, const GridOptions& options);

enum class PerformanceMetric { kAuc, kAccuracy };
enum class FairnessMeasure { kDi, kAdi };

struct BestSelection {
  std::string best_global;
  std::map<std::string, std::string> best_per_feature;
  std::string best_performance;
};

/// Best configurations among eligible reports: smallest total distance to the
/// fairness optimum (ties: better performance, then smaller id), per-feature
/// distance, and best performance (ties: smaller distance, then smaller id).
BestSelection select_best(std::span<const ExperimentReport> reports,
                          PerformanceMetric performance = PerformanceMetric::kAuc,
                          FairnessMeasure measure = FairnessMeasure::kDi);

/// report.csv: one row per (config, fold, protected feature).
void write_report_csv(std::span<const ExperimentReport> reports, std::ostream& out);
/// Parses report.csv back into reports (thresholds are not recorded there).
std::vector<ExperimentReport> read_report_csv(std::istream& in);
/// thresholds.csv: resolved Fair-ONB thresholds per (config, fold).
void write_thresholds_csv(std::span<const ExperimentReport> reports, std::ostream& out);
/// Attaches thresholds.csv rows to matching folds of `reports` and refreshes
/// their means.
void read_thresholds_csv(std::istream& in, std::vector<ExperimentReport>& reports);
/// summary.csv: aggregated means per config plus best-of flags computed
/// within each strategy family.
void write_summary_csv(std::span<const ExperimentReport> reports, std::ostream& out,
                       PerformanceMetric performance = PerformanceMetric::kAuc);
/// plotdata_<feature>.csv: Fair-ONB configs keyed by mean radius threshold.
void write_plotdata_csv(std::span<const ExperimentReport> reports, const std::string& feature, std::ostream& out);

/// One row per method family (baseline, each strategy, FAWOS): the best
/// configuration by total ADI distance, with per-feature ADI and accuracy.
struct ComparisonRow {
  std::string method;
  std::string config_id;
  std::string parameters;
  std::vector<std::pair<std::string, double>> adi;
  double total_adi_distance = 0.0;
  double accuracy = 0.0;
};

std::vector<ComparisonRow> compare_methods(std::span<const ExperimentReport> onb_reports,
                                           std::span<const ExperimentReport> fawos_reports);
void write_comparison_csv(std::span<const ComparisonRow> rows, std::ostream& out);
std::string render_comparison(std::span<const ComparisonRow> rows);
/// Table of baseline and the best-of rows of each family (DI and AUC).
std::string render_summary(std::span<const ExperimentReport> reports,
                           PerformanceMetric performance = PerformanceMetric::kAuc);

}  // namespace fonb
