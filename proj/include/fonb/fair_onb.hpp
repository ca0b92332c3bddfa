#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fonb/coverage.hpp"
#include "fonb/dataset.hpp"
#include "fonb/groups.hpp"

namespace fonb {

/// Which balls the percentiles are taken over.
enum class ThresholdPopulation {
  kAllBalls,     // every ball of the coverage
  kTargetBalls,  // only balls of the selected target groups
};
const char* to_string(ThresholdPopulation p);
ThresholdPopulation parse_threshold_population(const std::string& text);

/// Percentile levels for the three ball attributes plus the group
/// selection strategy.
struct ThresholdConfig {
  int pct_radius = 0;
  int pct_count = 0;
  int pct_density = 0;
  Strategy strategy = Strategy::kUnion;
  ThresholdPopulation population = ThresholdPopulation::kAllBalls;

  /// Levels must lie in [0, 100].
  void validate() const;
  bool operator==(const ThresholdConfig&) const = default;
};

/// Default grid levels: 0, 5, 10, 15, 20.
std::vector<int> default_percentile_levels();

struct ResolvedThresholds {
  double radius = 0.0;
  double count = 0.0;
  double density = 0.0;
};

/// Nearest-rank-lower percentile: the value at index floor(p/100 * (n-1))
/// of the ascending sort. Throws on an empty input.
double percentile_lower(std::vector<double> values, int pct);

/// Attribute thresholds at the requested percentiles.
ResolvedThresholds resolve_thresholds(std::span<const BallAttributes> attrs, const ThresholdConfig& cfg);

struct UndersampleResult {
  std::vector<RowId> kept_rows;     // ascending
  std::vector<RowId> removed_rows;  // ascending
  std::vector<std::size_t> removed_balls;
  std::map<int, std::size_t> per_group_removed;
  std::optional<ResolvedThresholds> resolved;  // empty when there is no target ball
  std::vector<std::string> warnings;
};

/// Removes every target-group ball whose radius, covered count or density is
/// strictly below its threshold, together with the rows assigned to it.
/// Thresholds come from cfg.population; rows of other groups are always kept.
UndersampleResult undersample(const Dataset& ds, const Coverage& cov, std::span<const int> targets,
                              const ThresholdConfig& cfg);

/// Bias assessment, group table and coverage of one training set. Built once
/// and reused for every threshold configuration.
class FairOnbSampler {
 public:
  /// `outcomes` are the labels or predictions used to assess bias; pass an
  /// empty vector to use ds labels.
  FairOnbSampler(const Dataset& ds, std::vector<int> outcomes = {},
                 AssessmentSource source = AssessmentSource::kDataset);

  const Dataset& dataset() const { return ds_; }
  const GroupTable& groups() const { return table_; }
  const std::vector<int>& group_of() const { return group_of_; }
  const BiasAssessment& bias() const { return bias_; }
  const Coverage& coverage() const { return coverage_; }

  TargetSelection targets(Strategy strategy) const;
  UndersampleResult run(const ThresholdConfig& cfg) const;
  Dataset apply(const UndersampleResult& r) const { return ds_.select_ids(r.kept_rows); }

 private:
  Dataset ds_;
  GroupTable table_;
  std::vector<int> group_of_;
  BiasAssessment bias_;
  Coverage coverage_;
};

struct PreprocessOutcome {
  Dataset data;
  UndersampleResult result;
  BiasAssessment bias;
  std::vector<int> targets;
};

/// End-to-end method: assess bias, select target groups, cover all groups,
/// undersample and keep the surviving rows. With AssessmentSource::kModel
/// bias is measured on a decision tree (fitted with `seed`) predicting `ds`.
PreprocessOutcome preprocess(const Dataset& ds, const ThresholdConfig& cfg,
                             AssessmentSource source = AssessmentSource::kDataset, std::uint64_t seed = 30);

}  // namespace fonb
