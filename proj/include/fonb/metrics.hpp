#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fonb/dataset.hpp"
#include "fonb/groups.hpp"

namespace fonb {

/// Confusion counts for one value of a protected feature.
struct OutcomeCounts {
  std::size_t n_total = 0;
  std::size_t n_pred_pos = 0;
  std::size_t n_actual_pos = 0;
  std::size_t n_true_pos = 0;
  std::size_t n_false_pos = 0;

  double positive_rate() const;
  double true_positive_rate() const;
  double false_positive_rate() const;
};

/// Counts indexed by protected value (0 or 1).
struct GroupOutcomeCounts {
  std::array<OutcomeCounts, 2> by_value;

  static GroupOutcomeCounts tally(std::span<const int> protected_values, std::span<const int> actual,
                                  std::span<const int> predicted);
  /// Throws ValidationError if a count invariant is broken.
  void validate() const;
};

/// Disparate impact with its sentinel state.
struct DiValue {
  double value = 1.0;
  DiStatus status = DiStatus::kFinite;

  bool finite() const { return status == DiStatus::kFinite; }
};

double spd(const GroupOutcomeCounts& c);
/// Rate(P=0) / Rate(P=1). Zero denominator gives +inf (kInfinite); 0/0 gives
/// 1.0 flagged kUndefined.
DiValue di(const GroupOutcomeCounts& c);
/// DI folded into (0,1]. Non-finite or non-positive input yields 0.0.
double adi(double di_value);
double adi(const DiValue& d);
/// (TPR difference, FPR difference) between protected values 0 and 1.
std::pair<double, double> epd(const GroupOutcomeCounts& c);
double eod(const GroupOutcomeCounts& c);

/// Mann-Whitney AUC; ties count one half.
double auc(std::span<const double> scores, std::span<const int> labels);
double accuracy(std::span<const int> predicted, std::span<const int> labels);

struct FeatureFairness {
  std::string feature;
  double spd = 0.0;
  DiValue di;
  double adi = 1.0;
  // NaN when the corresponding stratum is empty.
  double epd_tpr = 0.0;
  double epd_fpr = 0.0;
  double eod = 0.0;
};

struct FairnessReport {
  std::vector<FeatureFairness> features;
  /// Sum of |di - 1| over features; +inf if any DI is not finite.
  double total_di_distance = 0.0;
};

/// Sum over features of |di - 1|. Throws UndefinedMetricError on sentinels.
double total_di_distance(const FairnessReport& report);
double total_di_distance(std::span<const double> dis);

/// Full fairness report of `predicted` on `ds` for every protected feature.
/// Empty-stratum metrics are reported as NaN rather than thrown.
FairnessReport fairness_report(const Dataset& ds, std::span<const int> predicted);

}  // namespace fonb
