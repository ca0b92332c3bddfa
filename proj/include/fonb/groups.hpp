#pragma once

#include <optional>
#include <string>
#include <vector>

#include "fonb/dataset.hpp"

namespace fonb {

/// Bijection between (protected values, class) and group ids. The first
/// protected feature is the most significant bit and the class the least,
/// so for (race, gender): (0,0,0)->0, (0,0,1)->1, ..., (1,1,1)->7.
class GroupTable {
 public:
  explicit GroupTable(std::vector<std::string> protected_order);

  const std::vector<std::string>& protected_order() const { return protected_order_; }
  std::size_t num_protected() const { return protected_order_.size(); }
  int num_groups() const { return 1 << (num_protected() + 1); }

  int group_id(const std::vector<int>& protected_values, int class_value) const;
  int class_of(int group) const { return group & 1; }
  /// Value of protected feature `k` (0-based in protected_order) for `group`.
  int protected_value(int group, std::size_t k) const {
    return (group >> (num_protected() - k)) & 1;
  }
  std::vector<int> protected_values(int group) const;

  /// Group id of every row of `ds`.
  std::vector<int> assign(const Dataset& ds) const;
  /// Multi-line table "feature... class group".
  std::string describe() const;

 private:
  std::vector<std::string> protected_order_;
};

GroupTable enumerate_groups(const Schema& schema);

enum class AssessmentSource { kDataset, kModel };
const char* to_string(AssessmentSource s);
AssessmentSource parse_assessment_source(const std::string& text);

enum class DiStatus { kFinite, kInfinite, kUndefined };

struct FeatureBias {
  std::string feature;
  double di = 1.0;
  DiStatus status = DiStatus::kFinite;
  /// 0 when DI > 1, 1 when DI < 1, empty when DI == 1 (or undefined).
  std::optional<int> favored_value;
};

struct BiasAssessment {
  AssessmentSource source = AssessmentSource::kDataset;
  std::vector<FeatureBias> per_feature;

  bool any_biased() const;
};

/// DI of `outcomes` (labels or predictions, aligned with ds rows) per
/// protected feature, and the favored value implied by it.
BiasAssessment assess_bias(const Dataset& ds, const std::vector<int>& outcomes,
                           AssessmentSource source = AssessmentSource::kDataset);

enum class Strategy { kUnion, kIntersection };
const char* to_string(Strategy s);
Strategy parse_strategy(const std::string& text);

struct TargetSelection {
  std::vector<int> groups;  // ascending
  std::vector<std::string> warnings;
};

/// Positive-class groups carrying the favored value of any (union) or all
/// (intersection) biased features. Unbiased features impose no constraint;
/// with no biased feature the selection is empty.
TargetSelection select_target_groups(const GroupTable& table, const BiasAssessment& bias, Strategy strategy);

/// Positive-class groups not selected by the union rule: the groups that
/// an oversampler should grow.
std::vector<int> disadvantaged_groups(const GroupTable& table, const BiasAssessment& bias);

}  // namespace fonb
