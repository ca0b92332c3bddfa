#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fonb/dataset.hpp"
#include "fonb/groups.hpp"

namespace fonb {

enum class NeighborhoodLabel { kSafe, kBorderline, kRare, kOutlier };
const char* to_string(NeighborhoodLabel l);

/// Label from the number of same-class rows among the 5 nearest neighbors:
/// 4-5 safe, 2-3 borderline, 1 rare, 0 outlier.
NeighborhoodLabel label_from_same_class(int same_class);

struct FawosWeights {
  double safe = 0.0;
  double borderline = 0.0;
  double rare = 0.0;
  bool operator==(const FawosWeights&) const = default;
};

struct FawosConfig {
  FawosWeights weights;
  double oversampling_factor = 1.0;

  void validate() const;
};

/// The four weight rows used with FAWOS (safe, borderline, rare).
std::vector<FawosWeights> fawos_weight_table();
std::vector<double> fawos_default_factors();
/// Cross product of the weight table and the default factors (12 configs).
std::vector<FawosConfig> fawos_default_configs();

inline constexpr std::size_t kFawosNeighbors = 5;

/// `k` nearest rows (by position) to row `i` among `candidates`, excluding
/// `i` itself. Distance ties go to the smaller row id.
std::vector<std::size_t> nearest_neighbors(const Dataset& ds, std::size_t i, std::span<const std::size_t> candidates,
                                           std::size_t k);

/// Per-row label from the class of the 5 nearest neighbors. Needs >= 6 rows.
std::vector<NeighborhoodLabel> label_neighborhoods(const Dataset& ds);

struct Synthetic {
  RowId row_id = 0;
  int group = 0;
  RowId seed_row = 0;
  RowId neighbor_row = 0;
  double gap = 0.0;  // interpolation coefficient in [0, 1]
};

struct FawosResult {
  Dataset data;
  std::vector<Synthetic> synthetics;
  std::map<int, std::size_t> per_group_added;
  std::vector<std::string> warnings;
};

/// Number of synthetics for a group: round(factor * (largest - size)).
std::size_t fawos_synthetic_count(double factor, std::size_t largest_group, std::size_t group_size);

/// Disadvantaged positive-class groups with at least two rows in `ds`, the
/// groups FAWOS can interpolate within.
std::vector<int> oversampling_targets(const Dataset& ds, const GroupTable& table, const BiasAssessment& bias);

/// Weighted SMOTE on the target groups. Each target group receives
/// round(factor * deficit) synthetic rows, where the deficit is measured
/// against the largest class x protected group. Seeds are drawn with
/// probability proportional to their label weight (outliers never); each
/// synthetic interpolates numeric features between the seed and one of its
/// 5 nearest same-group neighbors and copies binary features from the seed.
/// Synthetic ids start at `first_new_id`, or after the largest id in `ds`.
FawosResult oversample(const Dataset& ds, std::span<const int> targets, const FawosConfig& cfg, std::uint64_t seed,
                       std::optional<RowId> first_new_id = std::nullopt);

}  // namespace fonb
