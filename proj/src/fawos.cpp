#include "fonb/fawos.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "fonb/coverage.hpp"

namespace fonb {

const char* to_string(NeighborhoodLabel l) {
  switch (l) {
    case NeighborhoodLabel::kSafe:
      return "safe";
    case NeighborhoodLabel::kBorderline:
      return "borderline";
    case NeighborhoodLabel::kRare:
      return "rare";
    case NeighborhoodLabel::kOutlier:
      return "outlier";
  }
  return "?";
}

NeighborhoodLabel label_from_same_class(int same_class) {
  if (same_class >= 4) return NeighborhoodLabel::kSafe;
  if (same_class >= 2) return NeighborhoodLabel::kBorderline;
  if (same_class == 1) return NeighborhoodLabel::kRare;
  return NeighborhoodLabel::kOutlier;
}

void FawosConfig::validate() const {
  for (double w : {weights.safe, weights.borderline, weights.rare})
    if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("FAWOS weights must be finite and non-negative");
  if (!(oversampling_factor >= 0.0) || !std::isfinite(oversampling_factor))
    throw ConfigError("oversampling factor must be finite and non-negative");
}

std::vector<FawosWeights> fawos_weight_table() {
  return {{0.0, 0.4, 0.6}, {0.0, 0.5, 0.5}, {0.0, 0.6, 0.4}, {0.33, 0.33, 0.33}};
}

std::vector<double> fawos_default_factors() { return {0.8, 1.0, 1.2}; }

std::vector<FawosConfig> fawos_default_configs() {
  std::vector<FawosConfig> out;
  for (const auto& w : fawos_weight_table())
    for (double f : fawos_default_factors()) out.push_back({w, f});
  return out;
}

std::vector<std::size_t> nearest_neighbors(const Dataset& ds, std::size_t i, std::span<const std::size_t> candidates,
                                           std::size_t k) {
  std::vector<std::pair<double, std::size_t>> d;
  d.reserve(candidates.size());
  const auto x = ds.row(i);
  for (std::size_t c : candidates)
    if (c != i) d.emplace_back(distance(x, ds.row(c)), c);
  const std::size_t take = std::min(k, d.size());
  auto cmp = [&](const auto& a, const auto& b) {
    return a.first < b.first || (a.first == b.first && ds.row_id(a.second) < ds.row_id(b.second));
  };
  std::partial_sort(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(take), d.end(), cmp);
  std::vector<std::size_t> out;
  for (std::size_t t = 0; t < take; ++t) out.push_back(d[t].second);
  return out;
}

std::vector<NeighborhoodLabel> label_neighborhoods(const Dataset& ds) {
  if (ds.num_rows() < kFawosNeighbors + 1)
    throw InfeasibleError("neighborhood labeling needs at least 6 rows");
  std::vector<std::size_t> all(ds.num_rows());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  std::vector<NeighborhoodLabel> out(ds.num_rows());
  for (std::size_t i = 0; i < ds.num_rows(); ++i) {
    int same = 0;
    for (std::size_t n : nearest_neighbors(ds, i, all, kFawosNeighbors)) same += ds.label(n) == ds.label(i);
    out[i] = label_from_same_class(same);
  }
  return out;
}

std::size_t fawos_synthetic_count(double factor, std::size_t largest_group, std::size_t group_size) {
  const double deficit = static_cast<double>(largest_group - std::min(largest_group, group_size));
  return static_cast<std::size_t>(std::llround(factor * deficit));
}

std::vector<int> oversampling_targets(const Dataset& ds, const GroupTable& table, const BiasAssessment& bias) {
  const auto group_of = table.assign(ds);
  std::vector<int> out;
  for (int g : disadvantaged_groups(table, bias))
    if (std::count(group_of.begin(), group_of.end(), g) >= 2) out.push_back(g);
  return out;
}

FawosResult oversample(const Dataset& ds, std::span<const int> targets, const FawosConfig& cfg, std::uint64_t seed,
                       std::optional<RowId> first_new_id) {
  cfg.validate();
  FawosResult res;
  const std::set<int> target_set(targets.begin(), targets.end());
  if (target_set.empty()) throw ConfigError("FAWOS needs at least one target group");

  const GroupTable table = enumerate_groups(ds.schema());
  const auto group_of = table.assign(ds);
  std::vector<std::vector<std::size_t>> members(static_cast<std::size_t>(table.num_groups()));
  for (std::size_t i = 0; i < ds.num_rows(); ++i) members[static_cast<std::size_t>(group_of[i])].push_back(i);
  std::size_t largest = 0;
  for (const auto& m : members) largest = std::max(largest, m.size());

  for (int g : target_set) {
    if (g < 0 || g >= table.num_groups()) throw ConfigError("unknown target group " + std::to_string(g));
    if (members[static_cast<std::size_t>(g)].size() < 2)
      throw InfeasibleError("target group " + std::to_string(g) + " has fewer than 2 rows");
  }

  bool any_needed = false;
  for (int g : target_set)
    any_needed = any_needed ||
                 fawos_synthetic_count(cfg.oversampling_factor, largest, members[static_cast<std::size_t>(g)].size()) > 0;
  if (!any_needed) {
    res.data = ds;
    return res;
  }

  const auto labels = label_neighborhoods(ds);
  const std::size_t d = ds.num_features();
  RowId next_id = 0;
  for (RowId id : ds.row_ids()) next_id = std::max(next_id, id + 1);
  if (first_new_id) {
    if (*first_new_id < next_id) throw ConfigError("synthetic ids would collide with existing rows");
    next_id = *first_new_id;
  }

  std::mt19937_64 rng(seed);
  std::vector<double> new_values;
  std::vector<int> new_labels;
  std::vector<RowId> new_ids;

  for (int g : target_set) {
    const auto& rows = members[static_cast<std::size_t>(g)];
    const std::size_t count = fawos_synthetic_count(cfg.oversampling_factor, largest, rows.size());
    if (count == 0) continue;

    std::vector<double> w(rows.size());
    double total = 0.0;
    for (std::size_t t = 0; t < rows.size(); ++t) {
      switch (labels[rows[t]]) {
        case NeighborhoodLabel::kSafe:
          w[t] = cfg.weights.safe;
          break;
        case NeighborhoodLabel::kBorderline:
          w[t] = cfg.weights.borderline;
          break;
        case NeighborhoodLabel::kRare:
          w[t] = cfg.weights.rare;
          break;
        case NeighborhoodLabel::kOutlier:
          w[t] = 0.0;
          break;
      }
      total += w[t];
    }
    if (total == 0.0) {
      std::fill(w.begin(), w.end(), 1.0);
      res.warnings.push_back("group " + std::to_string(g) + " has no weighted seed; drawing seeds uniformly");
    }
    std::discrete_distribution<std::size_t> pick_seed(w.begin(), w.end());
    std::uniform_real_distribution<double> gap_dist(0.0, 1.0);

    std::vector<std::vector<std::size_t>> neighbor_cache(rows.size());
    for (std::size_t s = 0; s < count; ++s) {
      const std::size_t t = pick_seed(rng);
      auto& nn = neighbor_cache[t];
      if (nn.empty()) nn = nearest_neighbors(ds, rows[t], rows, kFawosNeighbors);
      std::uniform_int_distribution<std::size_t> pick_nn(0, nn.size() - 1);
      const std::size_t seed_pos = rows[t];
      const std::size_t nb_pos = nn[pick_nn(rng)];
      const double gap = gap_dist(rng);
      const auto a = ds.row(seed_pos);
      const auto b = ds.row(nb_pos);
      for (std::size_t j = 0; j < d; ++j) {
        if (ds.schema().feature_kinds[j] == FeatureKind::kBinary) {
          new_values.push_back(a[j]);
        } else {
          // Clamp keeps the value on the segment despite rounding.
          const double lo = std::min(a[j], b[j]), hi = std::max(a[j], b[j]);
          new_values.push_back(std::clamp(a[j] + gap * (b[j] - a[j]), lo, hi));
        }
      }
      new_labels.push_back(ds.label(seed_pos));
      new_ids.push_back(next_id);
      res.synthetics.push_back({next_id, g, ds.row_id(seed_pos), ds.row_id(nb_pos), gap});
      ++next_id;
    }
    res.per_group_added[g] = count;
  }
  res.data = ds.append(new_values, new_labels, new_ids);
  return res;
}

}  // namespace fonb
