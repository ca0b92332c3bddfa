#pragma once

// Test-only fixtures and independent oracles. Nothing here calls into the
// code paths it is used to check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "fonb/dataset.hpp"

namespace fonb::testing {

/// Dataset over numeric features (in [0,1] already) plus optional binary
/// protected columns appended after them.
inline Dataset make_dataset(const std::vector<std::vector<double>>& rows, const std::vector<int>& labels,
                            const std::vector<std::vector<int>>& protected_cols = {},
                            const std::vector<std::string>& protected_names = {}) {
  Schema s;
  const std::size_t d = rows.empty() ? 0 : rows.front().size();
  for (std::size_t j = 0; j < d; ++j) {
    s.feature_names.push_back("x" + std::to_string(j));
    s.feature_kinds.push_back(FeatureKind::kNumeric);
  }
  for (std::size_t k = 0; k < protected_cols.size(); ++k) {
    const std::string name = k < protected_names.size() ? protected_names[k] : "p" + std::to_string(k);
    s.feature_names.push_back(name);
    s.feature_kinds.push_back(FeatureKind::kBinary);
    s.protected_features.push_back(name);
  }
  s.class_name = "y";
  s.positive_class_value = "1";
  s.negative_class_value = "0";
  std::vector<double> values;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    values.insert(values.end(), rows[i].begin(), rows[i].end());
    for (const auto& col : protected_cols) values.push_back(col[i]);
  }
  std::vector<RowId> ids(rows.size());
  std::iota(ids.begin(), ids.end(), RowId{0});
  std::vector<ColumnRange> ranges(s.num_features());
  for (std::size_t j = 0; j < d; ++j) ranges[j] = {0.0, 1.0};
  return Dataset(s, values, labels, ids, ranges);
}

/// Uniform random points in [0,1]^d with `n_protected` random binary
/// protected columns and random labels.
inline Dataset random_dataset(std::mt19937_64& rng, std::size_t n, std::size_t d, std::size_t n_protected,
                              int grid = 0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  std::vector<std::vector<double>> rows(n, std::vector<double>(d));
  std::vector<int> labels(n);
  std::vector<std::vector<int>> prot(n_protected, std::vector<int>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (auto& x : rows[i]) {
      x = u(rng);
      // Coarse grids create exact duplicates and equal distances.
      if (grid > 0) x = std::round(x * grid) / grid;
    }
    labels[i] = coin(rng);
    for (auto& col : prot) col[i] = coin(rng);
  }
  for (auto& col : prot) {  // both protected values present
    col[0] = 0;
    if (n > 1) col[1] = 1;
  }
  return make_dataset(rows, labels, prot);
}

// ---------------------------------------------------------------------------
// Brute-force greedy ball cover

inline double oracle_distance(const Dataset& ds, std::size_t a, std::size_t b) {
  double s = 0.0;
  for (std::size_t k = 0; k < ds.num_features(); ++k) {
    const double diff = ds.at(a, k) - ds.at(b, k);
    s += diff * diff;
  }
  return std::sqrt(s);
}

struct OracleBall {
  RowId center_row;
  int group;
  double radius;
  std::vector<RowId> assigned;  // ascending
};

inline double oracle_radius(const Dataset& ds, const std::vector<int>& group_of, std::size_t c) {
  double best = INFINITY;
  double far = 0.0;
  for (std::size_t i = 0; i < ds.num_rows(); ++i) {
    const double d = oracle_distance(ds, c, i);
    if (group_of[i] != group_of[c]) best = std::min(best, d);
    else far = std::max(far, d);
  }
  return std::isinf(best) ? far + 1.0 : best;
}

/// Re-evaluates every candidate from scratch at every step.
inline std::vector<OracleBall> oracle_cover(const Dataset& ds, const std::vector<int>& group_of,
                                            const std::vector<int>& groups) {
  std::vector<OracleBall> out;
  std::set<int> gs(groups.begin(), groups.end());
  for (int g : gs) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < ds.num_rows(); ++i)
      if (group_of[i] == g) members.push_back(i);
    std::vector<double> radius;
    for (auto m : members) radius.push_back(oracle_radius(ds, group_of, m));
    std::set<std::size_t> uncovered(members.begin(), members.end());
    while (!uncovered.empty()) {
      std::size_t best = 0, best_count = 0;
      bool have = false;
      for (std::size_t a = 0; a < members.size(); ++a) {
        std::size_t count = 0;
        for (auto u : uncovered) {
          const bool inside = radius[a] == 0.0 ? u == members[a] : oracle_distance(ds, members[a], u) < radius[a];
          count += inside;
        }
        if (count == 0) continue;
        const bool better =
            !have || count > best_count ||
            (count == best_count &&
             (radius[a] > radius[best] ||
              (radius[a] == radius[best] && ds.row_id(members[a]) < ds.row_id(members[best]))));
        if (better) {
          best = a;
          best_count = count;
          have = true;
        }
      }
      OracleBall b{ds.row_id(members[best]), g, radius[best], {}};
      for (auto it = uncovered.begin(); it != uncovered.end();) {
        const bool inside =
            radius[best] == 0.0 ? *it == members[best] : oracle_distance(ds, members[best], *it) < radius[best];
        if (inside) {
          b.assigned.push_back(ds.row_id(*it));
          it = uncovered.erase(it);
        } else {
          ++it;
        }
      }
      std::sort(b.assigned.begin(), b.assigned.end());
      out.push_back(std::move(b));
    }
  }
  return out;
}

/// Positions of the k nearest rows to i (excluding i), ties by row id, via a
/// full sort.
inline std::vector<std::size_t> oracle_knn(const Dataset& ds, std::size_t i, const std::vector<std::size_t>& pool,
                                           std::size_t k) {
  std::vector<std::size_t> cand;
  for (auto p : pool)
    if (p != i) cand.push_back(p);
  std::sort(cand.begin(), cand.end(), [&](std::size_t a, std::size_t b) {
    const double da = oracle_distance(ds, i, a), db = oracle_distance(ds, i, b);
    return da < db || (da == db && ds.row_id(a) < ds.row_id(b));
  });
  cand.resize(std::min(k, cand.size()));
  return cand;
}

// ---------------------------------------------------------------------------
// Synthetic biased data

/// Two Gaussian classes in 2-D plus one binary protected feature "p". Rows
/// with p=0 get three times the positive rate of p=1 (0.30 vs 0.10). All
/// p=0 positives sit on the class boundary, mixed with most p=0 negatives;
/// p=1 positives sit in the positive core.
inline Dataset biased_blobs(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> core(0.0, 0.10);
  std::normal_distribution<double> edge_pos(0.0, 0.08);
  std::normal_distribution<double> edge_neg(0.0, 0.06);
  std::bernoulli_distribution half(0.5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::vector<int> prot;
  for (std::size_t i = 0; i < n; ++i) {
    const int p = half(rng) ? 1 : 0;
    const double r = u(rng);
    int y = 0;
    double x0, x1;
    if (p == 1 && r < 0.10) {
      y = 1;
      x0 = 0.75 + core(rng);
      x1 = 0.75 + core(rng);
    } else if (p == 0 && r < 0.30) {
      y = 1;
      x0 = 0.5 + edge_pos(rng);
      x1 = 0.5 + edge_pos(rng);
    } else if (p == 0 && r < 0.85) {
      x0 = 0.5 + edge_neg(rng);
      x1 = 0.5 + edge_neg(rng);
    } else {
      x0 = 0.25 + core(rng);
      x1 = 0.25 + core(rng);
    }
    rows.push_back({std::clamp(x0, 0.0, 1.0), std::clamp(x1, 0.0, 1.0)});
    labels.push_back(y);
    prot.push_back(p);
  }
  return make_dataset(rows, labels, {prot}, {"p"});
}

/// biased_blobs plus a second, unbiased binary protected feature "q".
inline Dataset two_feature_blobs(std::size_t n, std::uint64_t seed) {
  const Dataset base = biased_blobs(n, seed);
  std::mt19937_64 rng(seed + 1);
  std::bernoulli_distribution coin(0.5);
  std::vector<std::vector<double>> rows;
  std::vector<int> p, q;
  for (std::size_t i = 0; i < base.num_rows(); ++i) {
    rows.push_back({base.at(i, 0), base.at(i, 1)});
    p.push_back(static_cast<int>(base.at(i, 2)));
    q.push_back(coin(rng) ? 1 : 0);
  }
  return make_dataset(rows, base.labels(), {p, q}, {"p", "q"});
}

}  // namespace fonb::testing
