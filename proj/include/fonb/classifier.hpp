#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fonb/dataset.hpp"

namespace fonb {

/// Split nodes send x[feature] <= threshold to `left`. Leaves have feature < 0.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

/// Unpruned CART classifier with Gini impurity.
///
/// Any impure node with at least two rows and two distinct values in some
/// feature is split on the (feature, midpoint threshold) pair with the lowest
/// weighted child Gini; ties go to the lowest feature index, then the lowest
/// threshold. The tree therefore fits any consistent training set exactly.
class DecisionTree {
 public:
  /// `seed` is recorded for provenance; tie-breaking is fully deterministic.
  static DecisionTree fit(const Dataset& train, std::uint64_t seed = 30);

  double score(std::span<const double> row) const;
  int predict(std::span<const double> row) const;
  std::vector<double> score(const Dataset& ds) const;
  std::vector<int> predict(const Dataset& ds) const;

  const std::vector<TreeNode>& nodes() const { return nodes_; }
  std::size_t num_features() const { return num_features_; }
  std::size_t depth() const;
  std::uint64_t seed() const { return seed_; }

  /// Indented text dump; identical trees serialize identically.
  std::string serialize(const std::vector<std::string>& feature_names = {}) const;

 private:
  const TreeNode& leaf_for(std::span<const double> row) const;

  std::vector<TreeNode> nodes_;
  std::size_t num_features_ = 0;
  std::uint64_t seed_ = 0;
};

}  // namespace fonb
