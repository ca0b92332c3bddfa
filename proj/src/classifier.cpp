#include "fonb/classifier.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "fonb/format.hpp"

namespace fonb {

namespace {

// n * gini for a node holding `pos` positives out of `n`.
double scaled_gini(double pos, double n) {
  if (n == 0.0) return 0.0;
  const double neg = n - pos;
  return n - (pos * pos + neg * neg) / n;
}

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double impurity = 0.0;  // sum of scaled child ginis
};

Split best_split(const Dataset& ds, const std::vector<std::size_t>& rows, std::size_t pos_total) {
  Split best;
  const double n = static_cast<double>(rows.size());
  std::vector<std::size_t> order(rows);
  for (std::size_t f = 0; f < ds.num_features(); ++f) {
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const double va = ds.at(a, f), vb = ds.at(b, f);
      return va < vb || (va == vb && a < b);
    });
    std::size_t left_pos = 0;
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
      left_pos += static_cast<std::size_t>(ds.label(order[i]));
      const double lo = ds.at(order[i], f), hi = ds.at(order[i + 1], f);
      if (!(lo < hi)) continue;
      const double nl = static_cast<double>(i + 1);
      const double impurity = scaled_gini(static_cast<double>(left_pos), nl) +
                              scaled_gini(static_cast<double>(pos_total - left_pos), n - nl);
      if (best.feature < 0 || impurity < best.impurity) {
        double thr = lo + (hi - lo) / 2.0;
        if (!(thr < hi)) thr = lo;
        best = {static_cast<int>(f), thr, impurity};
      }
    }
  }
  return best;
}

}  // namespace

DecisionTree DecisionTree::fit(const Dataset& train, std::uint64_t seed) {
  if (train.empty()) throw ConfigError("cannot fit a tree on an empty training set");
  DecisionTree tree;
  tree.num_features_ = train.num_features();
  tree.seed_ = seed;

  struct Pending {
    int node;
    std::vector<std::size_t> rows;
  };
  std::vector<std::size_t> all(train.num_rows());
  std::iota(all.begin(), all.end(), 0);
  tree.nodes_.emplace_back();
  std::vector<Pending> stack;
  stack.push_back({0, std::move(all)});

  while (!stack.empty()) {
    Pending cur = std::move(stack.back());
    stack.pop_back();
    std::size_t pos = 0;
    for (std::size_t r : cur.rows) pos += static_cast<std::size_t>(train.label(r));
    TreeNode& node = tree.nodes_[cur.node];
    node.n_pos = pos;
    node.n_neg = cur.rows.size() - pos;
    if (cur.rows.size() < 2 || node.n_pos == 0 || node.n_neg == 0) continue;

    const Split s = best_split(train, cur.rows, pos);
    if (s.feature < 0) continue;  // all rows share identical feature values

    std::vector<std::size_t> left, right;
    for (std::size_t r : cur.rows)
      (train.at(r, static_cast<std::size_t>(s.feature)) <= s.threshold ? left : right).push_back(r);

    const int l = static_cast<int>(tree.nodes_.size());
    tree.nodes_.emplace_back();
    tree.nodes_.emplace_back();
    TreeNode& parent = tree.nodes_[cur.node];  // re-fetch after growth
    parent.feature = s.feature;
    parent.threshold = s.threshold;
    parent.left = l;
    parent.right = l + 1;
    stack.push_back({l + 1, std::move(right)});
    stack.push_back({l, std::move(left)});
  }
  return tree;
}

const TreeNode& DecisionTree::leaf_for(std::span<const double> row) const {
  if (row.size() != num_features_)
    throw ConfigError("row has " + std::to_string(row.size()) + " features, tree expects " +
                      std::to_string(num_features_));
  const TreeNode* n = &nodes_.front();
  while (!n->is_leaf()) n = &nodes_[row[static_cast<std::size_t>(n->feature)] <= n->threshold ? n->left : n->right];
  return *n;
}

double DecisionTree::score(std::span<const double> row) const {
  const TreeNode& leaf = leaf_for(row);
  return static_cast<double>(leaf.n_pos) / static_cast<double>(leaf.n_pos + leaf.n_neg);
}

int DecisionTree::predict(std::span<const double> row) const {
  const TreeNode& leaf = leaf_for(row);
  return leaf.n_pos >= leaf.n_neg ? 1 : 0;
}

std::vector<double> DecisionTree::score(const Dataset& ds) const {
  std::vector<double> out(ds.num_rows());
  for (std::size_t i = 0; i < ds.num_rows(); ++i) out[i] = score(ds.row(i));
  return out;
}

std::vector<int> DecisionTree::predict(const Dataset& ds) const {
  std::vector<int> out(ds.num_rows());
  for (std::size_t i = 0; i < ds.num_rows(); ++i) out[i] = predict(ds.row(i));
  return out;
}

std::size_t DecisionTree::depth() const {
  std::vector<std::size_t> level(nodes_.size(), 0);
  std::size_t deepest = 0;
  // Children are always created after their parent.
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, level[i]);
    if (!nodes_[i].is_leaf()) {
      level[static_cast<std::size_t>(nodes_[i].left)] = level[i] + 1;
      level[static_cast<std::size_t>(nodes_[i].right)] = level[i] + 1;
    }
  }
  return deepest;
}

std::string DecisionTree::serialize(const std::vector<std::string>& feature_names) const {
  std::ostringstream os;
  struct Item {
    int node;
    int indent;
  };
  std::vector<Item> stack{{0, 0}};
  while (!stack.empty()) {
    const auto [idx, indent] = stack.back();
    stack.pop_back();
    const TreeNode& n = nodes_[static_cast<std::size_t>(idx)];
    os << std::string(static_cast<std::size_t>(indent) * 2, ' ');
    if (n.is_leaf()) {
      os << "leaf pos=" << n.n_pos << " neg=" << n.n_neg << '\n';
      continue;
    }
    const auto f = static_cast<std::size_t>(n.feature);
    const std::string name = f < feature_names.size() ? feature_names[f] : "x[" + std::to_string(f) + "]";
    os << name << " <= " << format_double(n.threshold) << " (pos=" << n.n_pos << " neg=" << n.n_neg << ")\n";
    stack.push_back({n.right, indent + 1});
    stack.push_back({n.left, indent + 1});
  }
  return os.str();
}

}  // namespace fonb
