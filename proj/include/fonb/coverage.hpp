#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <unordered_map>
#include <vector>

#include "fonb/dataset.hpp"

namespace fonb {

/// A pure-group open ball: no row of another group lies strictly inside it.
struct Ball {
  RowId center_row = 0;
  int group_id = 0;
  double radius = 0.0;
  /// Rows newly covered when this ball was selected.
  std::vector<RowId> assigned_rows;
  std::size_t covered_count = 0;
  /// covered_count / radius, or 0 for a radius-0 ball.
  double density = 0.0;
  /// 0-based position among the balls of its group.
  std::size_t selection_order = 0;

  bool degenerate() const { return radius == 0.0; }
};

struct Coverage {
  /// Balls grouped by ascending group id, each group in selection order.
  std::vector<Ball> balls;
  /// Row id -> index into `balls`.
  std::unordered_map<RowId, std::size_t> assignment;
  std::vector<int> group_ids;

  std::size_t ball_of(RowId row) const { return assignment.at(row); }
  std::vector<std::size_t> balls_of_group(int group) const;
};

/// Euclidean distance. Every geometric decision in the library goes through
/// this function so purity checks can compare distances exactly.
double distance(std::span<const double> a, std::span<const double> b);

/// Distance from row `center` (a position in ds) to the nearest row of a
/// different group. With no such row, returns the distance to the farthest
/// own-group row plus one so the ball holds the whole group.
double max_pure_radius(std::size_t center, const Dataset& ds, std::span<const int> group_of);

/// Greedy ball cover of each group in `groups`. For every group, each of its
/// rows is a candidate center with its max pure radius; the candidate whose
/// open ball holds the most not-yet-covered rows of the group is selected
/// until the group is covered. A radius-0 ball covers only its center. Ties
/// go to the larger radius, then the smaller center row id.
Coverage build_coverage(const Dataset& ds, std::span<const int> group_of, std::vector<int> groups);

struct BallAttributes {
  std::size_t ball_index = 0;
  int group_id = 0;
  double radius = 0.0;
  std::size_t covered_count = 0;
  double density = 0.0;
  bool degenerate = false;
};

std::vector<BallAttributes> ball_attributes(const Coverage& c);

/// Columns: group_id, selection_order, center_row, radius, covered_count, density.
void write_coverage_csv(const Coverage& c, std::ostream& out);

}  // namespace fonb
