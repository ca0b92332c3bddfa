#include "fonb/coverage.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <queue>
#include <set>
#include <tuple>

#include "fonb/format.hpp"

namespace fonb {

double distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    const double d = a[k] - b[k];
    s += d * d;
  }
  return std::sqrt(s);
}

double max_pure_radius(std::size_t center, const Dataset& ds, std::span<const int> group_of) {
  if (center >= ds.num_rows()) throw ConfigError("center row out of range");
  if (group_of.size() != ds.num_rows()) throw ConfigError("group assignment must cover every row");
  const int g = group_of[center];
  const auto c = ds.row(center);
  double nearest_enemy = std::numeric_limits<double>::infinity();
  double farthest_own = 0.0;
  for (std::size_t i = 0; i < ds.num_rows(); ++i) {
    const double d = distance(c, ds.row(i));
    if (group_of[i] != g) {
      nearest_enemy = std::min(nearest_enemy, d);
    } else {
      farthest_own = std::max(farthest_own, d);
    }
  }
  return std::isinf(nearest_enemy) ? farthest_own + 1.0 : nearest_enemy;
}

std::vector<std::size_t> Coverage::balls_of_group(int group) const {
  std::vector<std::size_t> out;
  for (std::size_t b = 0; b < balls.size(); ++b)
    if (balls[b].group_id == group) out.push_back(b);
  return out;
}

namespace {

// Priority of a candidate: more newly covered rows, then larger radius, then
// smaller row id.
struct Candidate {
  std::size_t count;
  double radius;
  RowId row;
  std::size_t member;  // index into the group's member list

  bool operator<(const Candidate& o) const {
    // std::priority_queue pops the largest element.
    return std::tie(count, radius, o.row) < std::tie(o.count, o.radius, row);
  }
};

void cover_group(const Dataset& ds, std::span<const int> group_of, int group, Coverage& out) {
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < ds.num_rows(); ++i)
    if (group_of[i] == group) members.push_back(i);
  if (members.empty()) throw ConfigError("group " + std::to_string(group) + " has no instances");

  const std::size_t m = members.size();
  std::vector<double> radius(m);
  // inside[a] lists member indices strictly inside the ball centered at a.
  std::vector<std::vector<std::uint32_t>> inside(m);
  for (std::size_t a = 0; a < m; ++a) {
    radius[a] = max_pure_radius(members[a], ds, group_of);
    const auto c = ds.row(members[a]);
    if (radius[a] == 0.0) {
      inside[a].push_back(static_cast<std::uint32_t>(a));
      continue;
    }
    for (std::size_t b = 0; b < m; ++b)
      if (distance(c, ds.row(members[b])) < radius[a]) inside[a].push_back(static_cast<std::uint32_t>(b));
  }

  std::vector<bool> covered(m, false);
  std::size_t remaining = m;
  std::priority_queue<Candidate> heap;
  for (std::size_t a = 0; a < m; ++a) heap.push({inside[a].size(), radius[a], ds.row_id(members[a]), a});

  std::size_t order = 0;
  // Lazy greedy: counts only decrease, so a popped entry whose refreshed
  // count is unchanged is the true maximum.
  while (remaining > 0) {
    Candidate top = heap.top();
    heap.pop();
    std::size_t fresh = 0;
    for (auto b : inside[top.member]) fresh += !covered[b];
    if (fresh != top.count) {
      top.count = fresh;
      if (fresh > 0) heap.push(top);
      continue;
    }
    Ball ball;
    ball.center_row = top.row;
    ball.group_id = group;
    ball.radius = top.radius;
    ball.selection_order = order++;
    for (auto b : inside[top.member]) {
      if (covered[b]) continue;
      covered[b] = true;
      --remaining;
      ball.assigned_rows.push_back(ds.row_id(members[b]));
      out.assignment.emplace(ds.row_id(members[b]), out.balls.size());
    }
    std::sort(ball.assigned_rows.begin(), ball.assigned_rows.end());
    ball.covered_count = ball.assigned_rows.size();
    ball.density = ball.radius > 0.0 ? static_cast<double>(ball.covered_count) / ball.radius : 0.0;
    out.balls.push_back(std::move(ball));
  }
}

}  // namespace

Coverage build_coverage(const Dataset& ds, std::span<const int> group_of, std::vector<int> groups) {
  if (group_of.size() != ds.num_rows()) throw ConfigError("group assignment must cover every row");
  if (groups.empty()) throw ConfigError("no groups to cover");
  std::sort(groups.begin(), groups.end());
  groups.erase(std::unique(groups.begin(), groups.end()), groups.end());
  Coverage cov;
  cov.group_ids = groups;
  for (int g : groups) cover_group(ds, group_of, g, cov);
  return cov;
}

std::vector<BallAttributes> ball_attributes(const Coverage& c) {
  std::vector<BallAttributes> out;
  out.reserve(c.balls.size());
  for (std::size_t b = 0; b < c.balls.size(); ++b) {
    const Ball& ball = c.balls[b];
    out.push_back({b, ball.group_id, ball.radius, ball.covered_count,
                   ball.radius > 0.0 ? static_cast<double>(ball.covered_count) / ball.radius : 0.0,
                   ball.degenerate()});
  }
  return out;
}

void write_coverage_csv(const Coverage& c, std::ostream& out) {
  out << "group_id,selection_order,center_row,radius,covered_count,density\n";
  for (const Ball& b : c.balls) {
    out << b.group_id << ',' << b.selection_order << ',' << b.center_row << ',' << format_double(b.radius) << ','
        << b.covered_count << ',' << format_double(b.density) << '\n';
  }
}

}  // namespace fonb
