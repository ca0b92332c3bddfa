#include "fonb/fair_onb.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "fonb/classifier.hpp"

namespace fonb {

void ThresholdConfig::validate() const {
  for (int p : {pct_radius, pct_count, pct_density})
    if (p < 0 || p > 100) throw ConfigError("percentile level " + std::to_string(p) + " is outside [0, 100]");
}

const char* to_string(ThresholdPopulation p) {
  return p == ThresholdPopulation::kAllBalls ? "all" : "target";
}

ThresholdPopulation parse_threshold_population(const std::string& text) {
  if (text == "all") return ThresholdPopulation::kAllBalls;
  if (text == "target") return ThresholdPopulation::kTargetBalls;
  throw ConfigError("threshold population must be 'all' or 'target', got '" + text + "'");
}

std::vector<int> default_percentile_levels() { return {0, 5, 10, 15, 20}; }

double percentile_lower(std::vector<double> values, int pct) {
  if (values.empty()) throw ConfigError("percentile of an empty list");
  if (pct < 0 || pct > 100) throw ConfigError("percentile level outside [0, 100]");
  std::sort(values.begin(), values.end());
  // Integer arithmetic keeps floor(p/100 * (n-1)) exact.
  const std::size_t idx = static_cast<std::size_t>(pct) * (values.size() - 1) / 100;
  return values[idx];
}

ResolvedThresholds resolve_thresholds(std::span<const BallAttributes> attrs, const ThresholdConfig& cfg) {
  cfg.validate();
  if (attrs.empty()) throw ConfigError("no balls to derive thresholds from");
  std::vector<double> r, c, d;
  for (const auto& a : attrs) {
    r.push_back(a.radius);
    c.push_back(static_cast<double>(a.covered_count));
    d.push_back(a.density);
  }
  return {percentile_lower(std::move(r), cfg.pct_radius), percentile_lower(std::move(c), cfg.pct_count),
          percentile_lower(std::move(d), cfg.pct_density)};
}

UndersampleResult undersample(const Dataset& ds, const Coverage& cov, std::span<const int> targets,
                              const ThresholdConfig& cfg) {
  cfg.validate();
  UndersampleResult res;
  const std::set<int> target_set(targets.begin(), targets.end());
  for (int g : target_set)
    if (!std::binary_search(cov.group_ids.begin(), cov.group_ids.end(), g))
      throw ConfigError("target group " + std::to_string(g) + " is not covered");

  const auto all = ball_attributes(cov);
  std::vector<BallAttributes> attrs;
  for (const auto& a : all)
    if (target_set.count(a.group_id)) attrs.push_back(a);

  std::set<RowId> removed;
  if (target_set.empty()) {
    res.warnings.push_back("no target groups; nothing removed");
  } else if (attrs.empty()) {
    res.warnings.push_back("target groups have no balls; nothing removed");
  } else {
    const ResolvedThresholds thr = resolve_thresholds(
        cfg.population == ThresholdPopulation::kAllBalls ? std::span<const BallAttributes>(all)
                                                         : std::span<const BallAttributes>(attrs),
        cfg);
    res.resolved = thr;
    for (const auto& a : attrs) {
      if (a.radius < thr.radius || static_cast<double>(a.covered_count) < thr.count || a.density < thr.density) {
        res.removed_balls.push_back(a.ball_index);
        const Ball& b = cov.balls[a.ball_index];
        removed.insert(b.assigned_rows.begin(), b.assigned_rows.end());
        res.per_group_removed[b.group_id] += b.assigned_rows.size();
      }
    }
    for (int g : target_set) {
      const auto balls = cov.balls_of_group(g);
      const auto gone = std::count_if(balls.begin(), balls.end(), [&](std::size_t b) {
        return std::binary_search(res.removed_balls.begin(), res.removed_balls.end(), b);
      });
      if (!balls.empty() && static_cast<std::size_t>(gone) == balls.size())
        res.warnings.push_back("group " + std::to_string(g) + " was removed entirely");
    }
  }
  res.removed_rows.assign(removed.begin(), removed.end());
  for (RowId id : ds.row_ids())
    if (!removed.count(id)) res.kept_rows.push_back(id);
  std::sort(res.kept_rows.begin(), res.kept_rows.end());
  return res;
}

FairOnbSampler::FairOnbSampler(const Dataset& ds, std::vector<int> outcomes, AssessmentSource source)
    : ds_(ds), table_(enumerate_groups(ds.schema())), group_of_(table_.assign(ds)) {
  if (outcomes.empty()) outcomes = ds.labels();
  bias_ = assess_bias(ds, outcomes, source);
  std::vector<int> present(group_of_.begin(), group_of_.end());
  std::sort(present.begin(), present.end());
  present.erase(std::unique(present.begin(), present.end()), present.end());
  if (!present.empty()) coverage_ = build_coverage(ds, group_of_, present);
}

TargetSelection FairOnbSampler::targets(Strategy strategy) const {
  auto sel = select_target_groups(table_, bias_, strategy);
  // Groups with no instance in this dataset have nothing to remove.
  std::erase_if(sel.groups, [&](int g) {
    return !std::binary_search(coverage_.group_ids.begin(), coverage_.group_ids.end(), g);
  });
  return sel;
}

UndersampleResult FairOnbSampler::run(const ThresholdConfig& cfg) const {
  auto sel = targets(cfg.strategy);
  auto res = undersample(ds_, coverage_, sel.groups, cfg);
  res.warnings.insert(res.warnings.begin(), sel.warnings.begin(), sel.warnings.end());
  return res;
}

PreprocessOutcome preprocess(const Dataset& ds, const ThresholdConfig& cfg, AssessmentSource source,
                             std::uint64_t seed) {
  std::vector<int> outcomes = ds.labels();
  if (source == AssessmentSource::kModel) outcomes = DecisionTree::fit(ds, seed).predict(ds);
  FairOnbSampler sampler(ds, outcomes, source);
  PreprocessOutcome out;
  out.result = sampler.run(cfg);
  out.data = sampler.apply(out.result);
  out.bias = sampler.bias();
  out.targets = sampler.targets(cfg.strategy).groups;
  return out;
}

}  // namespace fonb
