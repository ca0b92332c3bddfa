#include "fonb/groups.hpp"

#include <algorithm>
#include <sstream>

#include "fonb/metrics.hpp"

namespace fonb {

GroupTable::GroupTable(std::vector<std::string> protected_order) : protected_order_(std::move(protected_order)) {
  if (protected_order_.empty()) throw ConfigError("at least one protected feature is required");
  if (protected_order_.size() > 20) throw ConfigError("too many protected features");
}

int GroupTable::group_id(const std::vector<int>& protected_values, int class_value) const {
  if (protected_values.size() != num_protected()) throw ConfigError("protected value tuple has the wrong arity");
  int id = 0;
  for (int v : protected_values) {
    if (v != 0 && v != 1) throw ValidationError("protected values must be 0 or 1");
    id = (id << 1) | v;
  }
  if (class_value != 0 && class_value != 1) throw ValidationError("class values must be 0 or 1");
  return (id << 1) | class_value;
}

std::vector<int> GroupTable::protected_values(int group) const {
  std::vector<int> out(num_protected());
  for (std::size_t k = 0; k < num_protected(); ++k) out[k] = protected_value(group, k);
  return out;
}

std::vector<int> GroupTable::assign(const Dataset& ds) const {
  std::vector<std::size_t> cols;
  for (const auto& name : protected_order_) cols.push_back(ds.schema().feature_index(name));
  std::vector<int> out(ds.num_rows());
  for (std::size_t i = 0; i < ds.num_rows(); ++i) {
    int id = 0;
    for (std::size_t c : cols) id = (id << 1) | (ds.at(i, c) == 1.0 ? 1 : 0);
    out[i] = (id << 1) | ds.label(i);
  }
  return out;
}

std::string GroupTable::describe() const {
  std::ostringstream os;
  for (const auto& n : protected_order_) os << n << ' ';
  os << "class group\n";
  for (int g = 0; g < num_groups(); ++g) {
    for (std::size_t k = 0; k < num_protected(); ++k) os << protected_value(g, k) << ' ';
    os << class_of(g) << ' ' << g << '\n';
  }
  return os.str();
}

GroupTable enumerate_groups(const Schema& schema) { return GroupTable(schema.protected_features); }

const char* to_string(AssessmentSource s) { return s == AssessmentSource::kDataset ? "dataset" : "model"; }

AssessmentSource parse_assessment_source(const std::string& text) {
  if (text == "dataset") return AssessmentSource::kDataset;
  if (text == "model") return AssessmentSource::kModel;
  throw ConfigError("assessment source must be 'dataset' or 'model', got '" + text + "'");
}

bool BiasAssessment::any_biased() const {
  return std::any_of(per_feature.begin(), per_feature.end(),
                     [](const FeatureBias& f) { return f.favored_value.has_value(); });
}

BiasAssessment assess_bias(const Dataset& ds, const std::vector<int>& outcomes, AssessmentSource source) {
  if (outcomes.size() != ds.num_rows()) throw ConfigError("outcomes are not aligned with dataset rows");
  BiasAssessment out;
  out.source = source;
  for (std::size_t k = 0; k < ds.schema().protected_features.size(); ++k) {
    const auto pv = ds.protected_column(k);
    auto counts = GroupOutcomeCounts::tally(pv, ds.labels(), outcomes);
    FeatureBias fb;
    fb.feature = ds.schema().protected_features[k];
    for (int v = 0; v < 2; ++v) {
      if (counts.by_value[v].n_total == 0)
        throw UndefinedMetricError("protected feature '" + fb.feature + "' has no instances with value " +
                                   std::to_string(v));
    }
    const DiValue d = di(counts);
    fb.di = d.value;
    fb.status = d.status;
    if (d.status == DiStatus::kInfinite || (d.finite() && d.value > 1.0)) {
      fb.favored_value = 0;
    } else if (d.finite() && d.value < 1.0) {
      fb.favored_value = 1;
    }
    out.per_feature.push_back(std::move(fb));
  }
  return out;
}

const char* to_string(Strategy s) { return s == Strategy::kUnion ? "union" : "intersection"; }

Strategy parse_strategy(const std::string& text) {
  if (text == "union") return Strategy::kUnion;
  if (text == "intersection") return Strategy::kIntersection;
  throw ConfigError("strategy must be 'union' or 'intersection', got '" + text + "'");
}

namespace {

// Index into the table's protected order for each assessed feature.
std::vector<std::size_t> feature_positions(const GroupTable& table, const BiasAssessment& bias) {
  std::vector<std::size_t> pos;
  for (const auto& f : bias.per_feature) {
    auto it = std::find(table.protected_order().begin(), table.protected_order().end(), f.feature);
    if (it == table.protected_order().end())
      throw ConfigError("assessed feature '" + f.feature + "' is not in the group table");
    pos.push_back(static_cast<std::size_t>(it - table.protected_order().begin()));
  }
  return pos;
}

}  // namespace

TargetSelection select_target_groups(const GroupTable& table, const BiasAssessment& bias, Strategy strategy) {
  TargetSelection sel;
  if (!bias.any_biased()) {
    sel.warnings.push_back("no protected feature is biased; nothing to undersample");
    return sel;
  }
  const auto pos = feature_positions(table, bias);
  for (int g = 0; g < table.num_groups(); ++g) {
    if (table.class_of(g) != 1) continue;
    bool any = false, all = true;
    for (std::size_t f = 0; f < bias.per_feature.size(); ++f) {
      const auto& fav = bias.per_feature[f].favored_value;
      if (!fav) continue;
      const bool match = table.protected_value(g, pos[f]) == *fav;
      any = any || match;
      all = all && match;
    }
    if (strategy == Strategy::kUnion ? any : all) sel.groups.push_back(g);
  }
  if (sel.groups.empty())
    sel.warnings.push_back("empty target selection; preprocessing is a no-op");
  return sel;
}

std::vector<int> disadvantaged_groups(const GroupTable& table, const BiasAssessment& bias) {
  if (!bias.any_biased()) return {};
  const auto favored = select_target_groups(table, bias, Strategy::kUnion).groups;
  std::vector<int> out;
  for (int g = 0; g < table.num_groups(); ++g)
    if (table.class_of(g) == 1 && !std::binary_search(favored.begin(), favored.end(), g)) out.push_back(g);
  return out;
}

}  // namespace fonb
