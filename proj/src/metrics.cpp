#include "fonb/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace fonb {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double ratio(std::size_t num, std::size_t den) { return static_cast<double>(num) / static_cast<double>(den); }

void require_both_values(const GroupOutcomeCounts& c) {
  for (int v = 0; v < 2; ++v)
    if (c.by_value[v].n_total == 0)
      throw UndefinedMetricError("protected value " + std::to_string(v) + " has no instances");
}

}  // namespace

double OutcomeCounts::positive_rate() const {
  if (n_total == 0) throw UndefinedMetricError("positive rate of an empty group");
  return ratio(n_pred_pos, n_total);
}

double OutcomeCounts::true_positive_rate() const {
  if (n_actual_pos == 0) throw UndefinedMetricError("true positive rate without actual positives");
  return ratio(n_true_pos, n_actual_pos);
}

double OutcomeCounts::false_positive_rate() const {
  if (n_total == n_actual_pos) throw UndefinedMetricError("false positive rate without actual negatives");
  return ratio(n_false_pos, n_total - n_actual_pos);
}

GroupOutcomeCounts GroupOutcomeCounts::tally(std::span<const int> protected_values, std::span<const int> actual,
                                             std::span<const int> predicted) {
  if (protected_values.size() != actual.size() || actual.size() != predicted.size())
    throw ConfigError("protected values, labels and predictions must be aligned");
  GroupOutcomeCounts c;
  for (std::size_t i = 0; i < actual.size(); ++i) {
    auto& o = c.by_value[protected_values[i] == 1 ? 1 : 0];
    ++o.n_total;
    const bool y = actual[i] == 1, yhat = predicted[i] == 1;
    o.n_pred_pos += yhat;
    o.n_actual_pos += y;
    o.n_true_pos += y && yhat;
    o.n_false_pos += !y && yhat;
  }
  return c;
}

void GroupOutcomeCounts::validate() const {
  for (const auto& o : by_value) {
    if (o.n_pred_pos > o.n_total || o.n_actual_pos > o.n_total || o.n_true_pos > o.n_actual_pos ||
        o.n_false_pos > o.n_total - o.n_actual_pos || o.n_true_pos + o.n_false_pos != o.n_pred_pos)
      throw ValidationError("inconsistent outcome counts");
  }
}

double spd(const GroupOutcomeCounts& c) {
  require_both_values(c);
  return c.by_value[0].positive_rate() - c.by_value[1].positive_rate();
}

DiValue di(const GroupOutcomeCounts& c) {
  require_both_values(c);
  const double r0 = c.by_value[0].positive_rate();
  const double r1 = c.by_value[1].positive_rate();
  if (r1 == 0.0) {
    if (r0 == 0.0) return {1.0, DiStatus::kUndefined};
    return {std::numeric_limits<double>::infinity(), DiStatus::kInfinite};
  }
  return {r0 / r1, DiStatus::kFinite};
}

double adi(double di_value) {
  if (!std::isfinite(di_value) || di_value <= 0.0) return 0.0;
  return di_value <= 1.0 ? di_value : 1.0 / di_value;
}

double adi(const DiValue& d) { return d.finite() ? adi(d.value) : 0.0; }

std::pair<double, double> epd(const GroupOutcomeCounts& c) {
  const auto& a = c.by_value[0];
  const auto& b = c.by_value[1];
  return {a.true_positive_rate() - b.true_positive_rate(), a.false_positive_rate() - b.false_positive_rate()};
}

double eod(const GroupOutcomeCounts& c) {
  return c.by_value[0].true_positive_rate() - c.by_value[1].true_positive_rate();
}

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw ConfigError("scores and labels must be aligned");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
  // Rank-sum with midranks for ties.
  double pos_rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j < n && scores[order[j]] == scores[order[i]]) ++j;
    const double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]] == 1) {
        pos_rank_sum += midrank;
        ++n_pos;
      }
    }
    i = j;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) throw UndefinedMetricError("AUC needs both classes");
  const double np = static_cast<double>(n_pos);
  return (pos_rank_sum - np * (np + 1.0) / 2.0) / (np * static_cast<double>(n_neg));
}

double accuracy(std::span<const int> predicted, std::span<const int> labels) {
  if (predicted.size() != labels.size()) throw ConfigError("predictions and labels must be aligned");
  if (labels.empty()) throw UndefinedMetricError("accuracy of an empty set");
  std::size_t hit = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) hit += predicted[i] == labels[i];
  return ratio(hit, labels.size());
}

double total_di_distance(std::span<const double> dis) {
  double total = 0.0;
  for (double d : dis) {
    if (!std::isfinite(d)) throw UndefinedMetricError("total DI distance over a non-finite DI");
    total += std::abs(d - 1.0);
  }
  return total;
}

double total_di_distance(const FairnessReport& report) {
  std::vector<double> dis;
  for (const auto& f : report.features) {
    if (!f.di.finite()) throw UndefinedMetricError("DI of '" + f.feature + "' is a sentinel");
    dis.push_back(f.di.value);
  }
  return total_di_distance(dis);
}

FairnessReport fairness_report(const Dataset& ds, std::span<const int> predicted) {
  FairnessReport r;
  bool all_finite = true;
  for (std::size_t k = 0; k < ds.schema().protected_features.size(); ++k) {
    const auto pv = ds.protected_column(k);
    const auto c = GroupOutcomeCounts::tally(pv, ds.labels(), predicted);
    FeatureFairness f;
    f.feature = ds.schema().protected_features[k];
    if (c.by_value[0].n_total == 0 || c.by_value[1].n_total == 0) {
      f.spd = kNaN;
      f.di = {1.0, DiStatus::kUndefined};
    } else {
      f.spd = spd(c);
      f.di = di(c);
    }
    f.adi = adi(f.di);
    const auto& a = c.by_value[0];
    const auto& b = c.by_value[1];
    const bool tpr_ok = a.n_actual_pos > 0 && b.n_actual_pos > 0;
    const bool fpr_ok = a.n_total > a.n_actual_pos && b.n_total > b.n_actual_pos;
    f.eod = tpr_ok ? eod(c) : kNaN;
    f.epd_tpr = f.eod;
    f.epd_fpr = fpr_ok ? a.false_positive_rate() - b.false_positive_rate() : kNaN;
    all_finite = all_finite && f.di.finite();
    r.features.push_back(std::move(f));
  }
  r.total_di_distance = all_finite ? total_di_distance(r) : std::numeric_limits<double>::infinity();
  return r;
}

}  // namespace fonb
