#include "fonb/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <istream>
#include <limits>
#include <memory>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "fonb/classifier.hpp"
#include "fonb/format.hpp"

namespace fonb {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr int kReportPrecision = 10;

std::string fmt(double v) { return format_double(v, kReportPrecision); }
// Fold rows round-trip so summaries rebuilt from report.csv match.
std::string exact(double v) { return format_double(v); }

std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

std::string pct_code(int p) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%03d", p);
  return buf;
}

void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::min<std::size_t>(n, static_cast<std::size_t>(std::max(1, jobs)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < n; i = next++) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace

// ---------------------------------------------------------------------------
// Configurations

ExperimentConfig ExperimentConfig::baseline() {
  ExperimentConfig c;
  c.id = "baseline";
  c.kind = ConfigKind::kBaseline;
  return c;
}

ExperimentConfig ExperimentConfig::fair_onb(const ThresholdConfig& cfg) {
  cfg.validate();
  ExperimentConfig c;
  c.kind = ConfigKind::kFairOnb;
  c.onb = cfg;
  c.id = std::string("onb-") + to_string(cfg.strategy) + "-r" + pct_code(cfg.pct_radius) + "-c" +
         pct_code(cfg.pct_count) + "-d" + pct_code(cfg.pct_density);
  return c;
}

ExperimentConfig ExperimentConfig::fawos_config(const FawosConfig& cfg) {
  cfg.validate();
  ExperimentConfig c;
  c.kind = ConfigKind::kFawos;
  c.fawos = cfg;
  c.id = "fawos-s" + fixed(cfg.weights.safe, 2) + "-b" + fixed(cfg.weights.borderline, 2) + "-r" +
         fixed(cfg.weights.rare, 2) + "-f" + fixed(cfg.oversampling_factor, 2);
  return c;
}

std::string ExperimentConfig::strategy_label() const {
  switch (kind) {
    case ConfigKind::kBaseline:
      return "none";
    case ConfigKind::kFairOnb:
      return to_string(onb.strategy);
    case ConfigKind::kFawos:
      return "fawos";
  }
  return "none";
}

std::vector<ExperimentConfig> grid_configs(const Schema& schema, const GridOptions& options) {
  std::vector<Strategy> strategies = options.strategies;
  if (strategies.empty()) throw ConfigError("at least one strategy is required");
  std::sort(strategies.begin(), strategies.end());
  strategies.erase(std::unique(strategies.begin(), strategies.end()), strategies.end());
  if (schema.protected_features.size() == 1) strategies = {Strategy::kUnion};

  std::vector<int> levels = options.levels;
  std::sort(levels.begin(), levels.end());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  if (levels.empty()) throw ConfigError("at least one percentile level is required");

  std::vector<ExperimentConfig> out;
  for (Strategy s : strategies)
    for (int r : levels)
      for (int c : levels)
        for (int d : levels) out.push_back(ExperimentConfig::fair_onb({r, c, d, s, options.population}));
  return out;
}

// ---------------------------------------------------------------------------
// Aggregation

AggregateMetrics aggregate(std::span<const FoldRecord> folds) {
  AggregateMetrics m;
  std::size_t ok = 0;
  std::size_t with_thresholds = 0;
  ResolvedThresholds thr;
  for (const auto& f : folds) {
    if (!f.ok) {
      m.eligible = false;
      continue;
    }
    if (ok == 0) {
      m.features = f.features;
      for (auto& feat : m.features) feat.di = feat.adi = feat.spd = feat.eod = 0.0;
    }
    ++ok;
    for (std::size_t k = 0; k < f.features.size(); ++k) {
      const auto& src = f.features[k];
      auto& dst = m.features[k];
      if (src.di_status != DiStatus::kFinite) {
        m.eligible = false;
        dst.di_status = src.di_status;
      }
      dst.di += src.di;
      dst.adi += src.adi;
      dst.spd += src.spd;
      dst.eod += src.eod;
    }
    m.auc += f.auc;
    m.accuracy += f.accuracy;
    m.removed += static_cast<double>(f.removed);
    m.added += static_cast<double>(f.added);
    if (f.thresholds) {
      ++with_thresholds;
      thr.radius += f.thresholds->radius;
      thr.count += f.thresholds->count;
      thr.density += f.thresholds->density;
    }
  }
  if (ok == 0) {
    m.eligible = false;
    m.auc = m.accuracy = m.total_di_distance = m.total_adi_distance = kNaN;
    return m;
  }
  const double n = static_cast<double>(ok);
  for (auto& feat : m.features) {
    feat.di /= n;
    feat.adi /= n;
    feat.spd /= n;
    feat.eod /= n;
    if (feat.di_status == DiStatus::kUndefined) feat.di = kNaN;
    if (feat.di_status == DiStatus::kInfinite) feat.di = std::numeric_limits<double>::infinity();
    m.total_di_distance += std::abs(feat.di - 1.0);
    m.total_adi_distance += 1.0 - feat.adi;
  }
  m.auc /= n;
  m.accuracy /= n;
  m.removed /= n;
  m.added /= n;
  if (with_thresholds > 0) {
    const double t = static_cast<double>(with_thresholds);
    m.thresholds = ResolvedThresholds{thr.radius / t, thr.count / t, thr.density / t};
  }
  if (!std::isfinite(m.total_di_distance)) m.eligible = false;
  return m;
}

// ---------------------------------------------------------------------------
// Cross-validated evaluation

namespace {

struct FoldContext {
  Dataset train;
  Dataset test;
  BiasAssessment bias;
  GroupTable table{std::vector<std::string>{"_"}};
  std::unique_ptr<FairOnbSampler> sampler;
  RowId first_free_id = 0;  // above every id of the full dataset
};

FoldContext prepare_fold(const Dataset& ds, const FoldPlan& plan, int fold, bool need_coverage,
                         const GridOptions& options) {
  const auto train_pos = plan.train_positions(fold);
  const auto test_pos = plan.test_positions(fold);
  const Dataset raw_train = ds.take(train_pos);
  const MinMaxScaler scaler = MinMaxScaler::fit(raw_train);
  FoldContext ctx{scaler.transform(raw_train), scaler.transform(ds.take(test_pos)), {},
                  enumerate_groups(ds.schema()), nullptr};
  for (RowId id : ds.row_ids()) ctx.first_free_id = std::max(ctx.first_free_id, id + 1);
  std::vector<int> outcomes = ctx.train.labels();
  if (options.source == AssessmentSource::kModel)
    outcomes = DecisionTree::fit(ctx.train, options.seed).predict(ctx.train);
  if (need_coverage) {
    ctx.sampler = std::make_unique<FairOnbSampler>(ctx.train, outcomes, options.source);
    ctx.bias = ctx.sampler->bias();
  } else {
    ctx.bias = assess_bias(ctx.train, outcomes, options.source);
  }
  return ctx;
}

FoldRecord evaluate(const FoldContext& ctx, const ExperimentConfig& cfg, int fold, const GridOptions& options) {
  FoldRecord rec;
  rec.fold = fold;
  try {
    Dataset train = ctx.train;
    switch (cfg.kind) {
      case ConfigKind::kBaseline:
        break;
      case ConfigKind::kFairOnb: {
        const auto r = ctx.sampler->run(cfg.onb);
        rec.removed = r.removed_rows.size();
        rec.thresholds = r.resolved;
        train = ctx.sampler->apply(r);
        break;
      }
      case ConfigKind::kFawos: {
        const auto targets = oversampling_targets(ctx.train, ctx.table, ctx.bias);
        if (!targets.empty()) {
          auto r = oversample(ctx.train, targets, cfg.fawos, options.seed + static_cast<std::uint64_t>(fold),
                            ctx.first_free_id);
          rec.added = r.synthetics.size();
          train = std::move(r.data);
        }
        break;
      }
    }
    if (train.empty()) throw InfeasibleError("preprocessing removed every training row");
    if (options.audit) options.audit(fold, cfg.id, train.row_ids(), ctx.test.row_ids());

    const DecisionTree tree = DecisionTree::fit(train, options.seed);
    const auto preds = tree.predict(ctx.test);
    const auto scores = tree.score(ctx.test);
    const auto fr = fairness_report(ctx.test, preds);
    for (const auto& f : fr.features) rec.features.push_back({f.feature, f.di.value, f.di.status, f.adi, f.spd, f.eod});
    rec.auc = auc(scores, ctx.test.labels());
    rec.accuracy = accuracy(preds, ctx.test.labels());
  } catch (const std::exception& e) {
    rec.ok = false;
    rec.error = e.what();
    rec.features.clear();
    for (const auto& name : ctx.train.schema().protected_features)
      rec.features.push_back({name, kNaN, DiStatus::kUndefined, kNaN, kNaN, kNaN});
    rec.auc = rec.accuracy = kNaN;
  }
  return rec;
}

}  // namespace

std::vector<ExperimentReport> run_configs(const Dataset& ds, const FoldPlan& folds,
                                          const std::vector<ExperimentConfig>& configs, const GridOptions& options) {
  if (folds.assignments.size() != ds.num_rows()) throw ConfigError("fold plan does not match the dataset");
  std::set<std::string> ids;
  for (const auto& c : configs)
    if (!ids.insert(c.id).second) throw ConfigError("duplicate config id " + c.id);

  const bool need_coverage = std::any_of(configs.begin(), configs.end(),
                                         [](const ExperimentConfig& c) { return c.kind == ConfigKind::kFairOnb; });
  std::vector<ExperimentReport> reports(configs.size());
  for (std::size_t c = 0; c < configs.size(); ++c) reports[c].config = configs[c];

  for (int fold = 0; fold < folds.k; ++fold) {
    const FoldContext ctx = prepare_fold(ds, folds, fold, need_coverage, options);
    std::vector<FoldRecord> records(configs.size());
    parallel_for(configs.size(), options.jobs,
                 [&](std::size_t c) { records[c] = evaluate(ctx, configs[c], fold, options); });
    for (std::size_t c = 0; c < configs.size(); ++c) reports[c].folds.push_back(std::move(records[c]));
  }

  for (auto& r : reports) {
    r.mean = aggregate(r.folds);
    for (const auto& f : r.folds) {
      if (!f.ok) {
        r.failed = true;
        r.failure = "fold " + std::to_string(f.fold) + ": " + f.error;
        break;
      }
    }
  }
  std::sort(reports.begin(), reports.end(),
            [](const ExperimentReport& a, const ExperimentReport& b) { return a.config.id < b.config.id; });
  return reports;
}

std::vector<ExperimentReport> run_grid(const Dataset& ds, const FoldPlan& folds, const GridOptions& options) {
  std::vector<ExperimentConfig> configs{ExperimentConfig::baseline()};
  for (auto& c : grid_configs(ds.schema(), options)) configs.push_back(std::move(c));
  return run_configs(ds, folds, configs, options);
}

std::vector<ExperimentReport> run_fawos_grid(const Dataset& ds, const FoldPlan& folds,
                                             const std::vector<FawosConfig>& cfgs, std::uint64_t seed, int jobs,
                                             const SplitAudit& audit) {
  std::vector<ExperimentConfig> configs{ExperimentConfig::baseline()};
  for (const auto& c : cfgs) configs.push_back(ExperimentConfig::fawos_config(c));
  GridOptions options;
  options.seed = seed;
  options.jobs = jobs;
  options.audit = audit;
  return run_configs(ds, folds, configs, options);
}

// ---------------------------------------------------------------------------
// Selection

namespace {

double performance_of(const ExperimentReport& r, PerformanceMetric p) {
  return p == PerformanceMetric::kAuc ? r.mean.auc : r.mean.accuracy;
}

double feature_distance(const FeatureMetrics& f, FairnessMeasure m) {
  return m == FairnessMeasure::kDi ? std::abs(f.di - 1.0) : 1.0 - f.adi;
}

double total_distance(const ExperimentReport& r, FairnessMeasure m) {
  return m == FairnessMeasure::kDi ? r.mean.total_di_distance : r.mean.total_adi_distance;
}

}  // namespace

BestSelection select_best(std::span<const ExperimentReport> reports, PerformanceMetric performance,
                          FairnessMeasure measure) {
  std::vector<const ExperimentReport*> pool;
  for (const auto& r : reports)
    if (!r.failed && r.mean.eligible) pool.push_back(&r);
  if (pool.empty()) throw InfeasibleError("no successful configuration to select from");

  auto pick = [&](auto distance_of) {
    const ExperimentReport* best = nullptr;
    for (const auto* r : pool) {
      if (best == nullptr) {
        best = r;
        continue;
      }
      const double d = distance_of(*r), bd = distance_of(*best);
      const double p = performance_of(*r, performance), bp = performance_of(*best, performance);
      if (d < bd || (d == bd && (p > bp || (p == bp && r->config.id < best->config.id)))) best = r;
    }
    return best->config.id;
  };

  BestSelection sel;
  sel.best_global = pick([&](const ExperimentReport& r) { return total_distance(r, measure); });
  const auto& names = pool.front()->mean.features;
  for (std::size_t k = 0; k < names.size(); ++k) {
    sel.best_per_feature[names[k].feature] =
        pick([&](const ExperimentReport& r) { return feature_distance(r.mean.features[k], measure); });
  }
  const ExperimentReport* best = nullptr;
  for (const auto* r : pool) {
    if (best == nullptr) {
      best = r;
      continue;
    }
    const double p = performance_of(*r, performance), bp = performance_of(*best, performance);
    const double d = total_distance(*r, measure), bd = total_distance(*best, measure);
    if (p > bp || (p == bp && (d < bd || (d == bd && r->config.id < best->config.id)))) best = r;
  }
  sel.best_performance = best->config.id;
  return sel;
}

// ---------------------------------------------------------------------------
// CSV output

namespace {

void write_config_columns(const ExperimentConfig& c, std::ostream& out) {
  out << c.id << ',' << c.strategy_label() << ',';
  if (c.kind == ConfigKind::kFairOnb) {
    out << c.onb.pct_radius << ',' << c.onb.pct_count << ',' << c.onb.pct_density;
  } else {
    out << ",,";
  }
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(line);
  while (std::getline(is, cur, ',')) out.push_back(cur);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s) {
  if (s == "nan") return kNaN;
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError("cannot parse report value '" + s + "'", 0);
  }
}

ExperimentConfig config_from_columns(const std::string& id, const std::string& strategy, const std::string& r,
                                     const std::string& c, const std::string& d) {
  if (strategy == "none") return ExperimentConfig::baseline();
  if (strategy == "fawos") {
    FawosConfig f;
    if (std::sscanf(id.c_str(), "fawos-s%lf-b%lf-r%lf-f%lf", &f.weights.safe, &f.weights.borderline,
                    &f.weights.rare, &f.oversampling_factor) != 4)
      throw ParseError("malformed FAWOS config id '" + id + "'", 0);
    return ExperimentConfig::fawos_config(f);
  }
  ThresholdConfig t{std::stoi(r), std::stoi(c), std::stoi(d), parse_strategy(strategy)};
  auto cfg = ExperimentConfig::fair_onb(t);
  cfg.id = id;
  return cfg;
}

}  // namespace

void write_report_csv(std::span<const ExperimentReport> reports, std::ostream& out) {
  out << "config_id,strategy,pct_radius,pct_count,pct_density,fold,feature,di,adi,spd,eod,auc,accuracy,removed,"
         "added\n";
  for (const auto& r : reports) {
    for (const auto& f : r.folds) {
      for (const auto& m : f.features) {
        write_config_columns(r.config, out);
        const double di = m.di_status == DiStatus::kUndefined ? kNaN : m.di;
        out << ',' << f.fold << ',' << m.feature << ',' << exact(di) << ',' << exact(m.adi) << ',' << exact(m.spd) << ','
            << exact(m.eod) << ',' << exact(f.auc) << ',' << exact(f.accuracy) << ',' << f.removed << ',' << f.added
            << '\n';
      }
    }
  }
}

std::vector<ExperimentReport> read_report_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty report", 0);
  std::vector<ExperimentReport> out;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto c = split(line);
    if (c.size() != 15) throw ParseError("report row must have 15 columns", row);
    if (out.empty() || out.back().config.id != c[0]) {
      ExperimentReport r;
      r.config = config_from_columns(c[0], c[1], c[2], c[3], c[4]);
      out.push_back(std::move(r));
    }
    auto& rep = out.back();
    const int fold = std::stoi(c[5]);
    if (rep.folds.empty() || rep.folds.back().fold != fold) {
      FoldRecord f;
      f.fold = fold;
      f.auc = parse_number(c[11]);
      f.accuracy = parse_number(c[12]);
      f.removed = std::stoul(c[13]);
      f.added = std::stoul(c[14]);
      f.ok = !std::isnan(f.auc);
      rep.folds.push_back(std::move(f));
    }
    FeatureMetrics m;
    m.feature = c[6];
    m.di = parse_number(c[7]);
    m.di_status = std::isnan(m.di) ? DiStatus::kUndefined : std::isinf(m.di) ? DiStatus::kInfinite : DiStatus::kFinite;
    if (std::isnan(m.di)) m.di = 1.0;
    m.adi = parse_number(c[8]);
    m.spd = parse_number(c[9]);
    m.eod = parse_number(c[10]);
    rep.folds.back().features.push_back(std::move(m));
    ++row;
  }
  for (auto& r : out) {
    r.mean = aggregate(r.folds);
    for (const auto& f : r.folds)
      if (!f.ok) r.failed = true;
  }
  return out;
}

void write_thresholds_csv(std::span<const ExperimentReport> reports, std::ostream& out) {
  out << "config_id,fold,radius,count,density\n";
  for (const auto& r : reports)
    for (const auto& f : r.folds)
      if (f.thresholds)
        out << r.config.id << ',' << f.fold << ',' << format_double(f.thresholds->radius) << ','
            << format_double(f.thresholds->count) << ',' << format_double(f.thresholds->density) << '\n';
}

void read_thresholds_csv(std::istream& in, std::vector<ExperimentReport>& reports) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty thresholds file", 0);
  std::map<std::string, ExperimentReport*> by_id;
  for (auto& r : reports) by_id[r.config.id] = &r;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto c = split(line);
    if (c.size() != 5) throw ParseError("thresholds row must have 5 columns", row);
    const auto it = by_id.find(c[0]);
    if (it == by_id.end()) throw ParseError("thresholds row names unknown config " + c[0], row);
    const int fold = std::stoi(c[1]);
    for (auto& f : it->second->folds)
      if (f.fold == fold) f.thresholds = ResolvedThresholds{parse_number(c[2]), parse_number(c[3]), parse_number(c[4])};
    ++row;
  }
  for (auto& r : reports) r.mean = aggregate(r.folds);
}

namespace {

// Best-of flags per strategy family, baseline excluded.
std::map<std::string, std::vector<std::string>> best_flags(std::span<const ExperimentReport> reports,
                                                           PerformanceMetric performance) {
  std::map<std::string, std::vector<ExperimentReport>> families;
  for (const auto& r : reports)
    if (r.config.kind != ConfigKind::kBaseline) families[r.config.strategy_label()].push_back(r);
  std::map<std::string, std::vector<std::string>> flags;
  const std::string perf = performance == PerformanceMetric::kAuc ? "auc" : "accuracy";
  for (const auto& [family, members] : families) {
    BestSelection sel;
    try {
      sel = select_best(members, performance);
    } catch (const InfeasibleError&) {
      continue;
    }
    flags[sel.best_global].push_back("best_global");
    for (const auto& [feature, id] : sel.best_per_feature) flags[id].push_back("best_" + feature);
    flags[sel.best_performance].push_back("best_" + perf);
  }
  return flags;
}

std::vector<std::string> feature_names(std::span<const ExperimentReport> reports) {
  for (const auto& r : reports)
    for (const auto& f : r.folds)
      if (!f.features.empty()) {
        std::vector<std::string> names;
        for (const auto& m : f.features) names.push_back(m.feature);
        return names;
      }
  return {};
}

}  // namespace

void write_summary_csv(std::span<const ExperimentReport> reports, std::ostream& out, PerformanceMetric performance) {
  const auto names = feature_names(reports);
  const auto flags = best_flags(reports, performance);
  out << "config_id,strategy,pct_radius,pct_count,pct_density";
  for (const auto& n : names) out << ",di_" << n << ",adi_" << n << ",spd_" << n << ",eod_" << n;
  out << ",total_di_distance,total_adi_distance,auc,accuracy,removed,added,radius_threshold,count_threshold,"
         "density_threshold,eligible,best\n";
  for (const auto& r : reports) {
    write_config_columns(r.config, out);
    for (std::size_t k = 0; k < names.size(); ++k) {
      if (k < r.mean.features.size()) {
        const auto& m = r.mean.features[k];
        out << ',' << fmt(m.di) << ',' << fmt(m.adi) << ',' << fmt(m.spd) << ',' << fmt(m.eod);
      } else {
        out << ",nan,nan,nan,nan";
      }
    }
    out << ',' << fmt(r.mean.total_di_distance) << ',' << fmt(r.mean.total_adi_distance) << ',' << fmt(r.mean.auc)
        << ',' << fmt(r.mean.accuracy) << ',' << fmt(r.mean.removed) << ',' << fmt(r.mean.added) << ',';
    if (r.mean.thresholds) {
      out << fmt(r.mean.thresholds->radius) << ',' << fmt(r.mean.thresholds->count) << ','
          << fmt(r.mean.thresholds->density);
    } else {
      out << ",,";
    }
    out << ',' << (!r.failed && r.mean.eligible ? 1 : 0) << ',';
    if (auto it = flags.find(r.config.id); it != flags.end()) {
      for (std::size_t i = 0; i < it->second.size(); ++i) out << (i ? ";" : "") << it->second[i];
    }
    out << '\n';
  }
}

void write_plotdata_csv(std::span<const ExperimentReport> reports, const std::string& feature, std::ostream& out) {
  struct Row {
    std::string strategy;
    int pct_count, pct_density, pct_radius;
    double radius_thr, count_thr, density_thr, di, auc;
  };
  std::vector<Row> rows;
  for (const auto& r : reports) {
    if (r.config.kind != ConfigKind::kFairOnb || r.failed || !r.mean.thresholds) continue;
    double di = kNaN;
    for (const auto& f : r.mean.features)
      if (f.feature == feature) di = f.di;
    rows.push_back({r.config.strategy_label(), r.config.onb.pct_count, r.config.onb.pct_density,
                    r.config.onb.pct_radius, r.mean.thresholds->radius, r.mean.thresholds->count,
                    r.mean.thresholds->density, di, r.mean.auc});
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    return std::tie(a.strategy, a.pct_count, a.pct_density, a.radius_thr, a.pct_radius) <
           std::tie(b.strategy, b.pct_count, b.pct_density, b.radius_thr, b.pct_radius);
  });
  out << "strategy,pct_count,pct_density,pct_radius,radius_threshold,count_threshold,density_threshold,di,auc\n";
  for (const auto& r : rows) {
    out << r.strategy << ',' << r.pct_count << ',' << r.pct_density << ',' << r.pct_radius << ','
        << fmt(r.radius_thr) << ',' << fmt(r.count_thr) << ',' << fmt(r.density_thr) << ',' << fmt(r.di) << ','
        << fmt(r.auc) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Method comparison

namespace {

std::string describe_parameters(const ExperimentReport& r) {
  switch (r.config.kind) {
    case ConfigKind::kBaseline:
      return "-";
    case ConfigKind::kFawos: {
      const auto& f = r.config.fawos;
      return "S=" + fixed(f.weights.safe, 2) + " B=" + fixed(f.weights.borderline, 2) +
             " R=" + fixed(f.weights.rare, 2) + " OF=" + fixed(f.oversampling_factor, 2);
    }
    case ConfigKind::kFairOnb: {
      const auto& c = r.config.onb;
      std::string s = "pct r/c/d=" + std::to_string(c.pct_radius) + "/" + std::to_string(c.pct_count) + "/" +
                      std::to_string(c.pct_density);
      if (r.mean.thresholds) {
        s += " N_i=" + fixed(r.mean.thresholds->count, 2) + " R=" + fixed(r.mean.thresholds->radius, 4) +
             " D=" + fixed(r.mean.thresholds->density, 2);
      }
      return s;
    }
  }
  return "";
}

ComparisonRow comparison_row(const std::string& method, const ExperimentReport& r) {
  ComparisonRow row;
  row.method = method;
  row.config_id = r.config.id;
  row.parameters = describe_parameters(r);
  for (const auto& f : r.mean.features) row.adi.emplace_back(f.feature, f.adi);
  row.total_adi_distance = r.mean.total_adi_distance;
  row.accuracy = r.mean.accuracy;
  return row;
}

}  // namespace

std::vector<ComparisonRow> compare_methods(std::span<const ExperimentReport> onb_reports,
                                           std::span<const ExperimentReport> fawos_reports) {
  std::vector<ComparisonRow> rows;
  for (const auto& r : onb_reports)
    if (r.config.kind == ConfigKind::kBaseline) rows.push_back(comparison_row("Baseline", r));

  auto best_of = [&](const std::string& method, std::span<const ExperimentReport> pool, auto keep) {
    std::vector<ExperimentReport> members;
    for (const auto& r : pool)
      if (keep(r)) members.push_back(r);
    if (members.empty()) return;
    try {
      const auto sel = select_best(members, PerformanceMetric::kAccuracy, FairnessMeasure::kAdi);
      for (const auto& r : members)
        if (r.config.id == sel.best_global) rows.push_back(comparison_row(method, r));
    } catch (const InfeasibleError&) {
    }
  };
  best_of("FAWOS", fawos_reports, [](const ExperimentReport& r) { return r.config.kind == ConfigKind::kFawos; });
  best_of("Fair-ONB Union", onb_reports, [](const ExperimentReport& r) {
    return r.config.kind == ConfigKind::kFairOnb && r.config.onb.strategy == Strategy::kUnion;
  });
  best_of("Fair-ONB Intersection", onb_reports, [](const ExperimentReport& r) {
    return r.config.kind == ConfigKind::kFairOnb && r.config.onb.strategy == Strategy::kIntersection;
  });
  return rows;
}

void write_comparison_csv(std::span<const ComparisonRow> rows, std::ostream& out) {
  out << "method,config_id,parameters";
  if (!rows.empty())
    for (const auto& [feature, v] : rows.front().adi) out << ",adi_" << feature;
  out << ",total_adi_distance,accuracy\n";
  for (const auto& r : rows) {
    out << r.method << ',' << r.config_id << ',' << r.parameters;
    for (const auto& [feature, v] : r.adi) out << ',' << fmt(v);
    out << ',' << fmt(r.total_adi_distance) << ',' << fmt(r.accuracy) << '\n';
  }
}

std::string render_comparison(std::span<const ComparisonRow> rows) {
  std::ostringstream os;
  char buf[256];
  std::snprintf(buf, sizeof buf, "%-22s %-48s", "Method", "Best parameters");
  os << buf;
  if (!rows.empty())
    for (const auto& [feature, v] : rows.front().adi) {
      std::snprintf(buf, sizeof buf, " %10s", (feature + " ADI").c_str());
      os << buf;
    }
  os << "  Tot.Dist  Accuracy\n";
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%-22s %-48s", r.method.c_str(), r.parameters.c_str());
    os << buf;
    for (const auto& [feature, v] : r.adi) {
      std::snprintf(buf, sizeof buf, " %10.3f", v);
      os << buf;
    }
    std::snprintf(buf, sizeof buf, "  %8.3f  %8.3f\n", r.total_adi_distance, r.accuracy);
    os << buf;
  }
  return os.str();
}

std::string render_summary(std::span<const ExperimentReport> reports, PerformanceMetric performance) {
  const auto names = feature_names(reports);
  const std::string perf = performance == PerformanceMetric::kAuc ? "AUC" : "Accuracy";
  std::ostringstream os;
  char buf[256];
  auto line = [&](const std::string& label, const ExperimentReport& r) {
    std::snprintf(buf, sizeof buf, "%-34s", label.c_str());
    os << buf;
    for (std::size_t k = 0; k < names.size(); ++k) {
      std::snprintf(buf, sizeof buf, " %10.3f", k < r.mean.features.size() ? r.mean.features[k].di : kNaN);
      os << buf;
    }
    std::snprintf(buf, sizeof buf, " %9.3f  %s\n",
                  performance == PerformanceMetric::kAuc ? r.mean.auc : r.mean.accuracy, r.config.id.c_str());
    os << buf;
  };
  std::snprintf(buf, sizeof buf, "%-34s", "");
  os << buf;
  for (const auto& n : names) {
    std::snprintf(buf, sizeof buf, " %10s", (n + " DI").c_str());
    os << buf;
  }
  std::snprintf(buf, sizeof buf, " %9s  config\n", perf.c_str());
  os << buf;

  auto find = [&](const std::string& id) -> const ExperimentReport* {
    for (const auto& r : reports)
      if (r.config.id == id) return &r;
    return nullptr;
  };
  if (const auto* b = find("baseline")) line("Baseline", *b);

  std::map<std::string, std::vector<ExperimentReport>> families;
  for (const auto& r : reports)
    if (r.config.kind != ConfigKind::kBaseline) families[r.config.strategy_label()].push_back(r);
  for (const auto& [family, members] : families) {
    std::string label = family;
    if (!label.empty()) label[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(label[0])));
    BestSelection sel;
    try {
      sel = select_best(members, performance);
    } catch (const InfeasibleError&) {
      os << label << ": no eligible configuration\n";
      continue;
    }
    line("Best Global " + label + " DI", *find(sel.best_global));
    for (const auto& n : names) line("Best " + n + " " + label + " DI", *find(sel.best_per_feature.at(n)));
    line("Best " + label + " " + perf, *find(sel.best_performance));
  }
  return os.str();
}

}  // namespace fonb
