// Command-line front end: inspect, coverage, preprocess, fawos, grid, compare,
// report and inspect-model.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "fonb/classifier.hpp"
#include "fonb/coverage.hpp"
#include "fonb/dataset.hpp"
#include "fonb/experiments.hpp"
#include "fonb/fair_onb.hpp"
#include "fonb/fawos.hpp"
#include "fonb/format.hpp"
#include "fonb/groups.hpp"
#include "fonb/metrics.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace fonb;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kRuntime = 3 };

struct Options {
  std::string command;
  std::string data;
  std::string schema;
  std::string out;
  std::uint64_t seed = 30;
  int folds = 5;
  std::string pct = "5,5,5";
  std::string strategy;
  std::string levels = "0,5,10,15,20";
  std::string population = "all";
  std::string fawos_weights;
  double fawos_factor = 1.0;
  std::string assess = "dataset";
  int jobs = 1;
  std::string report;
  std::vector<std::string> argv;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<int> parse_ints(const std::string& text, const char* flag) {
  std::vector<int> out;
  for (const auto& s : split_list(text)) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size()) throw ConfigError(std::string(flag) + ": '" + s + "' is not an integer");
    out.push_back(v);
  }
  return out;
}

std::vector<double> parse_doubles(const std::string& text, const char* flag) {
  std::vector<double> out;
  for (const auto& s : split_list(text)) {
    std::size_t used = 0;
    double v = 0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size()) throw ConfigError(std::string(flag) + ": '" + s + "' is not a number");
    out.push_back(v);
  }
  return out;
}

ThresholdConfig threshold_config(const Options& o, Strategy strategy) {
  const auto p = parse_ints(o.pct, "--pct");
  if (p.size() != 3) throw ConfigError("--pct takes three levels: radius,count,density");
  ThresholdConfig cfg{p[0], p[1], p[2], strategy, parse_threshold_population(o.population)};
  cfg.validate();
  return cfg;
}

std::vector<Strategy> strategies(const Options& o) {
  std::vector<Strategy> out;
  for (const auto& s : split_list(o.strategy)) out.push_back(parse_strategy(s));
  return out;
}

std::vector<FawosConfig> fawos_configs(const Options& o) {
  if (o.fawos_weights.empty()) return fawos_default_configs();
  const auto w = parse_doubles(o.fawos_weights, "--fawos-weights");
  if (w.size() != 3) throw ConfigError("--fawos-weights takes three weights: safe,borderline,rare");
  FawosConfig cfg{{w[0], w[1], w[2]}, o.fawos_factor};
  cfg.validate();
  return {cfg};
}

int jobs(const Options& o) {
  if (o.jobs < 0) throw ConfigError("--jobs must be non-negative");
  if (o.jobs == 0) return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  return o.jobs;
}

Dataset load(const Options& o) {
  if (o.data.empty()) throw ConfigError("--data is required for '" + o.command + "'");
  if (o.schema.empty()) throw ConfigError("--schema is required for '" + o.command + "'");
  return load_csv(o.data, SchemaConfig::from_file(o.schema));
}

fs::path out_dir(const Options& o) {
  fs::path p(o.out);
  fs::create_directories(p);
  return p;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream f(p, std::ios::binary);
  if (!f) throw Error("cannot write " + p.string());
  return f;
}

void write_json(const fs::path& p, const json& j) {
  auto f = open_out(p);
  f << j.dump(2) << '\n';
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json bias_json(const BiasAssessment& b) {
  json out = json::object();
  out["source"] = to_string(b.source);
  json features = json::array();
  for (const auto& f : b.per_feature) {
    json e;
    e["feature"] = f.feature;
    e["di"] = number_or_null(f.di);
    e["status"] = f.status == DiStatus::kFinite ? "finite" : f.status == DiStatus::kInfinite ? "infinite" : "undefined";
    e["favored_value"] = f.favored_value ? json(*f.favored_value) : json(nullptr);
    features.push_back(e);
  }
  out["features"] = features;
  return out;
}

json group_sizes_json(const GroupTable& table, const Dataset& ds) {
  const auto g = table.assign(ds);
  json out = json::array();
  for (int id = 0; id < table.num_groups(); ++id) {
    json e;
    e["group"] = id;
    e["class"] = table.class_of(id);
    json values = json::object();
    for (std::size_t k = 0; k < table.num_protected(); ++k)
      values[table.protected_order()[k]] = table.protected_value(id, k);
    e["protected"] = values;
    e["rows"] = std::count(g.begin(), g.end(), id);
    out.push_back(e);
  }
  return out;
}

int fail(int code, const char* kind, const std::string& message) {
  json j{{"error", kind}, {"exit_code", code}, {"message", message}};
  std::cerr << j.dump() << '\n';
  return code;
}

bool takes(const Options& o, std::initializer_list<const char*> commands) {
  for (const char* c : commands)
    if (o.command == c) return true;
  return false;
}

/// Arguments that rerun this command from any working directory.
std::vector<std::string> replay_args(const Options& o) {
  std::vector<std::string> a{o.command};
  auto add = [&](const char* flag, const std::string& value) {
    a.push_back(flag);
    a.push_back(value);
  };
  if (!o.data.empty()) add("--data", fs::absolute(o.data).string());
  if (!o.schema.empty()) add("--schema", fs::absolute(o.schema).string());
  add("--out", fs::absolute(o.out).string());
  add("--seed", std::to_string(o.seed));
  add("--jobs", std::to_string(o.jobs));
  if (takes(o, {"preprocess", "grid", "compare"})) {
    if (!o.strategy.empty()) add("--strategy", o.strategy);
    add("--threshold-population", o.population);
    add("--assess", o.assess);
  }
  if (takes(o, {"preprocess"})) add("--pct", o.pct);
  if (takes(o, {"grid", "compare"})) {
    add("--folds", std::to_string(o.folds));
    add("--levels", o.levels);
  }
  if (takes(o, {"fawos", "compare"})) {
    if (!o.fawos_weights.empty()) add("--fawos-weights", o.fawos_weights);
    add("--fawos-factor", format_double(o.fawos_factor));
  }
  if (takes(o, {"report"}) && !o.report.empty()) add("--report", fs::absolute(o.report).string());
  return a;
}

void write_runconfig(const Options& o, const fs::path& dir) {
  json j;
  j["command"] = o.command;
  j["data"] = o.data.empty() ? json(nullptr) : json(fs::absolute(o.data).string());
  j["schema"] = o.schema.empty() ? json(nullptr) : json(fs::absolute(o.schema).string());
  j["out"] = fs::absolute(o.out).string();
  j["seed"] = o.seed;
  j["folds"] = o.folds;
  j["pct"] = o.pct;
  j["strategy"] = o.strategy;
  j["levels"] = o.levels;
  j["threshold_population"] = o.population;
  j["fawos_weights"] = o.fawos_weights;
  j["fawos_factor"] = o.fawos_factor;
  j["assess"] = o.assess;
  j["jobs"] = o.jobs;
  if (!o.report.empty()) j["report"] = o.report;
  j["argv"] = o.argv;
  j["replay"] = replay_args(o);
  write_json(dir / "runconfig.json", j);
}

// ---------------------------------------------------------------------------
// Commands

int cmd_inspect(const Options& o) {
  const Dataset ds = load(o);
  const fs::path dir = out_dir(o);
  write_runconfig(o, dir);
  const GroupTable table = enumerate_groups(ds.schema());
  const auto bias = assess_bias(ds, ds.labels(), AssessmentSource::kDataset);
  json j;
  j["rows"] = ds.num_rows();
  json features = json::array();
  for (std::size_t k = 0; k < ds.num_features(); ++k)
    features.push_back({{"name", ds.schema().feature_names[k]}, {"kind", to_string(ds.schema().feature_kinds[k])}});
  j["features"] = features;
  j["class"] = ds.schema().class_name;
  j["positive_value"] = ds.schema().positive_class_value;
  j["negative_value"] = ds.schema().negative_class_value;
  j["protected"] = ds.schema().protected_features;
  j["groups"] = group_sizes_json(table, ds);
  j["bias"] = bias_json(bias);
  json targets;
  for (Strategy s : {Strategy::kUnion, Strategy::kIntersection})
    targets[to_string(s)] = select_target_groups(table, bias, s).groups;
  j["targets"] = targets;
  write_json(dir / "inspect.json", j);

  std::cout << ds.num_rows() << " rows, " << ds.num_features() << " features, class '" << ds.schema().class_name
            << "'\n"
            << table.describe();
  for (const auto& f : bias.per_feature)
    std::cout << "DI(" << f.feature << ") = " << f.di
              << (f.favored_value ? " favors value " + std::to_string(*f.favored_value) : std::string(" unbiased"))
              << '\n';
  return kOk;
}

int cmd_coverage(const Options& o) {
  const Dataset ds = load(o);
  const fs::path dir = out_dir(o);
  write_runconfig(o, dir);
  FairOnbSampler sampler(ds);
  const Coverage& cov = sampler.coverage();
  {
    auto f = open_out(dir / "coverage.csv");
    write_coverage_csv(cov, f);
  }
  json groups = json::array();
  for (int g : cov.group_ids) {
    const auto balls = cov.balls_of_group(g);
    std::size_t degenerate = 0, rows = 0;
    for (std::size_t b : balls) {
      degenerate += cov.balls[b].degenerate();
      rows += cov.balls[b].covered_count;
    }
    groups.push_back({{"group", g}, {"balls", balls.size()}, {"rows", rows}, {"degenerate_balls", degenerate}});
  }
  json j;
  j["rows"] = ds.num_rows();
  j["balls"] = cov.balls.size();
  j["groups"] = groups;
  write_json(dir / "coverage.json", j);
  std::cout << cov.balls.size() << " balls over " << cov.group_ids.size() << " groups\n";
  return kOk;
}

int cmd_preprocess(const Options& o) {
  const Dataset ds = load(o);
  const auto s = strategies(o);
  if (s.size() > 1) throw ConfigError("preprocess takes a single --strategy");
  const ThresholdConfig cfg = threshold_config(o, s.empty() ? Strategy::kUnion : s.front());
  const fs::path dir = out_dir(o);
  write_runconfig(o, dir);
  const auto res = preprocess(ds, cfg, parse_assessment_source(o.assess), o.seed);
  write_csv(res.data, dir / "preprocessed.csv");

  json j;
  j["input_rows"] = ds.num_rows();
  j["output_rows"] = res.data.num_rows();
  j["strategy"] = to_string(cfg.strategy);
  j["percentiles"] = {{"radius", cfg.pct_radius}, {"count", cfg.pct_count}, {"density", cfg.pct_density}};
  j["threshold_population"] = to_string(cfg.population);
  j["bias"] = bias_json(res.bias);
  j["target_groups"] = res.targets;
  if (res.result.resolved)
    j["thresholds"] = {{"radius", res.result.resolved->radius},
                       {"count", res.result.resolved->count},
                       {"density", res.result.resolved->density}};
  else
    j["thresholds"] = nullptr;
  json per_group = json::object();
  for (const auto& [g, n] : res.result.per_group_removed) per_group[std::to_string(g)] = n;
  j["removed_per_group"] = per_group;
  j["removed_balls"] = res.result.removed_balls.size();
  j["removed_rows"] = res.result.removed_rows;
  j["warnings"] = res.result.warnings;
  write_json(dir / "preprocessed.json", j);
  for (const auto& w : res.result.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << "removed " << res.result.removed_rows.size() << " of " << ds.num_rows() << " rows\n";
  return kOk;
}

int cmd_fawos(const Options& o) {
  const Dataset ds = load(o);
  const auto cfgs = fawos_configs(o);
  const FawosConfig cfg = o.fawos_weights.empty() ? FawosConfig{fawos_weight_table().front(), o.fawos_factor} : cfgs.front();
  const fs::path dir = out_dir(o);
  write_runconfig(o, dir);
  const GroupTable table = enumerate_groups(ds.schema());
  const auto bias = assess_bias(ds, ds.labels(), AssessmentSource::kDataset);
  const auto targets = oversampling_targets(ds, table, bias);
  if (targets.empty()) throw InfeasibleError("no disadvantaged group with at least 2 rows to oversample");
  const auto res = oversample(ds, targets, cfg, o.seed);
  write_csv(res.data, dir / "oversampled.csv");

  json j;
  j["input_rows"] = ds.num_rows();
  j["output_rows"] = res.data.num_rows();
  j["weights"] = {{"safe", cfg.weights.safe}, {"borderline", cfg.weights.borderline}, {"rare", cfg.weights.rare}};
  j["factor"] = cfg.oversampling_factor;
  j["bias"] = bias_json(bias);
  j["target_groups"] = targets;
  json per_group = json::object();
  for (const auto& [g, n] : res.per_group_added) per_group[std::to_string(g)] = n;
  j["added_per_group"] = per_group;
  json synthetics = json::array();
  for (const auto& s : res.synthetics)
    synthetics.push_back(
        {{"row_id", s.row_id}, {"group", s.group}, {"seed_row", s.seed_row}, {"neighbor_row", s.neighbor_row}, {"gap", s.gap}});
  j["synthetics"] = synthetics;
  j["warnings"] = res.warnings;
  write_json(dir / "oversampled.json", j);
  for (const auto& w : res.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << "added " << res.synthetics.size() << " synthetic rows\n";
  return kOk;
}

GridOptions grid_options(const Options& o) {
  GridOptions g;
  g.levels = parse_ints(o.levels, "--levels");
  if (g.levels.empty()) throw ConfigError("--levels needs at least one level");
  for (int l : g.levels)
    if (l < 0 || l > 100) throw ConfigError("--levels entries must lie in [0, 100]");
  const auto s = strategies(o);
  if (!s.empty()) g.strategies = s;
  g.population = parse_threshold_population(o.population);
  g.source = parse_assessment_source(o.assess);
  g.seed = o.seed;
  g.jobs = jobs(o);
  return g;
}

void write_grid_outputs(std::span<const ExperimentReport> reports, const fs::path& dir, const std::string& prefix) {
  {
    auto f = open_out(dir / (prefix + "report.csv"));
    write_report_csv(reports, f);
  }
  {
    auto f = open_out(dir / (prefix + "summary.csv"));
    write_summary_csv(reports, f);
  }
  {
    auto f = open_out(dir / (prefix + "thresholds.csv"));
    write_thresholds_csv(reports, f);
  }
}

json best_json(std::span<const ExperimentReport> reports) {
  json j;
  try {
    const auto b = select_best(reports);
    j["best_global"] = b.best_global;
    j["best_per_feature"] = b.best_per_feature;
    j["best_performance"] = b.best_performance;
  } catch (const InfeasibleError& e) {
    j["error"] = e.what();
  }
  json failed = json::array();
  for (const auto& r : reports)
    if (r.failed) failed.push_back({{"config_id", r.config.id}, {"reason", r.failure}});
  j["failed"] = failed;
  return j;
}

int cmd_grid(const Options& o) {
  const Dataset ds = load(o);
  const GridOptions g = grid_options(o);
  const fs::path dir = out_dir(o);
  write_runconfig(o, dir);
  const auto reports = run_grid(ds, stratified_folds(ds, o.folds, o.seed), g);
  write_grid_outputs(reports, dir, "");
  for (const auto& feature : ds.schema().protected_features) {
    auto f = open_out(dir / ("plotdata_" + feature + ".csv"));
    write_plotdata_csv(reports, feature, f);
  }
  write_json(dir / "best.json", best_json(reports));
  std::cout << render_summary(reports);
  return kOk;
}

int cmd_compare(const Options& o) {
  const Dataset ds = load(o);
  const GridOptions g = grid_options(o);
  const fs::path dir = out_dir(o);
  write_runconfig(o, dir);
  const FoldPlan plan = stratified_folds(ds, o.folds, o.seed);
  const auto onb = run_grid(ds, plan, g);
  const auto fawos = run_fawos_grid(ds, plan, fawos_configs(o), o.seed, g.jobs);
  write_grid_outputs(onb, dir, "");
  write_grid_outputs(fawos, dir, "fawos_");
  const auto rows = compare_methods(onb, fawos);
  {
    auto f = open_out(dir / "comparison.csv");
    write_comparison_csv(rows, f);
  }
  std::cout << render_comparison(rows);
  return kOk;
}

int cmd_report(const Options& o) {
  const fs::path input = o.report.empty() ? fs::path(o.out) / "report.csv" : fs::path(o.report);
  std::ifstream in(input);
  if (!in) throw SchemaError("cannot open report file " + input.string());
  auto reports = read_report_csv(in);
  // Thresholds live beside the report; without them plot data stays empty.
  const fs::path thresholds = input.parent_path() / "thresholds.csv";
  if (std::ifstream t(thresholds); t) read_thresholds_csv(t, reports);
  const fs::path dir = out_dir(o);
  write_runconfig(o, dir);
  {
    auto f = open_out(dir / "summary.csv");
    write_summary_csv(reports, f);
  }
  std::set<std::string> features;
  for (const auto& r : reports)
    for (const auto& f : r.mean.features) features.insert(f.feature);
  for (const auto& feature : features) {
    auto f = open_out(dir / ("plotdata_" + feature + ".csv"));
    write_plotdata_csv(reports, feature, f);
  }
  write_json(dir / "best.json", best_json(reports));
  std::cout << render_summary(reports);
  return kOk;
}

int cmd_inspect_model(const Options& o) {
  const Dataset ds = load(o);
  const fs::path dir = out_dir(o);
  write_runconfig(o, dir);
  const auto tree = DecisionTree::fit(ds, o.seed);
  const auto preds = tree.predict(ds);
  {
    auto f = open_out(dir / "tree.txt");
    f << tree.serialize(ds.schema().feature_names);
  }
  const auto fr = fairness_report(ds, preds);
  json j;
  j["nodes"] = tree.nodes().size();
  j["depth"] = tree.depth();
  j["training_accuracy"] = accuracy(preds, ds.labels());
  j["bias"] = bias_json(assess_bias(ds, preds, AssessmentSource::kModel));
  json features = json::array();
  for (const auto& f : fr.features)
    features.push_back({{"feature", f.feature},
                        {"spd", number_or_null(f.spd)},
                        {"di", number_or_null(f.di.value)},
                        {"adi", number_or_null(f.adi)},
                        {"eod", number_or_null(f.eod)}});
  j["fairness"] = features;
  write_json(dir / "model.json", j);
  std::cout << "tree with " << tree.nodes().size() << " nodes, depth " << tree.depth() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  Options o;
  o.argv.assign(argv, argv + argc);

  CLI::App app{"Fairness-aware undersampling guided by pure-group ball coverage"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* sub, bool needs_data) {
    sub->add_option("--data", o.data, "Input CSV")->required(needs_data);
    sub->add_option("--schema", o.schema, "Schema JSON")->required(needs_data);
    sub->add_option("--out", o.out, "Output directory")->required();
    sub->add_option("--seed", o.seed, "Random seed")->capture_default_str();
    sub->add_option("--jobs", o.jobs, "Worker threads (0 = all cores)")->capture_default_str();
  };
  auto add_onb = [&](CLI::App* sub) {
    sub->add_option("--strategy", o.strategy, "union, intersection, or a comma list");
    sub->add_option("--threshold-population", o.population, "Balls that set the percentiles: all or target")
        ->capture_default_str();
    sub->add_option("--assess", o.assess, "Bias assessment source: dataset or model")
        ->check(CLI::IsMember({"dataset", "model"}))
        ->capture_default_str();
  };
  auto add_grid = [&](CLI::App* sub) {
    sub->add_option("--folds", o.folds, "Cross-validation folds")->capture_default_str();
    sub->add_option("--levels", o.levels, "Percentile levels per axis")->capture_default_str();
  };
  auto add_fawos = [&](CLI::App* sub) {
    sub->add_option("--fawos-weights", o.fawos_weights, "safe,borderline,rare weights");
    sub->add_option("--fawos-factor", o.fawos_factor, "Oversampling factor")->capture_default_str();
  };

  auto* inspect = app.add_subcommand("inspect", "Schema, group sizes and dataset bias");
  add_common(inspect, true);
  auto* coverage = app.add_subcommand("coverage", "Ball coverage of every group");
  add_common(coverage, true);
  auto* pre = app.add_subcommand("preprocess", "Undersample one dataset with one threshold setting");
  add_common(pre, true);
  add_onb(pre);
  pre->add_option("--pct", o.pct, "radius,count,density percentiles")->capture_default_str();
  auto* fawos = app.add_subcommand("fawos", "Oversample disadvantaged groups with FAWOS");
  add_common(fawos, true);
  add_fawos(fawos);
  auto* grid = app.add_subcommand("grid", "Cross-validated threshold grid");
  add_common(grid, true);
  add_onb(grid);
  add_grid(grid);
  auto* compare = app.add_subcommand("compare", "Threshold grid against FAWOS");
  add_common(compare, true);
  add_onb(compare);
  add_grid(compare);
  add_fawos(compare);
  auto* report = app.add_subcommand("report", "Rebuild summaries from a report.csv");
  add_common(report, false);
  report->add_option("--report", o.report, "report.csv to read (default: <out>/report.csv)");
  auto* model = app.add_subcommand("inspect-model", "Fit the decision tree and report its bias");
  add_common(model, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  o.command = app.get_subcommands().front()->get_name();

  try {
    if (o.command == "inspect") return cmd_inspect(o);
    if (o.command == "coverage") return cmd_coverage(o);
    if (o.command == "preprocess") return cmd_preprocess(o);
    if (o.command == "fawos") return cmd_fawos(o);
    if (o.command == "grid") return cmd_grid(o);
    if (o.command == "compare") return cmd_compare(o);
    if (o.command == "report") return cmd_report(o);
    if (o.command == "inspect-model") return cmd_inspect_model(o);
  } catch (const ConfigError& e) {
    return fail(kUsage, "config", e.what());
  } catch (const SchemaError& e) {
    return fail(kData, "schema", e.what());
  } catch (const ValidationError& e) {
    return fail(kData, "validation", e.what());
  } catch (const ParseError& e) {
    return fail(kData, "parse", e.what());
  } catch (const InfeasibleError& e) {
    return fail(kData, "infeasible", e.what());
  } catch (const std::exception& e) {
    return fail(kRuntime, "runtime", e.what());
  }
  return kUsage;
}
