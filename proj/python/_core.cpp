#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <numeric>
#include <sstream>

#include "fonb/classifier.hpp"
#include "fonb/coverage.hpp"
#include "fonb/dataset.hpp"
#include "fonb/experiments.hpp"
#include "fonb/fair_onb.hpp"
#include "fonb/fawos.hpp"
#include "fonb/groups.hpp"
#include "fonb/metrics.hpp"

namespace py = pybind11;
using namespace fonb;

namespace {

const char* status_name(DiStatus s) {
  switch (s) {
    case DiStatus::kFinite: return "finite";
    case DiStatus::kInfinite: return "infinite";
    case DiStatus::kUndefined: return "undefined";
  }
  return "undefined";
}

py::list bias_list(const BiasAssessment& b) {
  py::list out;
  for (const auto& f : b.per_feature) {
    py::dict d;
    d["feature"] = f.feature;
    d["di"] = f.di;
    d["status"] = status_name(f.status);
    d["favored_value"] = f.favored_value ? py::cast(*f.favored_value) : py::none();
    out.append(d);
  }
  return out;
}

py::dict thresholds_dict(const std::optional<ResolvedThresholds>& t) {
  py::dict d;
  if (!t) return d;
  d["radius"] = t->radius;
  d["count"] = t->count;
  d["density"] = t->density;
  return d;
}

py::list feature_metrics_list(const std::vector<FeatureMetrics>& fs) {
  py::list out;
  for (const auto& f : fs) {
    py::dict d;
    d["feature"] = f.feature;
    d["di"] = f.di;
    d["status"] = status_name(f.di_status);
    d["adi"] = f.adi;
    d["spd"] = f.spd;
    d["eod"] = f.eod;
    out.append(d);
  }
  return out;
}

std::vector<int> outcomes_or_labels(const Dataset& ds, const std::optional<std::vector<int>>& outcomes) {
  return outcomes ? *outcomes : ds.labels();
}

ThresholdConfig threshold_config(const std::tuple<int, int, int>& pct, const std::string& strategy,
                                 const std::string& population) {
  ThresholdConfig cfg{std::get<0>(pct), std::get<1>(pct), std::get<2>(pct), parse_strategy(strategy),
                      parse_threshold_population(population)};
  cfg.validate();
  return cfg;
}

template <class T>
std::string to_text(const T& fn) {
  std::ostringstream os;
  fn(os);
  return os.str();
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Fairness-aware undersampling guided by pure-group ball coverage";

  auto base = py::register_exception<Error>(m, "FonbError", PyExc_RuntimeError);
  py::register_exception<SchemaError>(m, "SchemaError", base.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<InfeasibleError>(m, "InfeasibleError", base.ptr());
  py::register_exception<UndefinedMetricError>(m, "UndefinedMetricError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

  py::class_<Dataset>(m, "Dataset")
      .def_property_readonly("num_rows", &Dataset::num_rows)
      .def_property_readonly("num_features", &Dataset::num_features)
      .def_property_readonly("feature_names", [](const Dataset& d) { return d.schema().feature_names; })
      .def_property_readonly("protected_features", [](const Dataset& d) { return d.schema().protected_features; })
      .def_property_readonly("class_name", [](const Dataset& d) { return d.schema().class_name; })
      .def_property_readonly("labels", [](const Dataset& d) { return py::array_t<int>(py::cast(d.labels())); })
      .def_property_readonly("row_ids",
                             [](const Dataset& d) { return py::array_t<std::int64_t>(py::cast(d.row_ids())); })
      .def_property_readonly(
          "values",
          [](const Dataset& d) {
            py::array_t<double> a({d.num_rows(), d.num_features()});
            std::copy(d.values().begin(), d.values().end(), a.mutable_data());
            return a;
          },
          "Feature matrix scaled to [0, 1].")
      .def("select_ids", [](const Dataset& d, const std::vector<RowId>& ids) { return d.select_ids(ids); })
      .def("to_csv", [](const Dataset& d) { return to_text([&](std::ostream& os) { write_csv(d, os); }); })
      .def("__len__", &Dataset::num_rows)
      .def("__eq__", [](const Dataset& a, const Dataset& b) { return a == b; });

  m.def("load_csv", [](const std::string& data, const std::string& schema) {
    return load_csv(data, SchemaConfig::from_file(schema));
  }, py::arg("data"), py::arg("schema"));
  m.def("parse_csv", [](const std::string& text, const std::string& schema_json) {
    std::istringstream in(text);
    return parse_csv(in, SchemaConfig::from_json_text(schema_json));
  }, py::arg("text"), py::arg("schema_json"));

  m.def("assess_bias",
        [](const Dataset& ds, const std::optional<std::vector<int>>& outcomes, const std::string& source) {
          return bias_list(assess_bias(ds, outcomes_or_labels(ds, outcomes), parse_assessment_source(source)));
        },
        py::arg("ds"), py::arg("outcomes") = py::none(), py::arg("source") = "dataset");

  m.def("groups", [](const Dataset& ds) {
    const GroupTable table = enumerate_groups(ds.schema());
    const auto group_of = table.assign(ds);
    py::list out;
    for (int g = 0; g < table.num_groups(); ++g) {
      py::dict d;
      d["group"] = g;
      d["class"] = table.class_of(g);
      d["protected"] = table.protected_values(g);
      d["rows"] = std::count(group_of.begin(), group_of.end(), g);
      out.append(d);
    }
    return out;
  }, py::arg("ds"));

  m.def("target_groups", [](const Dataset& ds, const std::string& strategy) {
    const auto bias = assess_bias(ds, ds.labels());
    return select_target_groups(enumerate_groups(ds.schema()), bias, parse_strategy(strategy)).groups;
  }, py::arg("ds"), py::arg("strategy") = "union");

  m.def("coverage", [](const Dataset& ds) {
    const GroupTable table = enumerate_groups(ds.schema());
    const auto group_of = table.assign(ds);
    std::vector<int> all(table.num_groups());
    std::iota(all.begin(), all.end(), 0);
    const Coverage cov = build_coverage(ds, group_of, all);
    py::list out;
    for (const auto& b : cov.balls) {
      py::dict d;
      d["group"] = b.group_id;
      d["center_row"] = b.center_row;
      d["radius"] = b.radius;
      d["rows"] = b.assigned_rows;
      d["density"] = b.density;
      d["selection_order"] = b.selection_order;
      out.append(d);
    }
    return out;
  }, py::arg("ds"), "Greedy pure-group ball cover of every class x protected group.");

  m.def("percentile_lower", &percentile_lower, py::arg("values"), py::arg("pct"));

  m.def("preprocess",
        [](const Dataset& ds, std::tuple<int, int, int> pct, const std::string& strategy,
           const std::string& population, const std::string& assess, std::uint64_t seed) {
          const auto cfg = threshold_config(pct, strategy, population);
          PreprocessOutcome res;
          {
            py::gil_scoped_release release;
            res = preprocess(ds, cfg, parse_assessment_source(assess), seed);
          }
          py::dict info;
          info["targets"] = res.targets;
          info["removed_rows"] = res.result.removed_rows;
          info["removed_balls"] = res.result.removed_balls;
          info["removed_per_group"] = res.result.per_group_removed;
          info["thresholds"] = thresholds_dict(res.result.resolved);
          info["bias"] = bias_list(res.bias);
          info["warnings"] = res.result.warnings;
          return py::make_tuple(res.data, info);
        },
        py::arg("ds"), py::arg("pct") = std::make_tuple(5, 5, 5), py::arg("strategy") = "union",
        py::arg("population") = "all", py::arg("assess") = "dataset", py::arg("seed") = 30,
        "Undersample with percentiles (radius, count, density); returns (dataset, info).");

  m.def("oversample",
        [](const Dataset& ds, std::tuple<double, double, double> weights, double factor, std::uint64_t seed) {
          FawosConfig cfg{{std::get<0>(weights), std::get<1>(weights), std::get<2>(weights)}, factor};
          cfg.validate();
          const GroupTable table = enumerate_groups(ds.schema());
          const auto targets = oversampling_targets(ds, table, assess_bias(ds, ds.labels()));
          FawosResult res;
          {
            py::gil_scoped_release release;
            res = oversample(ds, targets, cfg, seed);
          }
          py::list synthetics;
          for (const auto& s : res.synthetics) {
            py::dict d;
            d["row_id"] = s.row_id;
            d["group"] = s.group;
            d["seed_row"] = s.seed_row;
            d["neighbor_row"] = s.neighbor_row;
            d["gap"] = s.gap;
            synthetics.append(d);
          }
          py::dict info;
          info["targets"] = targets;
          info["added_per_group"] = res.per_group_added;
          info["synthetics"] = synthetics;
          info["warnings"] = res.warnings;
          return py::make_tuple(res.data, info);
        },
        py::arg("ds"), py::arg("weights") = std::make_tuple(0.0, 0.4, 0.6), py::arg("factor") = 1.0,
        py::arg("seed") = 30, "FAWOS oversampling of the disadvantaged groups; returns (dataset, info).");

  m.def("stratified_folds", [](const Dataset& ds, int k, std::uint64_t seed) {
    return stratified_folds(ds, k, seed).assignments;
  }, py::arg("ds"), py::arg("k") = 5, py::arg("seed") = 30);

  py::class_<DecisionTree>(m, "DecisionTree")
      .def_static("fit", &DecisionTree::fit, py::arg("ds"), py::arg("seed") = 30,
                  py::call_guard<py::gil_scoped_release>())
      .def("predict", py::overload_cast<const Dataset&>(&DecisionTree::predict, py::const_))
      .def("score", py::overload_cast<const Dataset&>(&DecisionTree::score, py::const_))
      .def_property_readonly("depth", &DecisionTree::depth)
      .def_property_readonly("num_nodes", [](const DecisionTree& t) { return t.nodes().size(); })
      .def("serialize", &DecisionTree::serialize, py::arg("feature_names") = std::vector<std::string>{});

  m.def("fairness", [](const Dataset& ds, const std::vector<int>& predicted) {
    const auto r = fairness_report(ds, predicted);
    py::list out;
    for (const auto& f : r.features) {
      py::dict d;
      d["feature"] = f.feature;
      d["spd"] = f.spd;
      d["di"] = f.di.value;
      d["status"] = status_name(f.di.status);
      d["adi"] = f.adi;
      d["eod"] = f.eod;
      out.append(d);
    }
    return out;
  }, py::arg("ds"), py::arg("predicted"));
  m.def("auc", [](const std::vector<double>& s, const std::vector<int>& y) { return auc(s, y); });
  m.def("accuracy", [](const std::vector<int>& p, const std::vector<int>& y) { return accuracy(p, y); });

  py::class_<ExperimentReport>(m, "Report")
      .def_property_readonly("config_id", [](const ExperimentReport& r) { return r.config.id; })
      .def_property_readonly("strategy", [](const ExperimentReport& r) { return r.config.strategy_label(); })
      .def_property_readonly("percentiles",
                             [](const ExperimentReport& r) -> py::object {
                               if (r.config.kind != ConfigKind::kFairOnb) return py::none();
                               return py::make_tuple(r.config.onb.pct_radius, r.config.onb.pct_count,
                                                     r.config.onb.pct_density);
                             })
      .def_property_readonly("failed", [](const ExperimentReport& r) { return r.failed; })
      .def_property_readonly("eligible", [](const ExperimentReport& r) { return r.mean.eligible; })
      .def_property_readonly("auc", [](const ExperimentReport& r) { return r.mean.auc; })
      .def_property_readonly("accuracy", [](const ExperimentReport& r) { return r.mean.accuracy; })
      .def_property_readonly("total_di_distance", [](const ExperimentReport& r) { return r.mean.total_di_distance; })
      .def_property_readonly("total_adi_distance",
                             [](const ExperimentReport& r) { return r.mean.total_adi_distance; })
      .def_property_readonly("features", [](const ExperimentReport& r) { return feature_metrics_list(r.mean.features); })
      .def_property_readonly("thresholds", [](const ExperimentReport& r) { return thresholds_dict(r.mean.thresholds); })
      .def_property_readonly("folds", [](const ExperimentReport& r) { return r.folds.size(); })
      .def("__repr__", [](const ExperimentReport& r) { return "<Report " + r.config.id + ">"; });

  m.def("run_grid",
        [](const Dataset& ds, int folds, std::vector<int> levels, const std::vector<std::string>& strategies,
           const std::string& population, const std::string& assess, std::uint64_t seed, int jobs) {
          GridOptions opt;
          opt.levels = std::move(levels);
          opt.strategies.clear();
          for (const auto& s : strategies) opt.strategies.push_back(parse_strategy(s));
          opt.population = parse_threshold_population(population);
          opt.source = parse_assessment_source(assess);
          opt.seed = seed;
          opt.jobs = jobs;
          py::gil_scoped_release release;
          return run_grid(ds, stratified_folds(ds, folds, seed), opt);
        },
        py::arg("ds"), py::arg("folds") = 5, py::arg("levels") = default_percentile_levels(),
        py::arg("strategies") = std::vector<std::string>{"union", "intersection"}, py::arg("population") = "all",
        py::arg("assess") = "dataset", py::arg("seed") = 30, py::arg("jobs") = 1);

  m.def("run_fawos_grid",
        [](const Dataset& ds, int folds, std::uint64_t seed, int jobs) {
          py::gil_scoped_release release;
          return run_fawos_grid(ds, stratified_folds(ds, folds, seed), fawos_default_configs(), seed, jobs);
        },
        py::arg("ds"), py::arg("folds") = 5, py::arg("seed") = 30, py::arg("jobs") = 1);

  m.def("select_best",
        [](const std::vector<ExperimentReport>& reports, const std::string& performance, const std::string& measure) {
          if (performance != "auc" && performance != "accuracy")
            throw ConfigError("performance must be 'auc' or 'accuracy'");
          if (measure != "di" && measure != "adi") throw ConfigError("measure must be 'di' or 'adi'");
          const auto b = select_best(reports, performance == "auc" ? PerformanceMetric::kAuc : PerformanceMetric::kAccuracy,
                                     measure == "di" ? FairnessMeasure::kDi : FairnessMeasure::kAdi);
          py::dict d;
          d["global"] = b.best_global;
          d["per_feature"] = b.best_per_feature;
          d["performance"] = b.best_performance;
          return d;
        },
        py::arg("reports"), py::arg("performance") = "auc", py::arg("measure") = "di");

  m.def("report_csv", [](const std::vector<ExperimentReport>& r) {
    return to_text([&](std::ostream& os) { write_report_csv(r, os); });
  });
  m.def("summary_csv", [](const std::vector<ExperimentReport>& r) {
    return to_text([&](std::ostream& os) { write_summary_csv(r, os); });
  });
  m.def("compare", [](const std::vector<ExperimentReport>& onb, const std::vector<ExperimentReport>& fawos) {
    const auto rows = compare_methods(onb, fawos);
    py::list out;
    for (const auto& row : rows) {
      py::dict d;
      d["method"] = row.method;
      d["config_id"] = row.config_id;
      d["parameters"] = row.parameters;
      d["adi"] = row.adi;
      d["total_adi_distance"] = row.total_adi_distance;
      d["accuracy"] = row.accuracy;
      out.append(d);
    }
    return py::make_tuple(out, render_comparison(rows));
  }, py::arg("onb"), py::arg("fawos"), "Returns (rows, rendered table).");
}
