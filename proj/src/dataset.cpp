#include "fonb/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "fonb/format.hpp"

namespace fonb {

const char* to_string(FeatureKind kind) {
  return kind == FeatureKind::kBinary ? "binary" : "numeric";
}

std::size_t Schema::feature_index(const std::string& name) const {
  auto it = std::find(feature_names.begin(), feature_names.end(), name);
  if (it == feature_names.end()) throw SchemaError("unknown feature '" + name + "'");
  return static_cast<std::size_t>(it - feature_names.begin());
}

std::vector<std::size_t> Schema::protected_indices() const {
  std::vector<std::size_t> out;
  out.reserve(protected_features.size());
  for (const auto& name : protected_features) out.push_back(feature_index(name));
  return out;
}

void Schema::validate() const {
  if (feature_names.size() != feature_kinds.size())
    throw SchemaError("feature names and kinds differ in length");
  std::set<std::string> seen;
  for (const auto& n : feature_names)
    if (!seen.insert(n).second) throw SchemaError("duplicate feature '" + n + "'");
  if (seen.count(class_name)) throw SchemaError("class column '" + class_name + "' is also a feature");
  for (const auto& p : protected_features) {
    if (feature_kinds[feature_index(p)] != FeatureKind::kBinary)
      throw SchemaError("protected feature '" + p + "' must be binary");
  }
}

// ---------------------------------------------------------------------------
// Schema config

namespace {

std::vector<std::string> string_list(const nlohmann::json& j, const char* key, bool required) {
  if (!j.contains(key)) {
    if (required) throw SchemaError(std::string("schema is missing key '") + key + "'");
    return {};
  }
  const auto& v = j.at(key);
  if (!v.is_array()) throw SchemaError(std::string("schema key '") + key + "' must be a list");
  std::vector<std::string> out;
  for (const auto& e : v) {
    if (!e.is_string()) throw SchemaError(std::string("schema key '") + key + "' must hold strings");
    out.push_back(e.get<std::string>());
  }
  return out;
}

std::string scalar_text(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
  if (v.is_number()) return v.dump();
  throw SchemaError("schema key 'positive_value' must be a string or number");
}

}  // namespace

SchemaConfig SchemaConfig::from_json_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("invalid schema JSON: ") + e.what());
  }
  if (!j.is_object()) throw SchemaError("schema JSON must be an object");
  SchemaConfig c;
  if (!j.contains("class") || !j["class"].is_string()) throw SchemaError("schema is missing string key 'class'");
  c.class_name = j["class"].get<std::string>();
  if (!j.contains("positive_value")) throw SchemaError("schema is missing key 'positive_value'");
  c.positive_value = scalar_text(j["positive_value"]);
  c.protected_features = string_list(j, "protected", true);
  c.binary = string_list(j, "binary", false);
  c.numeric = string_list(j, "numeric", false);
  return c;
}

SchemaConfig SchemaConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open schema file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json_text(ss.str());
}

std::string SchemaConfig::to_json_text() const {
  nlohmann::json j;
  j["class"] = class_name;
  j["positive_value"] = positive_value;
  j["protected"] = protected_features;
  j["binary"] = binary;
  j["numeric"] = numeric;
  return j.dump(2);
}

// ---------------------------------------------------------------------------
// Dataset

Dataset::Dataset(Schema schema, std::vector<double> values, std::vector<int> labels,
                 std::vector<RowId> row_ids, std::vector<ColumnRange> ranges)
    : schema_(std::move(schema)),
      values_(std::move(values)),
      labels_(std::move(labels)),
      row_ids_(std::move(row_ids)),
      ranges_(std::move(ranges)) {
  schema_.validate();
  const std::size_t d = schema_.num_features();
  if (values_.size() != labels_.size() * d)
    throw ValidationError("value matrix does not match row count x feature count");
  if (row_ids_.size() != labels_.size()) throw ValidationError("row id count does not match row count");
  if (ranges_.empty()) ranges_.assign(d, ColumnRange{});
  if (ranges_.size() != d) throw ValidationError("one column range per feature is required");
  for (int y : labels_)
    if (y != 0 && y != 1) throw ValidationError("labels must be 0 or 1");
  std::unordered_set<RowId> ids(row_ids_.begin(), row_ids_.end());
  if (ids.size() != row_ids_.size()) throw ValidationError("row ids must be unique");
  for (std::size_t j = 0; j < d; ++j) {
    if (schema_.feature_kinds[j] != FeatureKind::kBinary) continue;
    for (std::size_t i = 0; i < labels_.size(); ++i) {
      double v = values_[i * d + j];
      if (v != 0.0 && v != 1.0)
        throw ValidationError("binary feature '" + schema_.feature_names[j] + "' holds a non-0/1 value");
    }
  }
}

Dataset Dataset::take(std::span<const std::size_t> positions) const {
  const std::size_t d = num_features();
  std::vector<double> v;
  v.reserve(positions.size() * d);
  std::vector<int> y;
  std::vector<RowId> ids;
  y.reserve(positions.size());
  ids.reserve(positions.size());
  for (std::size_t p : positions) {
    auto r = row(p);
    v.insert(v.end(), r.begin(), r.end());
    y.push_back(labels_[p]);
    ids.push_back(row_ids_[p]);
  }
  return Dataset(schema_, std::move(v), std::move(y), std::move(ids), ranges_);
}

Dataset Dataset::select_ids(std::span<const RowId> ids) const {
  std::unordered_set<RowId> wanted(ids.begin(), ids.end());
  std::vector<std::size_t> pos;
  for (std::size_t i = 0; i < num_rows(); ++i)
    if (wanted.count(row_ids_[i])) pos.push_back(i);
  return take(pos);
}

Dataset Dataset::append(std::span<const double> values, std::span<const int> labels,
                        std::span<const RowId> ids) const {
  std::vector<double> v = values_;
  v.insert(v.end(), values.begin(), values.end());
  std::vector<int> y = labels_;
  y.insert(y.end(), labels.begin(), labels.end());
  std::vector<RowId> r = row_ids_;
  r.insert(r.end(), ids.begin(), ids.end());
  return Dataset(schema_, std::move(v), std::move(y), std::move(r), ranges_);
}

std::vector<int> Dataset::protected_column(std::size_t k) const {
  const std::size_t j = schema_.feature_index(schema_.protected_features.at(k));
  std::vector<int> out(num_rows());
  for (std::size_t i = 0; i < num_rows(); ++i) out[i] = at(i, j) == 1.0 ? 1 : 0;
  return out;
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r' || s[b] == '\n')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r' || s[e - 1] == '\n')) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  fields.push_back(trim(cur));
  return fields;
}

bool parse_double(const std::string& s, double& out) {
  if (s.empty()) return false;
  const char* b = s.data();
  const char* e = b + s.size();
  if (*b == '+') ++b;
  auto [p, ec] = std::from_chars(b, e, out);
  return ec == std::errc() && p == e;
}

}  // namespace

Dataset parse_csv(std::istream& in, const SchemaConfig& config) {
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("CSV input is empty");
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF) line.erase(0, 3);  // UTF-8 BOM
  const auto header = split_csv_line(line);

  std::unordered_map<std::string, std::size_t> column;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (!column.emplace(header[c], c).second) throw SchemaError("duplicate CSV column '" + header[c] + "'");
  }
  auto require = [&](const std::string& name) {
    auto it = column.find(name);
    if (it == column.end()) throw SchemaError("missing column '" + name + "'");
    return it->second;
  };

  std::set<std::string> binary(config.binary.begin(), config.binary.end());
  binary.insert(config.protected_features.begin(), config.protected_features.end());
  std::set<std::string> numeric(config.numeric.begin(), config.numeric.end());
  for (const auto& n : numeric)
    if (binary.count(n)) throw SchemaError("feature '" + n + "' declared both binary and numeric");
  if (config.protected_features.empty()) throw SchemaError("schema declares no protected feature");

  Schema schema;
  schema.class_name = config.class_name;
  schema.positive_class_value = config.positive_value;
  schema.protected_features = config.protected_features;
  std::vector<std::size_t> source;  // CSV column per feature
  for (const auto& name : header) {
    if (binary.count(name) || numeric.count(name)) {
      schema.feature_names.push_back(name);
      schema.feature_kinds.push_back(binary.count(name) ? FeatureKind::kBinary : FeatureKind::kNumeric);
      source.push_back(column.at(name));
    }
  }
  for (const auto& n : binary) require(n);
  for (const auto& n : numeric) require(n);
  const std::size_t class_col = require(config.class_name);
  schema.validate();

  const std::size_t d = schema.num_features();
  std::vector<double> values;
  std::vector<int> labels;
  std::set<std::string> negatives;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw ParseError("expected " + std::to_string(header.size()) + " fields, found " +
                           std::to_string(fields.size()),
                       row);
    for (std::size_t j = 0; j < d; ++j) {
      const std::string& cell = fields[source[j]];
      const std::string& name = schema.feature_names[j];
      if (cell.empty()) throw ValidationError("missing value in column '" + name + "' (data row " + std::to_string(row) + ")");
      double v = 0.0;
      if (schema.feature_kinds[j] == FeatureKind::kBinary) {
        if (!parse_double(cell, v) || (v != 0.0 && v != 1.0))
          throw ValidationError("non-binary value '" + cell + "' in binary column '" + name +
                                "' (data row " + std::to_string(row) + ")");
      } else if (!parse_double(cell, v)) {
        throw ParseError("cannot parse '" + cell + "' as a number in column '" + name + "'", row);
      }
      values.push_back(v);
    }
    const std::string& cls = fields[class_col];
    if (cls.empty()) throw ValidationError("missing class value (data row " + std::to_string(row) + ")");
    if (cls == config.positive_value) {
      labels.push_back(1);
    } else {
      negatives.insert(cls);
      if (negatives.size() > 1)
        throw ValidationError("class column '" + config.class_name + "' is not binary");
      labels.push_back(0);
    }
    ++row;
  }

  schema.negative_class_value =
      negatives.empty() ? (config.positive_value == "0" ? "1" : "0") : *negatives.begin();

  const std::size_t n = labels.size();
  std::vector<ColumnRange> ranges(d);
  for (std::size_t j = 0; j < d; ++j) {
    if (schema.feature_kinds[j] != FeatureKind::kNumeric || n == 0) continue;
    double lo = values[j], hi = values[j];
    for (std::size_t i = 0; i < n; ++i) {
      lo = std::min(lo, values[i * d + j]);
      hi = std::max(hi, values[i * d + j]);
    }
    ranges[j] = {lo, hi};
    for (std::size_t i = 0; i < n; ++i) {
      double& v = values[i * d + j];
      v = hi > lo ? (v - lo) / (hi - lo) : 0.0;
    }
  }
  for (const auto& p : schema.protected_features) {
    const std::size_t j = schema.feature_index(p);
    bool has0 = false, has1 = false;
    for (std::size_t i = 0; i < n; ++i) (values[i * d + j] == 0.0 ? has0 : has1) = true;
    if (!(has0 && has1))
      throw ValidationError("protected feature '" + p + "' must take both values 0 and 1");
  }

  std::vector<RowId> ids(n);
  std::iota(ids.begin(), ids.end(), RowId{0});
  return Dataset(std::move(schema), std::move(values), std::move(labels), std::move(ids), std::move(ranges));
}

Dataset load_csv(const std::filesystem::path& path, const SchemaConfig& config) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot open data file " + path.string());
  return parse_csv(in, config);
}

void write_csv(const Dataset& ds, std::ostream& out) {
  const Schema& s = ds.schema();
  for (std::size_t j = 0; j < s.num_features(); ++j) out << s.feature_names[j] << ',';
  out << s.class_name << '\n';
  for (std::size_t i = 0; i < ds.num_rows(); ++i) {
    for (std::size_t j = 0; j < s.num_features(); ++j) {
      double v = ds.at(i, j);
      if (s.feature_kinds[j] == FeatureKind::kBinary) {
        out << (v == 1.0 ? '1' : '0');
      } else {
        // Fifteen digits drop the rounding noise of the min-max round trip.
        const ColumnRange& r = ds.ranges()[j];
        out << format_double(r.min + v * (r.max - r.min), 15);
      }
      out << ',';
    }
    out << (ds.label(i) == 1 ? s.positive_class_value : s.negative_class_value) << '\n';
  }
}

void write_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_csv(ds, out);
}

// ---------------------------------------------------------------------------
// Scaling and folds

MinMaxScaler MinMaxScaler::fit(const Dataset& train) {
  MinMaxScaler s;
  const std::size_t d = train.num_features();
  s.ranges_.assign(d, ColumnRange{});
  s.numeric_.assign(d, false);
  for (std::size_t j = 0; j < d; ++j) {
    if (train.schema().feature_kinds[j] != FeatureKind::kNumeric || train.empty()) continue;
    s.numeric_[j] = true;
    double lo = train.at(0, j), hi = lo;
    for (std::size_t i = 1; i < train.num_rows(); ++i) {
      lo = std::min(lo, train.at(i, j));
      hi = std::max(hi, train.at(i, j));
    }
    s.ranges_[j] = {lo, hi};
  }
  return s;
}

Dataset MinMaxScaler::transform(const Dataset& ds) const {
  const std::size_t d = ds.num_features();
  if (d != ranges_.size()) throw ValidationError("scaler was fitted on a different feature count");
  std::vector<double> v = ds.values();
  std::vector<ColumnRange> ranges = ds.ranges();
  for (std::size_t j = 0; j < d; ++j) {
    if (!numeric_[j]) continue;
    const ColumnRange& r = ranges_[j];
    for (std::size_t i = 0; i < ds.num_rows(); ++i) {
      double& x = v[i * d + j];
      x = r.max > r.min ? std::clamp((x - r.min) / (r.max - r.min), 0.0, 1.0) : 0.0;
    }
    // Keep raw-unit bookkeeping composable with the incoming normalization.
    const ColumnRange& old = ranges[j];
    const double span = old.max - old.min;
    ranges[j] = {old.min + r.min * span, old.min + r.max * span};
  }
  return Dataset(ds.schema(), std::move(v), ds.labels(), ds.row_ids(), std::move(ranges));
}

std::vector<std::size_t> FoldPlan::test_positions(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i)
    if (assignments[i] == fold) out.push_back(i);
  return out;
}

std::vector<std::size_t> FoldPlan::train_positions(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i)
    if (assignments[i] != fold) out.push_back(i);
  return out;
}

FoldPlan stratified_folds(const Dataset& ds, int k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("fold count must be at least 2");
  std::vector<std::size_t> by_class[2];
  for (std::size_t i = 0; i < ds.num_rows(); ++i) by_class[ds.label(i)].push_back(i);
  // A class smaller than k leaves some test folds without it; only an absent
  // class makes the plan unusable.
  for (int c = 0; c < 2; ++c)
    if (by_class[c].empty()) throw InfeasibleError("class " + std::to_string(c) + " has no instances");
  if (ds.num_rows() < static_cast<std::size_t>(k))
    throw InfeasibleError("fewer rows than folds");
  std::mt19937_64 rng(seed);
  FoldPlan plan;
  plan.k = k;
  plan.assignments.assign(ds.num_rows(), -1);
  std::size_t next = 0;
  for (auto& rows : by_class) {
    std::shuffle(rows.begin(), rows.end(), rng);
    for (std::size_t r : rows) plan.assignments[r] = static_cast<int>(next++ % static_cast<std::size_t>(k));
  }
  return plan;
}

}  // namespace fonb
