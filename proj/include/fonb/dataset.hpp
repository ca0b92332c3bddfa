#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fonb/error.hpp"

namespace fonb {

using RowId = std::int64_t;

enum class FeatureKind { kBinary, kNumeric };

const char* to_string(FeatureKind kind);

/// Column layout of an encoded dataset. Protected features are binary
/// columns; the class is binary with `positive_class_value` mapped to 1.
struct Schema {
  std::vector<std::string> feature_names;
  std::vector<FeatureKind> feature_kinds;
  std::vector<std::string> protected_features;
  std::string class_name;
  std::string positive_class_value;
  // Raw spelling of the class value encoded as 0, discovered at load.
  std::string negative_class_value;

  std::size_t num_features() const { return feature_names.size(); }
  /// Throws SchemaError when `name` is not a feature.
  std::size_t feature_index(const std::string& name) const;
  std::vector<std::size_t> protected_indices() const;
  void validate() const;

  bool operator==(const Schema&) const = default;
};

/// The JSON schema document: {"class", "positive_value", "protected",
/// "binary", "numeric"}.
struct SchemaConfig {
  std::string class_name;
  std::string positive_value;
  std::vector<std::string> protected_features;
  std::vector<std::string> binary;
  std::vector<std::string> numeric;

  static SchemaConfig from_json_text(const std::string& text);
  static SchemaConfig from_file(const std::filesystem::path& path);
  std::string to_json_text() const;
};

/// Raw range of a numeric column; (raw - min) / (max - min) maps it to [0,1].
struct ColumnRange {
  double min = 0.0;
  double max = 0.0;
  bool operator==(const ColumnRange&) const = default;
};

/// Encoded tabular data. Rows are stored row-major; binary columns hold
/// exactly 0.0 or 1.0 and numeric columns are min-max normalized.
class Dataset {
 public:
  Dataset() = default;
  Dataset(Schema schema, std::vector<double> values, std::vector<int> labels,
          std::vector<RowId> row_ids, std::vector<ColumnRange> ranges = {});

  const Schema& schema() const { return schema_; }
  std::size_t num_rows() const { return labels_.size(); }
  std::size_t num_features() const { return schema_.num_features(); }
  bool empty() const { return labels_.empty(); }

  std::span<const double> row(std::size_t i) const {
    return {values_.data() + i * num_features(), num_features()};
  }
  double at(std::size_t i, std::size_t j) const { return values_[i * num_features() + j]; }
  const std::vector<double>& values() const { return values_; }
  const std::vector<int>& labels() const { return labels_; }
  int label(std::size_t i) const { return labels_[i]; }
  const std::vector<RowId>& row_ids() const { return row_ids_; }
  RowId row_id(std::size_t i) const { return row_ids_[i]; }
  /// Per-feature raw range used for normalization; empty entries (min==max==0)
  /// for binary columns.
  const std::vector<ColumnRange>& ranges() const { return ranges_; }

  /// Rows at the given positions, in the given order.
  Dataset take(std::span<const std::size_t> positions) const;
  /// Rows whose id is in `ids` (any order), keeping this dataset's order.
  Dataset select_ids(std::span<const RowId> ids) const;
  /// Appends rows; `values` is row-major with num_features() columns.
  Dataset append(std::span<const double> values, std::span<const int> labels,
                 std::span<const RowId> ids) const;
  /// Protected column `k` (index into schema().protected_features) as 0/1.
  std::vector<int> protected_column(std::size_t k) const;

  bool operator==(const Dataset&) const = default;

 private:
  Schema schema_;
  std::vector<double> values_;
  std::vector<int> labels_;
  std::vector<RowId> row_ids_;
  std::vector<ColumnRange> ranges_;
};

/// Reads a CSV file (header row, comma separated, '.' decimals). Binary and
/// protected columns must hold 0/1; numeric columns are min-max normalized
/// with the file's own ranges. Columns absent from the schema are ignored.
Dataset load_csv(const std::filesystem::path& path, const SchemaConfig& config);
Dataset parse_csv(std::istream& in, const SchemaConfig& config);

/// Writes the dataset in the load_csv format. Numeric columns are mapped
/// back to raw units through ranges(); the class column uses the raw
/// positive/negative spellings.
void write_csv(const Dataset& ds, std::ostream& out);
void write_csv(const Dataset& ds, const std::filesystem::path& path);

/// Min-max scaling fitted on one dataset (usually a training split) and
/// applied to others. Values outside the fitted range are clamped to [0,1];
/// constant columns map to 0.
class MinMaxScaler {
 public:
  static MinMaxScaler fit(const Dataset& train);
  Dataset transform(const Dataset& ds) const;
  const std::vector<ColumnRange>& ranges() const { return ranges_; }

 private:
  std::vector<ColumnRange> ranges_;
  std::vector<bool> numeric_;
};

/// Fold index in [0, k) for every row position.
struct FoldPlan {
  int k = 0;
  std::vector<int> assignments;

  std::vector<std::size_t> test_positions(int fold) const;
  std::vector<std::size_t> train_positions(int fold) const;
  bool operator==(const FoldPlan&) const = default;
};

/// Stratified k-fold split. Rows of each class are shuffled with `seed`
/// and dealt round-robin, so per-fold class counts differ by at most one.
FoldPlan stratified_folds(const Dataset& ds, int k, std::uint64_t seed);

}  // namespace fonb
