#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace blindspot {

enum class FeatureKind { kContinuous, kCategorical };

std::string_view feature_kind_name(FeatureKind kind);
FeatureKind parse_feature_kind(std::string_view name);

struct FeatureSpec {
  std::string name;
  FeatureKind kind = FeatureKind::kContinuous;

  bool operator==(const FeatureSpec&) const = default;
};

using Schema = std::vector<FeatureSpec>;

// Throws InvalidArgument if the schema is empty or names repeat.
void validate_schema(const Schema& schema);

// One cell: a real for continuous features, a category for categorical ones.
using Cell = std::variant<double, std::string>;

// Column-oriented binary-labelled dataset.
//
// Continuous columns hold finite reals, categorical columns hold strings.
// Row ids are unique. Tables are built by appending rows and are treated as
// immutable once handed to other modules.
class LabeledTable {
 public:
  explicit LabeledTable(Schema schema);

  void reserve(size_t rows);

  // Appends one row. Throws InvalidArgument on arity/kind mismatch,
  // non-finite continuous cells or labels outside {0,1}, and DuplicateRowId
  // on a repeated id.
  void add_row(std::span<const Cell> cells, int label, std::string row_id);

  size_t n_rows() const { return labels_.size(); }
  size_t n_features() const { return schema_.size(); }
  bool empty() const { return labels_.empty(); }

  const Schema& schema() const { return schema_; }
  std::optional<size_t> feature_index(std::string_view name) const;

  double numeric(size_t row, size_t feature) const { return numeric_[feature][row]; }
  const std::string& category(size_t row, size_t feature) const {
    return categorical_[feature][row];
  }
  Cell cell(size_t row, size_t feature) const;
  std::vector<Cell> row(size_t row) const;

  std::span<const double> numeric_column(size_t feature) const { return numeric_[feature]; }
  std::span<const std::string> category_column(size_t feature) const {
    return categorical_[feature];
  }

  std::span<const int> labels() const { return labels_; }
  std::span<const std::string> row_ids() const { return row_ids_; }
  std::optional<size_t> find_row(std::string_view row_id) const;

  // Sub-table with the given rows, in the given order.
  LabeledTable select(std::span<const size_t> rows) const;

  // True when both rows hold exactly the same cell values.
  bool rows_equal(size_t row, const LabeledTable& other, size_t other_row) const;

 private:
  Schema schema_;
  std::vector<std::vector<double>> numeric_;
  std::vector<std::vector<std::string>> categorical_;
  std::vector<int> labels_;
  std::vector<std::string> row_ids_;
  std::unordered_map<std::string, size_t> id_index_;
};

}  // namespace blindspot
