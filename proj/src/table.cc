#include "blindspot/table.h"

#include <cmath>
#include <unordered_set>

#include "blindspot/error.h"

namespace blindspot {

std::string_view feature_kind_name(FeatureKind kind) {
  return kind == FeatureKind::kContinuous ? "continuous" : "categorical";
}

FeatureKind parse_feature_kind(std::string_view name) {
  if (name == "continuous") return FeatureKind::kContinuous;
  if (name == "categorical") return FeatureKind::kCategorical;
  throw Error(ErrorKind::kFormatError, "unknown feature kind '" + std::string(name) + "'");
}

void validate_schema(const Schema& schema) {
  if (schema.empty()) {
    throw Error(ErrorKind::kInvalidArgument, "schema needs at least one feature");
  }
  std::unordered_set<std::string> seen;
  for (const auto& spec : schema) {
    if (!seen.insert(spec.name).second) {
      throw Error(ErrorKind::kInvalidArgument, "duplicate feature name '" + spec.name + "'");
    }
  }
}

LabeledTable::LabeledTable(Schema schema)
    : schema_(std::move(schema)),
      numeric_(schema_.size()),
      categorical_(schema_.size()) {
  validate_schema(schema_);
}

void LabeledTable::reserve(size_t rows) {
  for (size_t j = 0; j < schema_.size(); ++j) {
    if (schema_[j].kind == FeatureKind::kContinuous) {
      numeric_[j].reserve(rows);
    } else {
      categorical_[j].reserve(rows);
    }
  }
  labels_.reserve(rows);
  row_ids_.reserve(rows);
  id_index_.reserve(rows);
}

void LabeledTable::add_row(std::span<const Cell> cells, int label, std::string row_id) {
  if (cells.size() != schema_.size()) {
    throw Error(ErrorKind::kInvalidArgument,
                "row '" + row_id + "' has " + std::to_string(cells.size()) +
                    " cells, schema has " + std::to_string(schema_.size()));
  }
  if (label != 0 && label != 1) {
    throw Error(ErrorKind::kInvalidLabel, "row '" + row_id + "' label must be 0 or 1");
  }
  for (size_t j = 0; j < cells.size(); ++j) {
    const bool continuous = schema_[j].kind == FeatureKind::kContinuous;
    if (continuous != std::holds_alternative<double>(cells[j])) {
      throw Error(ErrorKind::kInvalidArgument,
                  "row '" + row_id + "' cell kind mismatch for '" + schema_[j].name + "'");
    }
    if (continuous && !std::isfinite(std::get<double>(cells[j]))) {
      throw Error(ErrorKind::kInvalidArgument,
                  "row '" + row_id + "' non-finite value for '" + schema_[j].name + "'");
    }
  }
  if (!id_index_.emplace(row_id, labels_.size()).second) {
    throw Error(ErrorKind::kDuplicateRowId, row_id);
  }
  for (size_t j = 0; j < cells.size(); ++j) {
    if (schema_[j].kind == FeatureKind::kContinuous) {
      numeric_[j].push_back(std::get<double>(cells[j]));
    } else {
      categorical_[j].push_back(std::get<std::string>(cells[j]));
    }
  }
  labels_.push_back(label);
  row_ids_.push_back(std::move(row_id));
}

std::optional<size_t> LabeledTable::feature_index(std::string_view name) const {
  for (size_t j = 0; j < schema_.size(); ++j) {
    if (schema_[j].name == name) return j;
  }
  return std::nullopt;
}

Cell LabeledTable::cell(size_t row, size_t feature) const {
  if (schema_[feature].kind == FeatureKind::kContinuous) return numeric_[feature][row];
  return categorical_[feature][row];
}

std::vector<Cell> LabeledTable::row(size_t row) const {
  std::vector<Cell> out;
  out.reserve(schema_.size());
  for (size_t j = 0; j < schema_.size(); ++j) out.push_back(cell(row, j));
  return out;
}

std::optional<size_t> LabeledTable::find_row(std::string_view row_id) const {
  auto it = id_index_.find(std::string(row_id));
  if (it == id_index_.end()) return std::nullopt;
  return it->second;
}

LabeledTable LabeledTable::select(std::span<const size_t> rows) const {
  LabeledTable out(schema_);
  out.reserve(rows.size());
  for (size_t r : rows) {
    const auto cells = row(r);
    out.add_row(cells, labels_[r], row_ids_[r]);
  }
  return out;
}

bool LabeledTable::rows_equal(size_t row, const LabeledTable& other, size_t other_row) const {
  if (other.schema_ != schema_) return false;
  for (size_t j = 0; j < schema_.size(); ++j) {
    if (schema_[j].kind == FeatureKind::kContinuous) {
      if (numeric_[j][row] != other.numeric_[j][other_row]) return false;
    } else if (categorical_[j][row] != other.categorical_[j][other_row]) {
      return false;
    }
  }
  return true;
}

}  // namespace blindspot
