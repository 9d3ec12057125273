#pragma once

#include <compare>
#include <string>
#include <string_view>

#include "json.hpp"

#include "blindspot/table.h"

namespace blindspot {

// A single-feature predicate naming a region of feature space.
//
// Canonical text: "f <= t", "f > t", "lo < f <= hi", "f = c", with
// thresholds in shortest round-trip form. Conditions compare equal iff their
// canonical texts do.
class Condition {
 public:
  enum class Op { kLessEq, kGreater, kInRange, kEquals };

  static Condition less_eq(std::string feature, double threshold);
  static Condition greater(std::string feature, double threshold);
  static Condition in_range(std::string feature, double lo, double hi);
  static Condition equals(std::string feature, std::string category);

  const std::string& feature() const { return feature_; }
  Op op() const { return op_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  const std::string& category() const { return category_; }
  const std::string& text() const { return text_; }

  bool holds(const Cell& value) const;
  // Throws UnknownFeature if the feature is not in the table's schema.
  bool holds(const LabeledTable& table, size_t row) const;

  bool operator==(const Condition& other) const { return text_ == other.text_; }
  std::strong_ordering operator<=>(const Condition& other) const { return text_ <=> other.text_; }

  nlohmann::json to_json() const;
  static Condition from_json(const nlohmann::json& json);

 private:
  Condition(std::string feature, Op op, double lo, double hi, std::string category);

  std::string feature_;
  Op op_;
  double lo_;  // threshold for kGreater, lower bound for kInRange
  double hi_;  // threshold for kLessEq, upper bound for kInRange
  std::string category_;
  std::string text_;
};

}  // namespace blindspot
