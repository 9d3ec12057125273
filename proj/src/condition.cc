#include "blindspot/condition.h"

#include <cmath>

#include "blindspot/error.h"
#include "blindspot/format.h"

namespace blindspot {
namespace {

std::string_view op_name(Condition::Op op) {
  switch (op) {
    case Condition::Op::kLessEq: return "less_eq";
    case Condition::Op::kGreater: return "greater";
    case Condition::Op::kInRange: return "in_range";
    case Condition::Op::kEquals: return "equals";
  }
  return "";
}

}  // namespace

Condition::Condition(std::string feature, Op op, double lo, double hi, std::string category)
    : feature_(std::move(feature)), op_(op), lo_(lo), hi_(hi), category_(std::move(category)) {
  switch (op_) {
    case Op::kLessEq:
      text_ = feature_ + " <= " + format_shortest(hi_);
      break;
    case Op::kGreater:
      text_ = feature_ + " > " + format_shortest(lo_);
      break;
    case Op::kInRange:
      if (!(lo_ < hi_)) throw Error(ErrorKind::kInvalidArgument, "range condition needs lo < hi");
      text_ = format_shortest(lo_) + " < " + feature_ + " <= " + format_shortest(hi_);
      break;
    case Op::kEquals:
      text_ = feature_ + " = " + category_;
      break;
  }
}

Condition Condition::less_eq(std::string feature, double threshold) {
  return Condition(std::move(feature), Op::kLessEq, 0.0, threshold, {});
}

Condition Condition::greater(std::string feature, double threshold) {
  return Condition(std::move(feature), Op::kGreater, threshold, 0.0, {});
}

Condition Condition::in_range(std::string feature, double lo, double hi) {
  return Condition(std::move(feature), Op::kInRange, lo, hi, {});
}

Condition Condition::equals(std::string feature, std::string category) {
  return Condition(std::move(feature), Op::kEquals, 0.0, 0.0, std::move(category));
}

bool Condition::holds(const Cell& value) const {
  if (op_ == Op::kEquals) {
    const auto* category = std::get_if<std::string>(&value);
    return category && *category == category_;
  }
  const auto* x = std::get_if<double>(&value);
  if (!x) return false;
  switch (op_) {
    case Op::kLessEq: return *x <= hi_;
    case Op::kGreater: return *x > lo_;
    case Op::kInRange: return lo_ < *x && *x <= hi_;
    case Op::kEquals: break;
  }
  return false;
}

bool Condition::holds(const LabeledTable& table, size_t row) const {
  const auto j = table.feature_index(feature_);
  if (!j) throw Error(ErrorKind::kUnknownFeature, feature_);
  return holds(table.cell(row, *j));
}

nlohmann::json Condition::to_json() const {
  nlohmann::json out{{"feature", feature_}, {"op", op_name(op_)}, {"text", text_}};
  switch (op_) {
    case Op::kLessEq: out["threshold"] = hi_; break;
    case Op::kGreater: out["threshold"] = lo_; break;
    case Op::kInRange:
      out["lo"] = lo_;
      out["hi"] = hi_;
      break;
    case Op::kEquals: out["category"] = category_; break;
  }
  return out;
}

Condition Condition::from_json(const nlohmann::json& json) {
  const auto feature = json.at("feature").get<std::string>();
  const auto op = json.at("op").get<std::string>();
  if (op == "less_eq") return less_eq(feature, json.at("threshold").get<double>());
  if (op == "greater") return greater(feature, json.at("threshold").get<double>());
  if (op == "in_range") return in_range(feature, json.at("lo").get<double>(), json.at("hi").get<double>());
  if (op == "equals") return equals(feature, json.at("category").get<std::string>());
  throw Error(ErrorKind::kFormatError, "unknown condition op '" + op + "'");
}

}  // namespace blindspot
