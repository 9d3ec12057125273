#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "json.hpp"

#include "blindspot/condition.h"
#include "blindspot/discretizer.h"
#include "blindspot/lime.h"
#include "blindspot/predictor.h"
#include "blindspot/table.h"

namespace blindspot {

enum class SplitTag { kTrain, kTest };

std::string_view split_tag_name(SplitTag tag);
SplitTag parse_split_tag(std::string_view name);

struct MisclassifiedSet {
  SplitTag split = SplitTag::kTest;
  std::vector<std::string> row_ids;  // table order
  std::vector<size_t> rows;          // matching table row indices
  double threshold = 0.5;

  size_t size() const { return row_ids.size(); }
};

struct MinedCondition {
  Condition condition;
  size_t support = 0;
};

struct ConditionStats {
  Condition condition;
  size_t support = 0;
  double support_fraction = 0.0;
  size_t coverage = 0;
  size_t errors_in_region = 0;
  double error_rate = 0.0;
  bool empty = false;  // no covered rows; left out of reports

  nlohmann::json to_json() const;
  static ConditionStats from_json(const nlohmann::json& json);
};

struct RegionConfig {
  LimeConfig lime;
  double min_support_fraction = 0.1;
  double threshold = 0.5;
  size_t n_threads = 1;  // 0: hardware concurrency; results never depend on it

  void validate() const;
};

struct RegionReport {
  SplitTag split = SplitTag::kTest;
  double baseline_error_rate = 0.0;
  size_t n_total = 0;
  size_t n_misclassified = 0;
  std::vector<ConditionStats> regions;
  // Echo of the settings that produced the report.
  size_t top_k = 0;
  double min_support_fraction = 0.0;
  double threshold = 0.5;
  uint64_t lime_seed = 0;
  size_t n_samples = 0;
  double kernel_width = 0.0;
  double ridge_lambda = 0.0;
  // Caller-supplied run configuration, carried through serialization.
  nlohmann::json run_config;

  nlohmann::json to_json() const;
  static RegionReport from_json(const nlohmann::json& json);
  bool operator==(const RegionReport& other) const;
};

// Rows where (probability >= threshold) != (label == 1), in table order.
MisclassifiedSet find_misclassified(const Predictor& predictor, const LabeledTable& table,
                                    double threshold = 0.5, SplitTag split = SplitTag::kTest);
MisclassifiedSet find_misclassified(std::span<const double> probabilities, const LabeledTable& table,
                                    double threshold = 0.5, SplitTag split = SplitTag::kTest);

// One explanation per misclassified row, seeds derived from the row ids,
// optionally spread over threads. Output order follows `mis`.
std::vector<Explanation> explain_misclassified(const Predictor& predictor, const Discretizer& disc,
                                               const LabeledTable& table, const MisclassifiedSet& mis,
                                               const LimeConfig& config, size_t n_threads = 1);

// Conditions appearing in at least `min_support_fraction` of the
// explanations, by support descending then text. Throws NoExplanations.
std::vector<MinedCondition> mine_conditions(const std::vector<Explanation>& explanations,
                                            double min_support_fraction = 0.1);

// Coverage and error counts of one condition; support is left to the
// caller. Throws UnknownFeature.
ConditionStats region_error_rate(const Condition& condition, const Predictor& predictor,
                                 const LabeledTable& table, double threshold = 0.5);
ConditionStats region_error_rate(const Condition& condition, const LabeledTable& table,
                                 std::span<const char> misclassified);

struct RegionAnalysis {
  MisclassifiedSet misclassified;
  std::vector<Explanation> explanations;
  RegionReport report;
};

// find_misclassified -> explain_misclassified -> mine_conditions ->
// region_error_rate. Regions are sorted by error rate, coverage (both
// descending) and condition text.
RegionAnalysis analyze_split(const Predictor& predictor, const Discretizer& disc,
                             const LabeledTable& table, SplitTag split, const RegionConfig& config);

inline RegionReport build_report(const Predictor& predictor, const Discretizer& disc,
                                 const LabeledTable& table, SplitTag split, const RegionConfig& config) {
  return analyze_split(predictor, disc, table, split, config).report;
}

}  // namespace blindspot
