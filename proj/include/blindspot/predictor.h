#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "json.hpp"

#include "blindspot/table.h"

namespace blindspot {

// A black-box binary classifier: rows in, positive-class probabilities out.
// Implementations must be deterministic and safe to call concurrently.
class Predictor {
 public:
  virtual ~Predictor() = default;
  virtual std::vector<double> predict_proba(const LabeledTable& rows) const = 0;
};

// Decision rule shared by every module: probability >= threshold is positive.
inline int predicted_label(double probability, double threshold) {
  return probability >= threshold ? 1 : 0;
}

struct Metrics {
  size_t tp = 0, fp = 0, tn = 0, fn = 0;
  double recall = 0.0;
  double precision = 0.0;
  double accuracy = 0.0;
  double error_rate = 0.0;
  double threshold = 0.5;

  size_t n() const { return tp + fp + tn + fn; }
};

// Derived rates from a confusion matrix. Rates with an empty denominator
// are reported as 0.
Metrics metrics_from_counts(size_t tp, size_t fp, size_t tn, size_t fn, double threshold = 0.5);

Metrics metrics_from_predictions(std::span<const double> probabilities, std::span<const int> labels,
                                 double threshold = 0.5);

// Throws EmptyTable.
Metrics evaluate(const Predictor& predictor, const LabeledTable& table, double threshold = 0.5);

nlohmann::json metrics_to_json(const Metrics& metrics);

// Predictions produced outside this library, looked up by row id.
//
// Rows that are not in the reference table (for instance LIME
// perturbations) are answered with the probability of the nearest
// reference row: squared distance over continuous features scaled by their
// standard deviation, plus 1 per categorical mismatch; ties go to the
// earlier row.
class ExternalPredictor final : public Predictor {
 public:
  // `probabilities` must cover every row id of `reference`.
  ExternalPredictor(LabeledTable reference, std::unordered_map<std::string, double> probabilities);

  std::vector<double> predict_proba(const LabeledTable& rows) const override;

  const LabeledTable& reference() const { return reference_; }

 private:
  double nearest(const LabeledTable& rows, size_t row) const;

  LabeledTable reference_;
  std::vector<double> by_reference_row_;
  std::vector<double> inverse_scale_;
};

// Reads a "row_id,probability" CSV. Throws MissingRowId, DuplicateRowId and
// ProbabilityOutOfRange. Ids not present in `table` are ignored.
ExternalPredictor load_external_predictions(const std::string& path, const LabeledTable& table);

}  // namespace blindspot
