#include "blindspot/predictor.h"

#include <cmath>
#include <limits>

#include "blindspot/csv.h"
#include "blindspot/error.h"
#include "blindspot/format.h"

namespace blindspot {

Metrics metrics_from_counts(size_t tp, size_t fp, size_t tn, size_t fn, double threshold) {
  auto ratio = [](size_t num, size_t den) {
    return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
  };
  Metrics m;
  m.tp = tp;
  m.fp = fp;
  m.tn = tn;
  m.fn = fn;
  m.threshold = threshold;
  m.recall = ratio(tp, tp + fn);
  m.precision = ratio(tp, tp + fp);
  m.accuracy = ratio(tp + tn, m.n());
  m.error_rate = ratio(fp + fn, m.n());
  return m;
}

Metrics metrics_from_predictions(std::span<const double> probabilities, std::span<const int> labels,
                                 double threshold) {
  if (probabilities.size() != labels.size()) {
    throw Error(ErrorKind::kInvalidArgument, "probabilities and labels differ in length");
  }
  size_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (size_t i = 0; i < labels.size(); ++i) {
    const bool positive = predicted_label(probabilities[i], threshold) == 1;
    if (labels[i] == 1) {
      positive ? ++tp : ++fn;
    } else {
      positive ? ++fp : ++tn;
    }
  }
  return metrics_from_counts(tp, fp, tn, fn, threshold);
}

Metrics evaluate(const Predictor& predictor, const LabeledTable& table, double threshold) {
  if (table.empty()) throw Error(ErrorKind::kEmptyTable, "cannot evaluate on an empty table");
  const auto probabilities = predictor.predict_proba(table);
  return metrics_from_predictions(probabilities, table.labels(), threshold);
}

nlohmann::json metrics_to_json(const Metrics& m) {
  return {{"tp", m.tp},         {"fp", m.fp},
          {"tn", m.tn},         {"fn", m.fn},
          {"n", m.n()},         {"recall", m.recall},
          {"precision", m.precision}, {"accuracy", m.accuracy},
          {"error_rate", m.error_rate}, {"threshold", m.threshold}};
}

ExternalPredictor::ExternalPredictor(LabeledTable reference,
                                     std::unordered_map<std::string, double> probabilities)
    : reference_(std::move(reference)) {
  by_reference_row_.reserve(reference_.n_rows());
  for (const auto& id : reference_.row_ids()) {
    auto it = probabilities.find(id);
    if (it == probabilities.end()) throw Error(ErrorKind::kMissingRowId, id);
    if (!(it->second >= 0.0 && it->second <= 1.0)) {
      throw Error(ErrorKind::kProbabilityOutOfRange, id);
    }
    by_reference_row_.push_back(it->second);
  }
  inverse_scale_.assign(reference_.n_features(), 0.0);
  const double n = static_cast<double>(reference_.n_rows());
  for (size_t j = 0; j < reference_.n_features(); ++j) {
    if (reference_.schema()[j].kind != FeatureKind::kContinuous || reference_.empty()) continue;
    double mean = 0.0;
    for (double v : reference_.numeric_column(j)) mean += v;
    mean /= n;
    double ss = 0.0;
    for (double v : reference_.numeric_column(j)) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / n);
    inverse_scale_[j] = sd > 0.0 ? 1.0 / sd : 1.0;
  }
}

double ExternalPredictor::nearest(const LabeledTable& rows, size_t row) const {
  double best = std::numeric_limits<double>::infinity();
  size_t best_row = 0;
  const auto& schema = reference_.schema();
  for (size_t r = 0; r < reference_.n_rows(); ++r) {
    double distance = 0.0;
    for (size_t j = 0; j < schema.size() && distance < best; ++j) {
      if (schema[j].kind == FeatureKind::kContinuous) {
        const double diff = (rows.numeric(row, j) - reference_.numeric(r, j)) * inverse_scale_[j];
        distance += diff * diff;
      } else if (rows.category(row, j) != reference_.category(r, j)) {
        distance += 1.0;
      }
    }
    if (distance < best) {
      best = distance;
      best_row = r;
    }
  }
  return by_reference_row_[best_row];
}

std::vector<double> ExternalPredictor::predict_proba(const LabeledTable& rows) const {
  if (rows.schema() != reference_.schema()) {
    throw Error(ErrorKind::kSchemaMismatch, "rows do not match the predictions' reference table");
  }
  if (reference_.empty()) throw Error(ErrorKind::kEmptyTable, "no reference rows");
  std::vector<double> out(rows.n_rows());
  for (size_t r = 0; r < rows.n_rows(); ++r) {
    const auto hit = reference_.find_row(rows.row_ids()[r]);
    if (hit && reference_.rows_equal(*hit, rows, r)) {
      out[r] = by_reference_row_[*hit];
    } else {
      out[r] = nearest(rows, r);
    }
  }
  return out;
}

ExternalPredictor load_external_predictions(const std::string& path, const LabeledTable& table) {
  const auto records = csv::read_file(path);
  if (records.empty() || records.front() != csv::Record{"row_id", "probability"}) {
    throw Error(ErrorKind::kFormatError, "'" + path + "' must start with header row_id,probability");
  }
  std::unordered_map<std::string, double> probabilities;
  for (size_t r = 1; r < records.size(); ++r) {
    const auto& record = records[r];
    if (record.size() != 2) {
      throw Error(ErrorKind::kFormatError, "'" + path + "' row " + std::to_string(r - 1) + " needs 2 fields");
    }
    double p = 0.0;
    if (!parse_double(record[1], p)) {
      throw Error(ErrorKind::kNonNumericCell, "'" + path + "' row " + std::to_string(r - 1));
    }
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::kProbabilityOutOfRange, record[0]);
    if (!probabilities.emplace(record[0], p).second) {
      throw Error(ErrorKind::kDuplicateRowId, record[0]);
    }
  }
  return ExternalPredictor(table, std::move(probabilities));
}

}  // namespace blindspot
