#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "blindspot/condition.h"
#include "blindspot/discretizer.h"
#include "blindspot/predictor.h"
#include "blindspot/table.h"

namespace blindspot {

struct LimeConfig {
  size_t n_samples = 5000;
  std::optional<double> kernel_width;  // unset: 0.75 * sqrt(d)
  double ridge_lambda = 1.0;
  size_t top_k = 5;
  uint64_t seed = 0;

  void validate() const;
  double resolved_kernel_width(size_t n_features) const;
};

// Dense row-major matrix.
struct Matrix {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(size_t r, size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}
  double& operator()(size_t r, size_t c) { return data[r * cols + c]; }
  double operator()(size_t r, size_t c) const { return data[r * cols + c]; }
};

struct Perturbations {
  Matrix z;         // n x d, 1 where the sample shares the instance's bin
  LabeledTable x;   // n raw rows; row 0 is the instance
};

// Row 0 is the instance itself. Every other sample draws, per feature, a
// bin by training frequency and a value inside it (normal with the bin's
// mean/std, clamped to the bin's range). Throws InvalidArgument if n < 2.
Perturbations sample_perturbations(const Discretizer& disc, const LabeledTable& table, size_t row,
                                   size_t n, uint64_t seed);

// w = exp(-d^2 / width^2), d^2 = number of zeros in the row.
std::vector<double> kernel_weights(const Matrix& z, double width);

struct LocalModel {
  std::vector<double> coefficients;
  double intercept = 0.0;
  double r2 = 0.0;
};

// Weighted ridge regression with an unpenalized intercept, solved through
// the normal equations by Cholesky. Throws SingularSystem when the normal
// matrix is not positive definite.
LocalModel fit_local_model(const Matrix& z, std::span<const double> y, std::span<const double> w,
                           double lambda);

struct ExplanationTerm {
  Condition condition;
  double weight = 0.0;
};

struct Explanation {
  std::string row_id;
  double predicted_probability = 0.0;
  int predicted_label = 0;
  int true_label = 0;
  std::vector<ExplanationTerm> terms;  // by |weight| descending
  double intercept = 0.0;
  double surrogate_r2 = 0.0;

  nlohmann::json to_json() const;
};

// Explains table row `row` with config.seed used as-is.
Explanation explain(const Predictor& predictor, const Discretizer& disc, const LabeledTable& table,
                    size_t row, const LimeConfig& config, double threshold = 0.5);

// Per-instance seed: base_seed XOR FNV-1a(row_id).
uint64_t instance_seed(uint64_t base_seed, std::string_view row_id);

}  // namespace blindspot
