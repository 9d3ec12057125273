#include "blindspot/lime.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "blindspot/error.h"
#include "blindspot/random.h"

namespace blindspot {

void LimeConfig::validate() const {
  if (n_samples < 2) throw Error(ErrorKind::kInvalidArgument, "n_samples must be at least 2");
  if (kernel_width && !(*kernel_width > 0.0 && std::isfinite(*kernel_width))) {
    throw Error(ErrorKind::kInvalidArgument, "kernel_width must be a positive real");
  }
  if (!(ridge_lambda >= 0.0) || !std::isfinite(ridge_lambda)) {
    throw Error(ErrorKind::kInvalidArgument, "ridge_lambda must be a non-negative real");
  }
  if (top_k == 0) throw Error(ErrorKind::kInvalidArgument, "top_k must be positive");
}

double LimeConfig::resolved_kernel_width(size_t n_features) const {
  return kernel_width ? *kernel_width : 0.75 * std::sqrt(static_cast<double>(n_features));
}

uint64_t instance_seed(uint64_t base_seed, std::string_view row_id) {
  return base_seed ^ fnv1a64(row_id);
}

Perturbations sample_perturbations(const Discretizer& disc, const LabeledTable& table, size_t row,
                                   size_t n, uint64_t seed) {
  if (n < 2) throw Error(ErrorKind::kInvalidArgument, "need at least 2 perturbation samples");
  if (table.schema() != disc.schema()) {
    throw Error(ErrorKind::kSchemaMismatch, "instance schema differs from the discretizer's");
  }
  const size_t d = table.n_features();
  const auto& features = disc.features();

  std::vector<size_t> instance_bin(d, 0);
  for (size_t j = 0; j < d; ++j) {
    if (features[j].kind == FeatureKind::kContinuous) {
      instance_bin[j] = features[j].bin_of(table.numeric(row, j));
    }
  }
  std::vector<std::vector<double>> bin_weights(d);
  for (size_t j = 0; j < d; ++j) {
    const auto& fb = features[j];
    if (fb.kind == FeatureKind::kContinuous) {
      for (const auto& b : fb.bins) bin_weights[j].push_back(b.frequency);
    } else {
      bin_weights[j] = fb.category_frequencies;
    }
  }

  Perturbations out{Matrix(n, d, 1.0), LabeledTable(table.schema())};
  out.x.reserve(n);
  const std::string& id = table.row_ids()[row];
  out.x.add_row(table.row(row), table.labels()[row], id);

  Rng rng(seed);
  std::vector<Cell> cells(d);
  for (size_t s = 1; s < n; ++s) {
    for (size_t j = 0; j < d; ++j) {
      const auto& fb = features[j];
      const size_t pick = rng.categorical(bin_weights[j]);
      if (fb.kind == FeatureKind::kContinuous) {
        const BinStats& b = fb.bins[pick];
        double value = b.mean;
        if (b.std > 0.0) value = std::clamp(b.mean + b.std * rng.normal(), b.min, b.max);
        cells[j] = value;
        out.z(s, j) = pick == instance_bin[j] ? 1.0 : 0.0;
      } else {
        cells[j] = fb.categories[pick];
        out.z(s, j) = fb.categories[pick] == table.category(row, j) ? 1.0 : 0.0;
      }
    }
    out.x.add_row(cells, table.labels()[row], id + "#" + std::to_string(s));
  }
  return out;
}

std::vector<double> kernel_weights(const Matrix& z, double width) {
  if (!(width > 0.0)) throw Error(ErrorKind::kInvalidArgument, "kernel width must be positive");
  std::vector<double> w(z.rows);
  const double inv = 1.0 / (width * width);
  for (size_t s = 0; s < z.rows; ++s) {
    double zeros = 0.0;
    for (size_t j = 0; j < z.cols; ++j) {
      const double diff = 1.0 - z(s, j);
      zeros += diff * diff;
    }
    w[s] = std::exp(-zeros * inv);
  }
  return w;
}

LocalModel fit_local_model(const Matrix& z, std::span<const double> y, std::span<const double> w,
                           double lambda) {
  if (y.size() != z.rows || w.size() != z.rows) {
    throw Error(ErrorKind::kInvalidArgument, "design, target and weight sizes disagree");
  }
  if (!(lambda >= 0.0)) throw Error(ErrorKind::kInvalidArgument, "ridge lambda must be non-negative");
  const double weight_sum = std::accumulate(w.begin(), w.end(), 0.0);
  if (!(weight_sum > 0.0)) throw Error(ErrorKind::kInvalidArgument, "weights must have positive sum");

  // Augmented system: index 0 is the intercept.
  const size_t m = z.cols + 1;
  Matrix a(m, m);
  std::vector<double> b(m, 0.0);
  std::vector<double> x(m);
  for (size_t s = 0; s < z.rows; ++s) {
    x[0] = 1.0;
    for (size_t j = 0; j < z.cols; ++j) x[j + 1] = z(s, j);
    for (size_t i = 0; i < m; ++i) {
      const double wx = w[s] * x[i];
      b[i] += wx * y[s];
      for (size_t k = 0; k <= i; ++k) a(i, k) += wx * x[k];
    }
  }
  for (size_t i = 1; i < m; ++i) a(i, i) += lambda;

  // Cholesky, lower triangle in place.
  double scale = 0.0;
  for (size_t i = 0; i < m; ++i) scale = std::max(scale, a(i, i));
  const double tolerance = 1e-12 * std::max(scale, 1e-300);
  for (size_t j = 0; j < m; ++j) {
    double diag = a(j, j);
    for (size_t k = 0; k < j; ++k) diag -= a(j, k) * a(j, k);
    if (!(diag > tolerance)) {
      throw Error(ErrorKind::kSingularSystem,
                  "normal equations are not positive definite (pivot " + std::to_string(j) + ")");
    }
    a(j, j) = std::sqrt(diag);
    for (size_t i = j + 1; i < m; ++i) {
      double v = a(i, j);
      for (size_t k = 0; k < j; ++k) v -= a(i, k) * a(j, k);
      a(i, j) = v / a(j, j);
    }
  }
  std::vector<double> beta(b);
  for (size_t i = 0; i < m; ++i) {
    for (size_t k = 0; k < i; ++k) beta[i] -= a(i, k) * beta[k];
    beta[i] /= a(i, i);
  }
  for (size_t i = m; i-- > 0;) {
    for (size_t k = i + 1; k < m; ++k) beta[i] -= a(k, i) * beta[k];
    beta[i] /= a(i, i);
  }

  LocalModel model;
  model.intercept = beta[0];
  model.coefficients.assign(beta.begin() + 1, beta.end());

  double mean = 0.0;
  for (size_t s = 0; s < z.rows; ++s) mean += w[s] * y[s];
  mean /= weight_sum;
  double ss_res = 0.0, ss_tot = 0.0;
  for (size_t s = 0; s < z.rows; ++s) {
    double fit = model.intercept;
    for (size_t j = 0; j < z.cols; ++j) fit += model.coefficients[j] * z(s, j);
    ss_res += w[s] * (y[s] - fit) * (y[s] - fit);
    ss_tot += w[s] * (y[s] - mean) * (y[s] - mean);
  }
  model.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  return model;
}

nlohmann::json Explanation::to_json() const {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& term : terms) list.push_back({term.condition.text(), term.weight});
  return {{"row_id", row_id},
          {"predicted_probability", predicted_probability},
          {"predicted_label", predicted_label},
          {"true_label", true_label},
          {"intercept", intercept},
          {"surrogate_r2", surrogate_r2},
          {"terms", std::move(list)}};
}

Explanation explain(const Predictor& predictor, const Discretizer& disc, const LabeledTable& table,
                    size_t row, const LimeConfig& config, double threshold) {
  config.validate();
  if (row >= table.n_rows()) throw Error(ErrorKind::kInvalidArgument, "row index out of range");
  const size_t d = table.n_features();

  const Perturbations samples = sample_perturbations(disc, table, row, config.n_samples, config.seed);
  const std::vector<double> y = predictor.predict_proba(samples.x);
  const std::vector<double> w = kernel_weights(samples.z, config.resolved_kernel_width(d));
  const LocalModel fit = fit_local_model(samples.z, y, w, config.ridge_lambda);

  std::vector<size_t> order(d);
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return std::abs(fit.coefficients[a]) > std::abs(fit.coefficients[b]);
  });

  Explanation out;
  out.row_id = table.row_ids()[row];
  out.predicted_probability = y[0];
  out.predicted_label = predicted_label(y[0], threshold);
  out.true_label = table.labels()[row];
  out.intercept = fit.intercept;
  out.surrogate_r2 = fit.r2;
  const size_t k = std::min(config.top_k, d);
  for (size_t i = 0; i < k; ++i) {
    const size_t j = order[i];
    if (!std::isfinite(fit.coefficients[j])) {
      throw Error(ErrorKind::kSingularSystem, "non-finite surrogate coefficient");
    }
    out.terms.push_back({disc.condition_for(j, table.cell(row, j)), fit.coefficients[j]});
  }
  return out;
}

}  // namespace blindspot
