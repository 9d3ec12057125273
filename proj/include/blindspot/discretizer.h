#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "blindspot/condition.h"
#include "blindspot/table.h"

namespace blindspot {

// Percentile of sorted values with linear interpolation at rank (n-1)*q.
double percentile_linear(std::span<const double> sorted, double q);

struct BinStats {
  double mean = 0.0;
  double std = 0.0;  // population
  double min = 0.0;
  double max = 0.0;
  double frequency = 0.0;
  size_t count = 0;
};

struct FeatureBins {
  std::string name;
  FeatureKind kind = FeatureKind::kContinuous;

  // Continuous: strictly increasing edges; bin i holds e[i-1] < v <= e[i].
  std::vector<double> edges;
  std::vector<BinStats> bins;  // edges.size() + 1 entries

  // Categorical: sorted categories seen in training, with frequencies.
  std::vector<std::string> categories;
  std::vector<double> category_frequencies;

  size_t bin_of(double value) const;
  size_t n_bins() const { return kind == FeatureKind::kContinuous ? bins.size() : categories.size(); }
};

// Quartile discretizer for LIME: edges at the 25/50/75th percentiles of
// the training values with duplicates merged.
class Discretizer {
 public:
  // Throws EmptyTable.
  static Discretizer fit(const LabeledTable& train);

  const Schema& schema() const { return schema_; }
  const std::vector<FeatureBins>& features() const { return features_; }
  const FeatureBins& feature(size_t index) const { return features_[index]; }

  // Throws UnknownFeature.
  Condition condition_for(std::string_view feature, const Cell& value) const;
  Condition condition_for(size_t feature, const Cell& value) const;

 private:
  Schema schema_;
  std::vector<FeatureBins> features_;
};

inline Discretizer fit_discretizer(const LabeledTable& train) { return Discretizer::fit(train); }

}  // namespace blindspot
