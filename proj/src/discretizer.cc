#include "blindspot/discretizer.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "blindspot/error.h"

namespace blindspot {

double percentile_linear(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw Error(ErrorKind::kEmptyTable, "percentile of no values");
  const double rank = static_cast<double>(sorted.size() - 1) * q;
  const size_t lo = static_cast<size_t>(std::floor(rank));
  const size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = rank - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

size_t FeatureBins::bin_of(double value) const {
  return static_cast<size_t>(std::lower_bound(edges.begin(), edges.end(), value) - edges.begin());
}

Discretizer Discretizer::fit(const LabeledTable& train) {
  if (train.empty()) throw Error(ErrorKind::kEmptyTable, "cannot fit a discretizer on no rows");
  Discretizer disc;
  disc.schema_ = train.schema();
  const double n = static_cast<double>(train.n_rows());

  for (size_t j = 0; j < train.n_features(); ++j) {
    FeatureBins fb;
    fb.name = train.schema()[j].name;
    fb.kind = train.schema()[j].kind;

    if (fb.kind == FeatureKind::kCategorical) {
      std::map<std::string, size_t> counts;
      for (const auto& c : train.category_column(j)) ++counts[c];
      for (const auto& [category, count] : counts) {
        fb.categories.push_back(category);
        fb.category_frequencies.push_back(static_cast<double>(count) / n);
      }
      disc.features_.push_back(std::move(fb));
      continue;
    }

    const auto column = train.numeric_column(j);
    std::vector<double> sorted(column.begin(), column.end());
    std::sort(sorted.begin(), sorted.end());
    // A constant column gets no edges: one bin covering the real line.
    if (sorted.front() < sorted.back()) {
      for (double q : {0.25, 0.5, 0.75}) {
        const double edge = percentile_linear(sorted, q);
        if (fb.edges.empty() || edge > fb.edges.back()) fb.edges.push_back(edge);
      }
    }

    std::vector<std::vector<double>> members(fb.edges.size() + 1);
    for (double v : column) members[fb.bin_of(v)].push_back(v);
    for (size_t b = 0; b < members.size(); ++b) {
      BinStats stats;
      const auto& vs = members[b];
      stats.count = vs.size();
      stats.frequency = static_cast<double>(vs.size()) / n;
      if (vs.empty()) {
        // Never drawn (frequency 0); pin the stats to the nearest edge.
        const double anchor = b < fb.edges.size() ? fb.edges[b] : fb.edges.back();
        stats.mean = stats.min = stats.max = anchor;
      } else {
        double sum = 0.0;
        for (double v : vs) sum += v;
        stats.mean = sum / static_cast<double>(vs.size());
        double ss = 0.0;
        for (double v : vs) ss += (v - stats.mean) * (v - stats.mean);
        stats.std = std::sqrt(ss / static_cast<double>(vs.size()));
        const auto [mn, mx] = std::minmax_element(vs.begin(), vs.end());
        stats.min = *mn;
        stats.max = *mx;
      }
      fb.bins.push_back(stats);
    }
    disc.features_.push_back(std::move(fb));
  }
  return disc;
}

Condition Discretizer::condition_for(std::string_view feature, const Cell& value) const {
  for (size_t j = 0; j < features_.size(); ++j) {
    if (features_[j].name == feature) return condition_for(j, value);
  }
  throw Error(ErrorKind::kUnknownFeature, std::string(feature));
}

Condition Discretizer::condition_for(size_t feature, const Cell& value) const {
  if (feature >= features_.size()) {
    throw Error(ErrorKind::kUnknownFeature, "feature index " + std::to_string(feature));
  }
  const FeatureBins& fb = features_[feature];
  if (fb.kind == FeatureKind::kCategorical) {
    const auto* category = std::get_if<std::string>(&value);
    if (!category) throw Error(ErrorKind::kInvalidArgument, "'" + fb.name + "' expects a category");
    return Condition::equals(fb.name, *category);
  }
  const auto* x = std::get_if<double>(&value);
  if (!x) throw Error(ErrorKind::kInvalidArgument, "'" + fb.name + "' expects a real value");
  if (fb.edges.empty()) {
    // Single bin: the whole real line. Expressed as <= +inf so it still holds.
    return Condition::less_eq(fb.name, std::numeric_limits<double>::infinity());
  }
  const size_t bin = fb.bin_of(*x);
  if (bin == 0) return Condition::less_eq(fb.name, fb.edges.front());
  if (bin == fb.edges.size()) return Condition::greater(fb.name, fb.edges.back());
  return Condition::in_range(fb.name, fb.edges[bin - 1], fb.edges[bin]);
}

}  // namespace blindspot
