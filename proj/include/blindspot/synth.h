#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "blindspot/table.h"

namespace blindspot {

// Half-open interval (lo, hi]; infinite bounds leave a side open.
struct Interval {
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();

  bool contains(double x) const { return lo < x && x <= hi; }
};

// Synthetic data with a planted region of label noise.
//
// Features f0..f{d-1} are uniform on their ranges, the clean label is
// 1 iff coefficients . x > bias, and inside the planted box labels are
// flipped with probability flip_rate.
struct SynthSpec {
  size_t n_rows = 5000;
  std::vector<Interval> ranges;  // one per feature; d = ranges.size()
  std::vector<double> coefficients;
  double bias = 0.0;
  std::vector<Interval> box;  // one per feature
  double flip_rate = 0.4;
  uint64_t seed = 0;

  // d features on [0, 1], all coefficients 1, bias d/2, box = top quartile
  // of f0.
  static SynthSpec planted_quartile(size_t n_rows, size_t d, double flip_rate, uint64_t seed);

  // Throws InvalidSpec.
  void validate() const;
};

struct GroundTruth {
  std::vector<Interval> box;
  std::vector<std::string> flipped_row_ids;
  std::vector<char> in_box;   // per row
  std::vector<char> flipped;  // per row

  nlohmann::json to_json(const std::vector<std::string>& feature_names) const;
};

struct SynthData {
  LabeledTable table;
  GroundTruth truth;
};

SynthData generate(const SynthSpec& spec);

// Clean label of the linear concept.
int linear_label(const SynthSpec& spec, std::span<const double> x);

nlohmann::json synth_spec_to_json(const SynthSpec& spec);

}  // namespace blindspot
