#include "blindspot/synth.h"

#include <cmath>

#include "blindspot/error.h"
#include "blindspot/random.h"

namespace blindspot {
namespace {

nlohmann::json bound_json(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(); }

nlohmann::json interval_json(const Interval& iv) {
  return {{"lo", bound_json(iv.lo)}, {"hi", bound_json(iv.hi)}};
}

}  // namespace

SynthSpec SynthSpec::planted_quartile(size_t n_rows, size_t d, double flip_rate, uint64_t seed) {
  SynthSpec spec;
  spec.n_rows = n_rows;
  spec.ranges.assign(d, Interval{0.0, 1.0});
  spec.coefficients.assign(d, 1.0);
  spec.bias = static_cast<double>(d) / 2.0;
  spec.box.assign(d, Interval{});
  if (d > 0) spec.box[0].lo = 0.75;
  spec.flip_rate = flip_rate;
  spec.seed = seed;
  return spec;
}

void SynthSpec::validate() const {
  auto fail = [](const std::string& why) { throw Error(ErrorKind::kInvalidSpec, why); };
  if (n_rows == 0) fail("n_rows must be positive");
  if (ranges.empty()) fail("at least one feature range required");
  if (coefficients.size() != ranges.size()) fail("one coefficient per feature required");
  if (box.size() != ranges.size()) fail("one box interval per feature required");
  if (!(flip_rate >= 0.0 && flip_rate <= 1.0)) fail("flip_rate must lie in [0, 1]");
  if (!std::isfinite(bias)) fail("bias must be finite");
  for (size_t j = 0; j < ranges.size(); ++j) {
    const auto& r = ranges[j];
    if (!(std::isfinite(r.lo) && std::isfinite(r.hi) && r.lo < r.hi)) {
      fail("range of f" + std::to_string(j) + " must be finite with lo < hi");
    }
    if (!std::isfinite(coefficients[j])) fail("coefficients must be finite");
    const auto& b = box[j];
    if (!(b.lo < b.hi)) fail("box interval of f" + std::to_string(j) + " is empty");
    if (!(b.lo < r.hi && b.hi > r.lo)) fail("box does not intersect the range of f" + std::to_string(j));
  }
}

int linear_label(const SynthSpec& spec, std::span<const double> x) {
  double s = 0.0;
  for (size_t j = 0; j < x.size(); ++j) s += spec.coefficients[j] * x[j];
  return s - spec.bias > 0.0 ? 1 : 0;
}

SynthData generate(const SynthSpec& spec) {
  spec.validate();
  const size_t d = spec.ranges.size();
  Schema schema;
  for (size_t j = 0; j < d; ++j) schema.push_back({"f" + std::to_string(j), FeatureKind::kContinuous});

  SynthData out{LabeledTable(schema), GroundTruth{spec.box, {}, {}, {}}};
  out.table.reserve(spec.n_rows);
  Rng rng(spec.seed);
  std::vector<double> x(d);
  std::vector<Cell> cells(d);
  for (size_t r = 0; r < spec.n_rows; ++r) {
    bool inside = true;
    for (size_t j = 0; j < d; ++j) {
      const auto& range = spec.ranges[j];
      x[j] = range.lo + (range.hi - range.lo) * rng.uniform();
      cells[j] = x[j];
      inside = inside && spec.box[j].contains(x[j]);
    }
    // Always consume the flip draw so rows stay aligned across flip rates.
    const bool flip = rng.uniform() < spec.flip_rate && inside;
    int label = linear_label(spec, x);
    if (flip) label = 1 - label;
    const std::string id = std::to_string(r);
    out.table.add_row(cells, label, id);
    out.truth.in_box.push_back(inside ? 1 : 0);
    out.truth.flipped.push_back(flip ? 1 : 0);
    if (flip) out.truth.flipped_row_ids.push_back(id);
  }
  return out;
}

nlohmann::json GroundTruth::to_json(const std::vector<std::string>& feature_names) const {
  nlohmann::json intervals = nlohmann::json::array();
  for (size_t j = 0; j < box.size(); ++j) {
    auto iv = interval_json(box[j]);
    iv["feature"] = j < feature_names.size() ? feature_names[j] : "f" + std::to_string(j);
    intervals.push_back(std::move(iv));
  }
  size_t in_box_count = 0;
  for (char c : in_box) in_box_count += c != 0;
  return {{"box", std::move(intervals)},
          {"flipped_row_ids", flipped_row_ids},
          {"n_in_box", in_box_count},
          {"n_flipped", flipped_row_ids.size()}};
}

nlohmann::json synth_spec_to_json(const SynthSpec& spec) {
  nlohmann::json ranges = nlohmann::json::array();
  nlohmann::json box = nlohmann::json::array();
  for (const auto& r : spec.ranges) ranges.push_back(interval_json(r));
  for (const auto& b : spec.box) box.push_back(interval_json(b));
  return {{"n_rows", spec.n_rows},   {"ranges", std::move(ranges)},
          {"coefficients", spec.coefficients}, {"bias", spec.bias},
          {"box", std::move(box)},   {"flip_rate", spec.flip_rate},
          {"seed", spec.seed}};
}

}  // namespace blindspot
