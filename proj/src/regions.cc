#include "blindspot/regions.h"

#include <algorithm>
#include <atomic>
#include <exception>
#include <optional>
#include <map>
#include <set>
#include <thread>

#include "blindspot/error.h"

namespace blindspot {

std::string_view split_tag_name(SplitTag tag) { return tag == SplitTag::kTrain ? "train" : "test"; }

SplitTag parse_split_tag(std::string_view name) {
  if (name == "train") return SplitTag::kTrain;
  if (name == "test") return SplitTag::kTest;
  throw Error(ErrorKind::kInvalidArgument, "split tag must be 'train' or 'test'");
}

void RegionConfig::validate() const {
  lime.validate();
  if (!(min_support_fraction > 0.0 && min_support_fraction <= 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "min_support_fraction must lie in (0, 1]");
  }
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "threshold must lie in [0, 1]");
  }
}

nlohmann::json ConditionStats::to_json() const {
  return {{"condition", condition.to_json()},
          {"support", support},
          {"support_fraction", support_fraction},
          {"coverage", coverage},
          {"errors_in_region", errors_in_region},
          {"error_rate", error_rate}};
}

ConditionStats ConditionStats::from_json(const nlohmann::json& json) {
  ConditionStats s{Condition::from_json(json.at("condition"))};
  s.support = json.at("support").get<size_t>();
  s.support_fraction = json.at("support_fraction").get<double>();
  s.coverage = json.at("coverage").get<size_t>();
  s.errors_in_region = json.at("errors_in_region").get<size_t>();
  s.error_rate = json.at("error_rate").get<double>();
  s.empty = s.coverage == 0;
  return s;
}

nlohmann::json RegionReport::to_json() const {
  nlohmann::json list = nlohmann::json::array();
  for (const auto& r : regions) list.push_back(r.to_json());
  nlohmann::json out{{"split", split_tag_name(split)},
                     {"baseline_error_rate", baseline_error_rate},
                     {"n_total", n_total},
                     {"n_misclassified", n_misclassified},
                     {"regions", std::move(list)},
                     {"config",
                      {{"top_k", top_k},
                       {"min_support_fraction", min_support_fraction},
                       {"threshold", threshold},
                       {"lime_seed", lime_seed},
                       {"n_samples", n_samples},
                       {"kernel_width", kernel_width},
                       {"ridge_lambda", ridge_lambda}}}};
  if (!run_config.is_null()) out["run_config"] = run_config;
  return out;
}

RegionReport RegionReport::from_json(const nlohmann::json& json) {
  try {
    RegionReport r;
    r.split = parse_split_tag(json.at("split").get<std::string>());
    r.baseline_error_rate = json.at("baseline_error_rate").get<double>();
    r.n_total = json.at("n_total").get<size_t>();
    r.n_misclassified = json.at("n_misclassified").get<size_t>();
    for (const auto& j : json.at("regions")) r.regions.push_back(ConditionStats::from_json(j));
    const auto& c = json.at("config");
    r.top_k = c.at("top_k").get<size_t>();
    r.min_support_fraction = c.at("min_support_fraction").get<double>();
    r.threshold = c.at("threshold").get<double>();
    r.lime_seed = c.at("lime_seed").get<uint64_t>();
    r.n_samples = c.at("n_samples").get<size_t>();
    r.kernel_width = c.at("kernel_width").get<double>();
    r.ridge_lambda = c.at("ridge_lambda").get<double>();
    if (json.contains("run_config")) r.run_config = json.at("run_config");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kFormatError, std::string("malformed report JSON: ") + e.what());
  }
}

bool RegionReport::operator==(const RegionReport& o) const {
  auto same_region = [](const ConditionStats& a, const ConditionStats& b) {
    return a.condition == b.condition && a.support == b.support &&
           a.support_fraction == b.support_fraction && a.coverage == b.coverage &&
           a.errors_in_region == b.errors_in_region && a.error_rate == b.error_rate &&
           a.empty == b.empty;
  };
  return split == o.split && baseline_error_rate == o.baseline_error_rate && n_total == o.n_total &&
         n_misclassified == o.n_misclassified &&
         std::equal(regions.begin(), regions.end(), o.regions.begin(), o.regions.end(), same_region) &&
         top_k == o.top_k && min_support_fraction == o.min_support_fraction &&
         threshold == o.threshold && lime_seed == o.lime_seed && n_samples == o.n_samples &&
         kernel_width == o.kernel_width && ridge_lambda == o.ridge_lambda && run_config == o.run_config;
}

MisclassifiedSet find_misclassified(std::span<const double> probabilities, const LabeledTable& table,
                                    double threshold, SplitTag split) {
  if (probabilities.size() != table.n_rows()) {
    throw Error(ErrorKind::kInvalidArgument, "one probability per row required");
  }
  MisclassifiedSet mis;
  mis.split = split;
  mis.threshold = threshold;
  for (size_t r = 0; r < table.n_rows(); ++r) {
    if (predicted_label(probabilities[r], threshold) != table.labels()[r]) {
      mis.rows.push_back(r);
      mis.row_ids.push_back(table.row_ids()[r]);
    }
  }
  return mis;
}

MisclassifiedSet find_misclassified(const Predictor& predictor, const LabeledTable& table,
                                    double threshold, SplitTag split) {
  if (table.empty()) throw Error(ErrorKind::kEmptyTable, "no rows to check");
  return find_misclassified(predictor.predict_proba(table), table, threshold, split);
}

std::vector<Explanation> explain_misclassified(const Predictor& predictor, const Discretizer& disc,
                                               const LabeledTable& table, const MisclassifiedSet& mis,
                                               const LimeConfig& config, size_t n_threads) {
  config.validate();
  std::vector<size_t> rows = mis.rows;
  if (rows.size() != mis.row_ids.size()) {
    rows.clear();
    for (const auto& id : mis.row_ids) {
      const auto r = table.find_row(id);
      if (!r) throw Error(ErrorKind::kMissingRowId, id);
      rows.push_back(*r);
    }
  }

  std::vector<std::optional<Explanation>> slots(rows.size());
  auto explain_one = [&](size_t i) {
    LimeConfig local = config;
    local.seed = instance_seed(config.seed, table.row_ids()[rows[i]]);
    slots[i] = explain(predictor, disc, table, rows[i], local, mis.threshold);
  };

  if (n_threads == 0) n_threads = std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min(n_threads, std::max<size_t>(rows.size(), 1));
  if (n_threads <= 1) {
    for (size_t i = 0; i < rows.size(); ++i) explain_one(i);
  } else {
    std::atomic<size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    std::vector<std::thread> workers;
    for (size_t t = 0; t < n_threads; ++t) {
      workers.emplace_back([&] {
        for (size_t i = next++; i < rows.size() && !failed; i = next++) {
          try {
            explain_one(i);
          } catch (...) {
            if (!failed.exchange(true)) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& w : workers) w.join();
    if (failure) std::rethrow_exception(failure);
  }

  std::vector<Explanation> out;
  out.reserve(slots.size());
  for (auto& slot : slots) out.push_back(std::move(*slot));
  return out;
}

std::vector<MinedCondition> mine_conditions(const std::vector<Explanation>& explanations,
                                            double min_support_fraction) {
  if (explanations.empty()) throw Error(ErrorKind::kNoExplanations, "nothing to mine");
  if (!(min_support_fraction > 0.0 && min_support_fraction <= 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "min_support_fraction must lie in (0, 1]");
  }
  std::map<std::string, MinedCondition> counts;
  for (const auto& e : explanations) {
    std::set<std::string> seen;
    for (const auto& term : e.terms) {
      if (!seen.insert(term.condition.text()).second) continue;
      auto it = counts.try_emplace(term.condition.text(), MinedCondition{term.condition, 0}).first;
      ++it->second.support;
    }
  }
  const double total = static_cast<double>(explanations.size());
  std::vector<MinedCondition> out;
  for (auto& [text, mined] : counts) {
    if (static_cast<double>(mined.support) / total >= min_support_fraction) out.push_back(mined);
  }
  std::stable_sort(out.begin(), out.end(), [](const MinedCondition& a, const MinedCondition& b) {
    if (a.support != b.support) return a.support > b.support;
    return a.condition.text() < b.condition.text();
  });
  return out;
}

ConditionStats region_error_rate(const Condition& condition, const LabeledTable& table,
                                 std::span<const char> misclassified) {
  const auto j = table.feature_index(condition.feature());
  if (!j) throw Error(ErrorKind::kUnknownFeature, condition.feature());
  ConditionStats stats{condition};
  for (size_t r = 0; r < table.n_rows(); ++r) {
    if (!condition.holds(table.cell(r, *j))) continue;
    ++stats.coverage;
    if (misclassified[r]) ++stats.errors_in_region;
  }
  stats.empty = stats.coverage == 0;
  stats.error_rate = stats.empty ? 0.0
                                 : static_cast<double>(stats.errors_in_region) /
                                       static_cast<double>(stats.coverage);
  return stats;
}

ConditionStats region_error_rate(const Condition& condition, const Predictor& predictor,
                                 const LabeledTable& table, double threshold) {
  if (!table.feature_index(condition.feature())) {
    throw Error(ErrorKind::kUnknownFeature, condition.feature());
  }
  const auto mis = find_misclassified(predictor, table, threshold);
  std::vector<char> flags(table.n_rows(), 0);
  for (size_t r : mis.rows) flags[r] = 1;
  return region_error_rate(condition, table, flags);
}

RegionAnalysis analyze_split(const Predictor& predictor, const Discretizer& disc,
                             const LabeledTable& table, SplitTag split, const RegionConfig& config) {
  config.validate();
  if (table.empty()) throw Error(ErrorKind::kEmptyTable, "no rows to analyze");

  RegionAnalysis out;
  out.misclassified = find_misclassified(predictor, table, config.threshold, split);
  const auto& mis = out.misclassified;

  RegionReport& report = out.report;
  report.split = split;
  report.n_total = table.n_rows();
  report.n_misclassified = mis.size();
  report.baseline_error_rate =
      static_cast<double>(mis.size()) / static_cast<double>(table.n_rows());
  report.top_k = config.lime.top_k;
  report.min_support_fraction = config.min_support_fraction;
  report.threshold = config.threshold;
  report.lime_seed = config.lime.seed;
  report.n_samples = config.lime.n_samples;
  report.kernel_width = config.lime.resolved_kernel_width(table.n_features());
  report.ridge_lambda = config.lime.ridge_lambda;
  if (mis.size() == 0) return out;

  out.explanations = explain_misclassified(predictor, disc, table, mis, config.lime, config.n_threads);
  const auto mined = mine_conditions(out.explanations, config.min_support_fraction);

  std::vector<char> flags(table.n_rows(), 0);
  for (size_t r : mis.rows) flags[r] = 1;
  for (const auto& m : mined) {
    ConditionStats stats = region_error_rate(m.condition, table, flags);
    if (stats.empty) continue;
    stats.support = m.support;
    stats.support_fraction = static_cast<double>(m.support) / static_cast<double>(mis.size());
    report.regions.push_back(std::move(stats));
  }
  std::sort(report.regions.begin(), report.regions.end(),
            [](const ConditionStats& a, const ConditionStats& b) {
              if (a.error_rate != b.error_rate) return a.error_rate > b.error_rate;
              if (a.coverage != b.coverage) return a.coverage > b.coverage;
              return a.condition.text() < b.condition.text();
            });
  return out;
}

}  // namespace blindspot
