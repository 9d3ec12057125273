#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "blindspot/predictor.h"
#include "blindspot/table.h"

namespace blindspot {

struct GbdtParams {
  size_t rounds = 100;
  size_t max_depth = 4;
  double learning_rate = 0.1;
  size_t min_leaf_count = 5;
  double l2 = 1.0;
  // Recorded with the model. Exact greedy training draws no random numbers.
  uint64_t seed = 0;

  void validate() const;
};

nlohmann::json gbdt_params_to_json(const GbdtParams& params);
GbdtParams gbdt_params_from_json(const nlohmann::json& json);

struct TreeNode {
  int feature = -1;  // -1 marks a leaf
  bool categorical = false;
  double threshold = 0.0;  // continuous: value <= threshold routes left
  std::string category;    // categorical: value == category routes left
  int left = -1;
  int right = -1;
  double value = 0.0;  // leaf output before shrinkage

  bool is_leaf() const { return feature < 0; }
};

struct Tree {
  std::vector<TreeNode> nodes;  // nodes[0] is the root
  size_t max_depth = 0;

  size_t leaf_for(const LabeledTable& table, size_t row) const;
  double value_for(const LabeledTable& table, size_t row) const {
    return nodes[leaf_for(table, row)].value;
  }
  // Longest root-to-leaf path, in edges.
  size_t depth() const;
  // Checks node indices, acyclicity, kinds and the depth bound.
  void validate(const Schema& schema) const;
};

double sigmoid(double logit);

// Mean binary cross-entropy; probabilities are clamped away from 0 and 1.
double mean_logistic_loss(std::span<const double> probabilities, std::span<const int> labels);

// Additive tree ensemble: p = sigmoid(base_score + learning_rate * sum of leaves).
class GbdtModel final : public Predictor {
 public:
  GbdtModel(Schema schema, double base_score, GbdtParams params, std::vector<Tree> trees);

  std::vector<double> predict_proba(const LabeledTable& rows) const override;
  double raw_score(const LabeledTable& rows, size_t row) const;

  const Schema& schema() const { return schema_; }
  double base_score() const { return base_score_; }
  double learning_rate() const { return params_.learning_rate; }
  const GbdtParams& params() const { return params_; }
  const std::vector<Tree>& trees() const { return trees_; }
  std::string schema_fingerprint() const;

  nlohmann::json to_json() const;
  static GbdtModel from_json(const nlohmann::json& json);

 private:
  Schema schema_;
  double base_score_;
  GbdtParams params_;
  std::vector<Tree> trees_;
};

// Newton boosting on logistic loss with exact greedy splits.
//
// The base score is the logit of the training base rate clipped to
// [1e-6, 1 - 1e-6]. If `loss_trace` is given it receives the mean training
// loss before the first round and after every round (rounds + 1 values).
// Throws EmptyTable.
GbdtModel train_gbdt(const LabeledTable& train, const GbdtParams& params,
                     std::vector<double>* loss_trace = nullptr);

}  // namespace blindspot
