#include "blindspot/gbdt.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <numeric>

#include "blindspot/error.h"
#include "blindspot/random.h"

namespace blindspot {
namespace {

constexpr double kBaseRateClip = 1e-6;

struct SplitChoice {
  double gain = 0.0;
  int feature = -1;
  bool categorical = false;
  double threshold = 0.0;
  std::string category;
};

double split_score(double g, double h, double l2) {
  const double denom = h + l2;
  return denom > 0.0 ? g * g / denom : 0.0;
}

class TreeBuilder {
 public:
  TreeBuilder(const LabeledTable& table, const GbdtParams& params,
              const std::vector<std::vector<size_t>>& sorted, std::span<const double> grad,
              std::span<const double> hess)
      : table_(table),
        params_(params),
        sorted_(sorted),
        grad_(grad),
        hess_(hess),
        in_node_(table.n_rows(), 0) {}

  Tree build() {
    tree_.max_depth = params_.max_depth;
    std::vector<size_t> rows(table_.n_rows());
    std::iota(rows.begin(), rows.end(), size_t{0});
    grow(rows, 0);
    return std::move(tree_);
  }

 private:
  int grow(const std::vector<size_t>& rows, size_t depth) {
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.emplace_back();

    double g = 0.0, h = 0.0;
    for (size_t r : rows) {
      g += grad_[r];
      h += hess_[r];
    }
    SplitChoice best;
    if (depth < params_.max_depth && rows.size() >= 2 * params_.min_leaf_count) {
      best = find_split(rows, g, h);
    }
    if (best.feature < 0) {
      const double denom = h + params_.l2;
      tree_.nodes[id].value = denom > 0.0 ? -g / denom : 0.0;
      return id;
    }

    std::vector<size_t> left, right;
    const size_t f = static_cast<size_t>(best.feature);
    for (size_t r : rows) {
      const bool goes_left = best.categorical ? table_.category(r, f) == best.category
                                              : table_.numeric(r, f) <= best.threshold;
      (goes_left ? left : right).push_back(r);
    }
    const int left_id = grow(left, depth + 1);
    const int right_id = grow(right, depth + 1);
    TreeNode& node = tree_.nodes[id];
    node.feature = best.feature;
    node.categorical = best.categorical;
    node.threshold = best.threshold;
    node.category = best.category;
    node.left = left_id;
    node.right = right_id;
    return id;
  }

  SplitChoice find_split(const std::vector<size_t>& rows, double g, double h) {
    const double l2 = params_.l2;
    const double parent = split_score(g, h, l2);
    const size_t min_leaf = std::max<size_t>(params_.min_leaf_count, 1);
    SplitChoice best;

    for (size_t r : rows) in_node_[r] = 1;
    for (size_t j = 0; j < table_.n_features(); ++j) {
      if (table_.schema()[j].kind == FeatureKind::kContinuous) {
        double gl = 0.0, hl = 0.0;
        size_t nl = 0;
        const auto& order = sorted_[j];
        const auto column = table_.numeric_column(j);
        size_t prev = SIZE_MAX;
        for (size_t r : order) {
          if (!in_node_[r]) continue;
          if (prev != SIZE_MAX && column[r] > column[prev] && nl >= min_leaf &&
              rows.size() - nl >= min_leaf) {
            const double gain =
                0.5 * (split_score(gl, hl, l2) + split_score(g - gl, h - hl, l2) - parent);
            if (gain > best.gain) {
              double threshold = column[prev] + (column[r] - column[prev]) / 2.0;
              if (!(threshold < column[r])) threshold = column[prev];
              best = {gain, static_cast<int>(j), false, threshold, {}};
            }
          }
          gl += grad_[r];
          hl += hess_[r];
          ++nl;
          prev = r;
        }
      } else {
        struct Sums {
          double g = 0.0, h = 0.0;
          size_t n = 0;
        };
        std::map<std::string, Sums> per_category;
        for (size_t r : rows) {
          auto& s = per_category[table_.category(r, j)];
          s.g += grad_[r];
          s.h += hess_[r];
          ++s.n;
        }
        if (per_category.size() < 2) continue;
        for (const auto& [category, s] : per_category) {
          if (s.n < min_leaf || rows.size() - s.n < min_leaf) continue;
          const double gain =
              0.5 * (split_score(s.g, s.h, l2) + split_score(g - s.g, h - s.h, l2) - parent);
          if (gain > best.gain) best = {gain, static_cast<int>(j), true, 0.0, category};
        }
      }
    }
    for (size_t r : rows) in_node_[r] = 0;
    return best;
  }

  const LabeledTable& table_;
  const GbdtParams& params_;
  const std::vector<std::vector<size_t>>& sorted_;
  std::span<const double> grad_;
  std::span<const double> hess_;
  std::vector<char> in_node_;
  Tree tree_;
};

std::string hex64(uint64_t v) {
  char buffer[17];
  std::snprintf(buffer, sizeof buffer, "%016llx", static_cast<unsigned long long>(v));
  return buffer;
}

}  // namespace

void GbdtParams::validate() const {
  if (!(learning_rate > 0.0 && learning_rate <= 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "learning_rate must lie in (0, 1]");
  }
  if (!(l2 >= 0.0) || !std::isfinite(l2)) {
    throw Error(ErrorKind::kInvalidArgument, "l2 must be a non-negative real");
  }
  if (min_leaf_count == 0) throw Error(ErrorKind::kInvalidArgument, "min_leaf_count must be positive");
}

nlohmann::json gbdt_params_to_json(const GbdtParams& p) {
  return {{"rounds", p.rounds},
          {"max_depth", p.max_depth},
          {"learning_rate", p.learning_rate},
          {"min_leaf_count", p.min_leaf_count},
          {"l2", p.l2},
          {"seed", p.seed}};
}

GbdtParams gbdt_params_from_json(const nlohmann::json& json) {
  GbdtParams p;
  p.rounds = json.at("rounds").get<size_t>();
  p.max_depth = json.at("max_depth").get<size_t>();
  p.learning_rate = json.at("learning_rate").get<double>();
  p.min_leaf_count = json.at("min_leaf_count").get<size_t>();
  p.l2 = json.at("l2").get<double>();
  p.seed = json.at("seed").get<uint64_t>();
  p.validate();
  return p;
}

size_t Tree::leaf_for(const LabeledTable& table, size_t row) const {
  size_t id = 0;
  while (!nodes[id].is_leaf()) {
    const TreeNode& node = nodes[id];
    const size_t f = static_cast<size_t>(node.feature);
    const bool left = node.categorical ? table.category(row, f) == node.category
                                       : table.numeric(row, f) <= node.threshold;
    id = static_cast<size_t>(left ? node.left : node.right);
  }
  return id;
}

size_t Tree::depth() const {
  size_t deepest = 0;
  std::vector<std::pair<size_t, size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [id, d] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, d);
    if (!nodes[id].is_leaf()) {
      stack.emplace_back(static_cast<size_t>(nodes[id].left), d + 1);
      stack.emplace_back(static_cast<size_t>(nodes[id].right), d + 1);
    }
  }
  return deepest;
}

void Tree::validate(const Schema& schema) const {
  if (nodes.empty()) throw Error(ErrorKind::kFormatError, "tree has no nodes");
  std::vector<int> seen(nodes.size(), 0);
  std::vector<std::pair<size_t, size_t>> stack{{0, 0}};
  while (!stack.empty()) {
    auto [id, d] = stack.back();
    stack.pop_back();
    if (seen[id]++) throw Error(ErrorKind::kFormatError, "tree node reached twice");
    if (d > max_depth) throw Error(ErrorKind::kFormatError, "tree exceeds its depth bound");
    const TreeNode& node = nodes[id];
    if (node.is_leaf()) {
      if (!std::isfinite(node.value)) throw Error(ErrorKind::kFormatError, "non-finite leaf value");
      continue;
    }
    if (static_cast<size_t>(node.feature) >= schema.size()) {
      throw Error(ErrorKind::kFormatError, "tree node feature index out of range");
    }
    const bool cat = schema[static_cast<size_t>(node.feature)].kind == FeatureKind::kCategorical;
    if (cat != node.categorical) throw Error(ErrorKind::kFormatError, "tree node kind mismatch");
    for (int child : {node.left, node.right}) {
      if (child <= 0 || static_cast<size_t>(child) >= nodes.size()) {
        throw Error(ErrorKind::kFormatError, "tree child index out of range");
      }
      stack.emplace_back(static_cast<size_t>(child), d + 1);
    }
  }
  if (std::count(seen.begin(), seen.end(), 0) != 0) {
    throw Error(ErrorKind::kFormatError, "tree has unreachable nodes");
  }
}

double sigmoid(double logit) {
  constexpr double kLow = 1e-16;
  constexpr double kHigh = 1.0 - 0x1.0p-53;
  return std::clamp(1.0 / (1.0 + std::exp(-logit)), kLow, kHigh);
}

double mean_logistic_loss(std::span<const double> probabilities, std::span<const int> labels) {
  double total = 0.0;
  for (size_t i = 0; i < labels.size(); ++i) {
    const double p = std::clamp(probabilities[i], 1e-15, 1.0 - 1e-15);
    total -= labels[i] == 1 ? std::log(p) : std::log1p(-p);
  }
  return labels.empty() ? 0.0 : total / static_cast<double>(labels.size());
}

GbdtModel::GbdtModel(Schema schema, double base_score, GbdtParams params, std::vector<Tree> trees)
    : schema_(std::move(schema)),
      base_score_(base_score),
      params_(params),
      trees_(std::move(trees)) {
  validate_schema(schema_);
  params_.validate();
  if (!std::isfinite(base_score_)) throw Error(ErrorKind::kFormatError, "non-finite base score");
  if (trees_.size() != params_.rounds) {
    throw Error(ErrorKind::kFormatError, "tree count differs from configured rounds");
  }
  for (const auto& tree : trees_) tree.validate(schema_);
}

double GbdtModel::raw_score(const LabeledTable& rows, size_t row) const {
  double sum = 0.0;
  for (const auto& tree : trees_) sum += tree.value_for(rows, row);
  return base_score_ + params_.learning_rate * sum;
}

std::vector<double> GbdtModel::predict_proba(const LabeledTable& rows) const {
  if (rows.schema() != schema_) {
    throw Error(ErrorKind::kSchemaMismatch, "rows do not match the model schema " + schema_fingerprint());
  }
  std::vector<double> out(rows.n_rows());
  for (size_t r = 0; r < rows.n_rows(); ++r) out[r] = sigmoid(raw_score(rows, r));
  return out;
}

std::string GbdtModel::schema_fingerprint() const {
  std::string text;
  for (const auto& spec : schema_) {
    text += spec.name;
    text += ':';
    text += feature_kind_name(spec.kind);
    text += '\n';
  }
  return hex64(fnv1a64(text));
}

nlohmann::json GbdtModel::to_json() const {
  nlohmann::json schema = nlohmann::json::array();
  for (const auto& spec : schema_) {
    schema.push_back({{"name", spec.name}, {"kind", feature_kind_name(spec.kind)}});
  }
  nlohmann::json trees = nlohmann::json::array();
  for (const auto& tree : trees_) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& node : tree.nodes) {
      if (node.is_leaf()) {
        nodes.push_back({{"leaf", node.value}});
      } else if (node.categorical) {
        nodes.push_back({{"feature", node.feature}, {"category", node.category},
                         {"left", node.left}, {"right", node.right}});
      } else {
        nodes.push_back({{"feature", node.feature}, {"threshold", node.threshold},
                         {"left", node.left}, {"right", node.right}});
      }
    }
    trees.push_back({{"max_depth", tree.max_depth}, {"nodes", std::move(nodes)}});
  }
  return {{"format", "blindspot-gbdt-1"},
          {"base_score", base_score_},
          {"learning_rate", params_.learning_rate},
          {"params", gbdt_params_to_json(params_)},
          {"schema", std::move(schema)},
          {"schema_fingerprint", schema_fingerprint()},
          {"trees", std::move(trees)}};
}

GbdtModel GbdtModel::from_json(const nlohmann::json& json) {
  try {
    if (json.at("format") != "blindspot-gbdt-1") {
      throw Error(ErrorKind::kFormatError, "unsupported model format");
    }
    Schema schema;
    for (const auto& spec : json.at("schema")) {
      schema.push_back({spec.at("name").get<std::string>(),
                        parse_feature_kind(spec.at("kind").get<std::string>())});
    }
    GbdtParams params = gbdt_params_from_json(json.at("params"));
    if (json.at("learning_rate").get<double>() != params.learning_rate) {
      throw Error(ErrorKind::kFormatError, "learning_rate disagrees with params");
    }
    std::vector<Tree> trees;
    for (const auto& jt : json.at("trees")) {
      Tree tree;
      tree.max_depth = jt.at("max_depth").get<size_t>();
      for (const auto& jn : jt.at("nodes")) {
        TreeNode node;
        if (jn.contains("leaf")) {
          node.value = jn.at("leaf").get<double>();
        } else {
          node.feature = jn.at("feature").get<int>();
          node.left = jn.at("left").get<int>();
          node.right = jn.at("right").get<int>();
          if (jn.contains("category")) {
            node.categorical = true;
            node.category = jn.at("category").get<std::string>();
          } else {
            node.threshold = jn.at("threshold").get<double>();
          }
        }
        tree.nodes.push_back(std::move(node));
      }
      trees.push_back(std::move(tree));
    }
    GbdtModel model(std::move(schema), json.at("base_score").get<double>(), params, std::move(trees));
    if (json.contains("schema_fingerprint") &&
        json.at("schema_fingerprint").get<std::string>() != model.schema_fingerprint()) {
      throw Error(ErrorKind::kFormatError, "schema fingerprint mismatch");
    }
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kFormatError, std::string("malformed model JSON: ") + e.what());
  }
}

GbdtModel train_gbdt(const LabeledTable& train, const GbdtParams& params,
                     std::vector<double>* loss_trace) {
  params.validate();
  if (train.empty()) throw Error(ErrorKind::kEmptyTable, "cannot train on an empty table");
  const size_t n = train.n_rows();
  const auto labels = train.labels();

  double positives = 0.0;
  for (int y : labels) positives += y;
  const double base_rate = std::clamp(positives / static_cast<double>(n), kBaseRateClip, 1.0 - kBaseRateClip);
  const double base_score = std::log(base_rate / (1.0 - base_rate));

  // Row order per continuous feature, ties broken by row index.
  std::vector<std::vector<size_t>> sorted(train.n_features());
  for (size_t j = 0; j < train.n_features(); ++j) {
    if (train.schema()[j].kind != FeatureKind::kContinuous) continue;
    auto& order = sorted[j];
    order.resize(n);
    std::iota(order.begin(), order.end(), size_t{0});
    const auto column = train.numeric_column(j);
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return column[a] < column[b]; });
  }

  std::vector<double> scores(n, base_score), prob(n), grad(n), hess(n);
  auto refresh = [&] {
    for (size_t i = 0; i < n; ++i) prob[i] = sigmoid(scores[i]);
  };
  refresh();
  if (loss_trace) {
    loss_trace->clear();
    loss_trace->push_back(mean_logistic_loss(prob, labels));
  }

  std::vector<Tree> trees;
  trees.reserve(params.rounds);
  for (size_t round = 0; round < params.rounds; ++round) {
    for (size_t i = 0; i < n; ++i) {
      grad[i] = prob[i] - labels[i];
      hess[i] = prob[i] * (1.0 - prob[i]);
    }
    Tree tree = TreeBuilder(train, params, sorted, grad, hess).build();
    for (size_t i = 0; i < n; ++i) scores[i] += params.learning_rate * tree.value_for(train, i);
    refresh();
    if (loss_trace) loss_trace->push_back(mean_logistic_loss(prob, labels));
    trees.push_back(std::move(tree));
  }
  return GbdtModel(train.schema(), base_score, params, std::move(trees));
}

}  // namespace blindspot
