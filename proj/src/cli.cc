#include "blindspot/cli.h"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "blindspot/csv.h"
#include "blindspot/discretizer.h"
#include "blindspot/error.h"
#include "blindspot/format.h"
#include "blindspot/gbdt.h"
#include "blindspot/ingest.h"
#include "blindspot/lime.h"
#include "blindspot/predictor.h"
#include "blindspot/regions.h"
#include "blindspot/report.h"
#include "blindspot/synth.h"

namespace blindspot {
namespace {

using nlohmann::json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string config;
  std::string data;
  std::string train_data;
  std::string model;
  std::string predictions;
  std::string series;
  std::string out_dir = "out";
  std::string label_column = "label";
  std::string id_column = "row_id";
  std::vector<std::string> categorical;
  std::string split_tag = "test";

  uint64_t seed = 42;
  double split_fraction = 0.2;
  double threshold = 0.5;
  double min_support = 0.1;

  size_t n_samples = 5000;
  double kernel_width = 0.0;  // 0: 0.75 * sqrt(d)
  double ridge_lambda = 1.0;
  size_t top_k = 5;

  size_t rounds = 100;
  size_t max_depth = 4;
  double learning_rate = 0.1;
  size_t min_leaf_count = 5;
  double l2 = 1.0;

  size_t n_rows = 5000;
  size_t n_features = 6;
  double flip_rate = 0.4;
  double box_lo = 0.75;

  int64_t interval = 300;
  std::vector<size_t> windows{3, 6};
  std::vector<size_t> lags{1, 2};
  std::vector<std::string> attributes;

  // Execution only; results never depend on it, so it is not echoed.
  size_t threads = 1;

  LimeConfig lime() const {
    LimeConfig c;
    c.n_samples = n_samples;
    if (kernel_width > 0.0) c.kernel_width = kernel_width;
    c.ridge_lambda = ridge_lambda;
    c.top_k = top_k;
    c.seed = seed;
    return c;
  }

  GbdtParams gbdt() const {
    GbdtParams p;
    p.rounds = rounds;
    p.max_depth = max_depth;
    p.learning_rate = learning_rate;
    p.min_leaf_count = min_leaf_count;
    p.l2 = l2;
    p.seed = seed;
    return p;
  }

  RegionConfig regions() const {
    RegionConfig c;
    c.lime = lime();
    c.min_support_fraction = min_support;
    c.threshold = threshold;
    c.n_threads = threads;
    return c;
  }

  json echo() const {
    return {{"data", data},
            {"train_data", train_data},
            {"model", model},
            {"predictions", predictions},
            {"series", series},
            {"out_dir", out_dir},
            {"label_column", label_column},
            {"id_column", id_column},
            {"categorical", categorical},
            {"split_tag", split_tag},
            {"seed", seed},
            {"split_fraction", split_fraction},
            {"threshold", threshold},
            {"min_support", min_support},
            {"n_samples", n_samples},
            {"kernel_width", kernel_width},
            {"ridge_lambda", ridge_lambda},
            {"top_k", top_k},
            {"rounds", rounds},
            {"max_depth", max_depth},
            {"learning_rate", learning_rate},
            {"min_leaf_count", min_leaf_count},
            {"l2", l2},
            {"n_rows", n_rows},
            {"n_features", n_features},
            {"flip_rate", flip_rate},
            {"box_lo", box_lo},
            {"interval", interval},
            {"windows", windows},
            {"lags", lags},
            {"attributes", attributes}};
  }
};

// Options bound to RunConfig fields, keyed by their config-file name. A
// config-file value is applied only when the flag was not given.
class OptionRegistry {
 public:
  template <typename T>
  void add(CLI::App* app, const std::string& flag, T& field, const std::string& help) {
    CLI::Option* opt = app->add_option("--" + flag, field, help)->capture_default_str();
    std::string key = flag;
    std::replace(key.begin(), key.end(), '-', '_');
    known_keys_.insert(key);
    entries_[app].push_back({opt, key, [&field, key](const json& value) {
                               try {
                                 field = value.get<T>();
                               } catch (const json::exception&) {
                                 throw UsageError("config key '" + key + "' has the wrong type");
                               }
                             }});
  }

  void apply_config(CLI::App* app, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::kIoError, "cannot open config '" + path + "'");
    json file;
    try {
      file = json::parse(in);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::kFormatError, "config '" + path + "': " + e.what());
    }
    if (!file.is_object()) throw Error(ErrorKind::kFormatError, "config must be a JSON object");
    for (const auto& [key, value] : file.items()) {
      if (!known_keys_.count(key)) throw UsageError("unknown config key '" + key + "'");
    }
    for (const auto& entry : entries_[app]) {
      if (entry.option->count() > 0 || !file.contains(entry.key)) continue;
      entry.apply(file.at(entry.key));
    }
  }

 private:
  struct Entry {
    CLI::Option* option;
    std::string key;
    std::function<void(const json&)> apply;
  };
  std::map<CLI::App*, std::vector<Entry>> entries_;
  std::set<std::string> known_keys_;
};

std::filesystem::path ensure_out_dir(const RunConfig& cfg) {
  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir, ec);
  if (ec) throw Error(ErrorKind::kIoError, "cannot create '" + cfg.out_dir + "': " + ec.message());
  return cfg.out_dir;
}

std::string path_in(const RunConfig& cfg, const std::string& name) {
  return (ensure_out_dir(cfg) / name).string();
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIoError, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kFormatError, "'" + path + "': " + e.what());
  }
}

LabeledTable load_table(const RunConfig& cfg, const std::string& path) {
  if (path.empty()) throw UsageError("an input CSV is required (--data)");
  std::optional<std::string> id_column;
  {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::kIoError, "cannot open '" + path + "'");
    std::string header;
    std::getline(in, header);
    const auto records = csv::parse(header);
    if (!records.empty() && !cfg.id_column.empty() &&
        std::find(records[0].begin(), records[0].end(), cfg.id_column) != records[0].end()) {
      id_column = cfg.id_column;
    }
  }
  const Schema schema = schema_from_header(path, cfg.label_column, id_column, cfg.categorical);
  return load_csv(path, schema, cfg.label_column, id_column);
}

std::unique_ptr<Predictor> load_predictor(const RunConfig& cfg, const LabeledTable& table) {
  if (!cfg.predictions.empty()) {
    return std::make_unique<ExternalPredictor>(load_external_predictions(cfg.predictions, table));
  }
  if (cfg.model.empty()) throw UsageError("either --model or --predictions is required");
  return std::make_unique<GbdtModel>(GbdtModel::from_json(read_json_file(cfg.model)));
}

void write_metrics(const RunConfig& cfg, const Metrics& metrics, SplitTag tag) {
  json j = metrics_to_json(metrics);
  j["split"] = split_tag_name(tag);
  j["run_config"] = cfg.echo();
  write_text_file(path_in(cfg, "metrics_" + std::string(split_tag_name(tag)) + ".json"), render_json(j));
}

void write_explanations(const RunConfig& cfg, const std::vector<Explanation>& explanations, SplitTag tag) {
  std::string text;
  for (const auto& e : explanations) text += e.to_json().dump() + "\n";
  write_text_file(path_in(cfg, "explanations_" + std::string(split_tag_name(tag)) + ".jsonl"), text);
}

RegionAnalysis mine_split(const RunConfig& cfg, const Predictor& predictor, const Discretizer& disc,
                          const LabeledTable& table, SplitTag tag, std::ostream& out) {
  RegionAnalysis analysis = analyze_split(predictor, disc, table, tag, cfg.regions());
  analysis.report.run_config = cfg.echo();
  write_explanations(cfg, analysis.explanations, tag);
  write_report_files(analysis.report, cfg.out_dir, "report_" + std::string(split_tag_name(tag)));
  out << "mine[" << split_tag_name(tag) << "]: " << analysis.report.n_misclassified << "/"
      << analysis.report.n_total << " misclassified (baseline "
      << format_fixed(analysis.report.baseline_error_rate, 3) << "), "
      << analysis.report.regions.size() << " regions";
  if (!analysis.report.regions.empty()) {
    const auto& top = analysis.report.regions.front();
    out << ", top '" << top.condition.text() << "' at " << format_fixed(top.error_rate, 3);
  }
  out << "\n";
  return analysis;
}

void cmd_synth(const RunConfig& cfg, std::ostream& out) {
  SynthSpec spec = SynthSpec::planted_quartile(cfg.n_rows, cfg.n_features, cfg.flip_rate, cfg.seed);
  if (!spec.box.empty()) spec.box[0].lo = cfg.box_lo;
  const SynthData data = generate(spec);
  const std::string csv_path = path_in(cfg, "data.csv");
  write_csv(data.table, csv_path, cfg.label_column, cfg.id_column);
  std::vector<std::string> names;
  for (const auto& f : data.table.schema()) names.push_back(f.name);
  json truth = data.truth.to_json(names);
  truth["spec"] = synth_spec_to_json(spec);
  truth["run_config"] = cfg.echo();
  write_text_file(path_in(cfg, "ground_truth.json"), render_json(truth));
  out << "synth: " << data.table.n_rows() << " rows, " << data.table.n_features() << " features, "
      << data.truth.flipped_row_ids.size() << " flipped -> " << csv_path << "\n";
}

void cmd_featurize(const RunConfig& cfg, std::ostream& out) {
  if (cfg.series.empty()) throw UsageError("--series is required");
  const auto raw = load_series_csv(cfg.series, cfg.attributes);
  std::vector<SeriesFrame> resampled;
  for (const auto& s : raw) resampled.push_back(resample_series(s, cfg.interval));
  const LabeledTable table = featurize_all(resampled, cfg.windows, cfg.lags);
  const std::string path = path_in(cfg, "features.csv");
  write_csv(table, path, cfg.label_column, cfg.id_column);
  out << "featurize: " << raw.size() << " series -> " << table.n_rows() << " rows x "
      << table.n_features() << " features -> " << path << "\n";
}

struct TrainOutput {
  TrainTestSplit split;
  std::optional<GbdtModel> model;
};

TrainOutput train_step(const RunConfig& cfg, std::ostream& out) {
  const LabeledTable table = load_table(cfg, cfg.data);
  TrainOutput result{split(table, cfg.split_fraction, cfg.seed), std::nullopt};
  write_csv(result.split.train, path_in(cfg, "train.csv"), cfg.label_column, cfg.id_column);
  write_csv(result.split.test, path_in(cfg, "test.csv"), cfg.label_column, cfg.id_column);
  if (!cfg.predictions.empty()) return result;

  result.model = train_gbdt(result.split.train, cfg.gbdt());
  json model_json = result.model->to_json();
  model_json["run_config"] = cfg.echo();
  write_text_file(path_in(cfg, "model.json"), render_json(model_json));
  out << "train: " << result.split.train.n_rows() << " train / " << result.split.test.n_rows()
      << " test rows, " << cfg.rounds << " rounds -> " << path_in(cfg, "model.json") << "\n";
  return result;
}

Metrics eval_step(const RunConfig& cfg, const Predictor& predictor, const LabeledTable& table,
                  SplitTag tag, std::ostream& out) {
  const Metrics m = evaluate(predictor, table, cfg.threshold);
  write_metrics(cfg, m, tag);
  out << "eval[" << split_tag_name(tag) << "]: recall " << format_fixed(m.recall, 4) << ", precision "
      << format_fixed(m.precision, 4) << ", error rate " << format_fixed(m.error_rate, 4) << " (n="
      << m.n() << ")\n";
  return m;
}

void cmd_train(const RunConfig& cfg, std::ostream& out) {
  if (!cfg.predictions.empty()) throw UsageError("train does not take --predictions");
  TrainOutput trained = train_step(cfg, out);
  eval_step(cfg, *trained.model, trained.split.train, SplitTag::kTrain, out);
  eval_step(cfg, *trained.model, trained.split.test, SplitTag::kTest, out);
}

void cmd_eval(const RunConfig& cfg, std::ostream& out) {
  const LabeledTable table = load_table(cfg, cfg.data);
  const auto predictor = load_predictor(cfg, table);
  eval_step(cfg, *predictor, table, parse_split_tag(cfg.split_tag), out);
}

Discretizer discretizer_for(const RunConfig& cfg, const LabeledTable& table) {
  if (cfg.train_data.empty()) return Discretizer::fit(table);
  const LabeledTable train = load_table(cfg, cfg.train_data);
  if (train.schema() != table.schema()) {
    throw Error(ErrorKind::kSchemaMismatch, "--train-data and --data have different columns");
  }
  return Discretizer::fit(train);
}

void cmd_explain(const RunConfig& cfg, std::ostream& out) {
  const LabeledTable table = load_table(cfg, cfg.data);
  const auto predictor = load_predictor(cfg, table);
  const Discretizer disc = discretizer_for(cfg, table);
  const SplitTag tag = parse_split_tag(cfg.split_tag);
  const auto mis = find_misclassified(*predictor, table, cfg.threshold, tag);
  const auto explanations = explain_misclassified(*predictor, disc, table, mis, cfg.lime(), cfg.threads);
  write_explanations(cfg, explanations, tag);
  out << "explain[" << split_tag_name(tag) << "]: " << explanations.size()
      << " misclassified rows explained\n";
}

void cmd_mine(const RunConfig& cfg, std::ostream& out) {
  const LabeledTable table = load_table(cfg, cfg.data);
  const auto predictor = load_predictor(cfg, table);
  const Discretizer disc = discretizer_for(cfg, table);
  mine_split(cfg, *predictor, disc, table, parse_split_tag(cfg.split_tag), out);
}

void cmd_pipeline(const RunConfig& cfg, std::ostream& out) {
  TrainOutput trained = train_step(cfg, out);
  const auto& train = trained.split.train;
  const auto& test = trained.split.test;
  const Discretizer disc = Discretizer::fit(train);
  for (SplitTag tag : {SplitTag::kTrain, SplitTag::kTest}) {
    const LabeledTable& table = tag == SplitTag::kTrain ? train : test;
    std::unique_ptr<Predictor> external;
    const Predictor* predictor = trained.model ? &*trained.model : nullptr;
    if (!predictor) {
      external = load_predictor(cfg, table);
      predictor = external.get();
    }
    eval_step(cfg, *predictor, table, tag, out);
    mine_split(cfg, *predictor, disc, table, tag, out);
  }
}

void add_shared_options(OptionRegistry& reg, CLI::App* app, RunConfig& cfg) {
  app->add_option("--config", cfg.config, "JSON config file; flags override its values");
  reg.add(app, "seed", cfg.seed, "Global seed");
  reg.add(app, "out-dir", cfg.out_dir, "Output directory");
  reg.add(app, "threshold", cfg.threshold, "Decision threshold (p >= t is positive)");
  reg.add(app, "top-k", cfg.top_k, "Explanation terms kept per instance");
  reg.add(app, "n-samples", cfg.n_samples, "LIME perturbation samples");
  reg.add(app, "kernel-width", cfg.kernel_width, "LIME kernel width (0: 0.75*sqrt(d))");
  reg.add(app, "ridge-lambda", cfg.ridge_lambda, "Ridge penalty of the local surrogate");
  reg.add(app, "min-support", cfg.min_support, "Minimum fraction of explanations a condition needs");
  reg.add(app, "split-fraction", cfg.split_fraction, "Test fraction of the train/test split");
  reg.add(app, "predictions", cfg.predictions, "External row_id,probability CSV replacing the model");
  reg.add(app, "label-column", cfg.label_column, "Label column name");
  reg.add(app, "id-column", cfg.id_column, "Row id column name (row index if absent)");
  reg.add(app, "categorical", cfg.categorical, "Categorical feature columns");
  reg.add(app, "threads", cfg.threads, "Explanation worker threads (0: all cores)");
}

void add_data_options(OptionRegistry& reg, CLI::App* app, RunConfig& cfg) {
  reg.add(app, "data", cfg.data, "Input CSV");
  reg.add(app, "train-data", cfg.train_data, "Training CSV the discretizer is fitted on");
  reg.add(app, "model", cfg.model, "Model JSON written by train");
  reg.add(app, "split-tag", cfg.split_tag, "Split name used for outputs: train or test");
}

void add_gbdt_options(OptionRegistry& reg, CLI::App* app, RunConfig& cfg) {
  reg.add(app, "data", cfg.data, "Input CSV");
  reg.add(app, "rounds", cfg.rounds, "Boosting rounds");
  reg.add(app, "max-depth", cfg.max_depth, "Maximum tree depth");
  reg.add(app, "learning-rate", cfg.learning_rate, "Shrinkage");
  reg.add(app, "min-leaf-count", cfg.min_leaf_count, "Minimum rows per leaf");
  reg.add(app, "l2", cfg.l2, "L2 penalty on leaf values");
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Locate regions of feature space where a binary classifier errs", "blindspot"};
  app.require_subcommand(1);
  RunConfig cfg;
  OptionRegistry reg;

  struct Command {
    CLI::App* app;
    std::function<void(const RunConfig&, std::ostream&)> run;
  };
  std::vector<Command> commands;

  auto* synth = app.add_subcommand("synth", "Generate a dataset with a planted noisy region");
  add_shared_options(reg, synth, cfg);
  reg.add(synth, "n-rows", cfg.n_rows, "Rows");
  reg.add(synth, "n-features", cfg.n_features, "Features");
  reg.add(synth, "flip-rate", cfg.flip_rate, "Label flip probability inside the box");
  reg.add(synth, "box-lo", cfg.box_lo, "Lower bound of the planted box on f0");
  commands.push_back({synth, cmd_synth});

  auto* featurize = app.add_subcommand("featurize", "Resample time series and derive rolling features");
  add_shared_options(reg, featurize, cfg);
  reg.add(featurize, "series", cfg.series, "Time-series CSV");
  reg.add(featurize, "interval", cfg.interval, "Resampling interval in seconds");
  reg.add(featurize, "windows", cfg.windows, "Rolling window sizes");
  reg.add(featurize, "lags", cfg.lags, "Lags");
  reg.add(featurize, "attributes", cfg.attributes, "Static categorical columns");
  commands.push_back({featurize, cmd_featurize});

  auto* train = app.add_subcommand("train", "Split data, train the boosted-tree model, report metrics");
  add_shared_options(reg, train, cfg);
  add_gbdt_options(reg, train, cfg);
  commands.push_back({train, cmd_train});

  auto* eval = app.add_subcommand("eval", "Evaluate a model or external predictions");
  add_shared_options(reg, eval, cfg);
  add_data_options(reg, eval, cfg);
  commands.push_back({eval, cmd_eval});

  auto* explain_cmd = app.add_subcommand("explain", "Explain misclassified rows with LIME");
  add_shared_options(reg, explain_cmd, cfg);
  add_data_options(reg, explain_cmd, cfg);
  commands.push_back({explain_cmd, cmd_explain});

  auto* mine = app.add_subcommand("mine", "Mine recurring conditions and their error rates");
  add_shared_options(reg, mine, cfg);
  add_data_options(reg, mine, cfg);
  commands.push_back({mine, cmd_mine});

  auto* pipeline = app.add_subcommand("pipeline", "train + eval + explain + mine on both splits");
  add_shared_options(reg, pipeline, cfg);
  add_gbdt_options(reg, pipeline, cfg);
  commands.push_back({pipeline, cmd_pipeline});

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    app.exit(e, out, err);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    for (const auto& command : commands) {
      if (!command.app->parsed()) continue;
      if (!cfg.config.empty()) reg.apply_config(command.app, cfg.config);
      command.run(cfg, out);
    }
    return kExitOk;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    if (e.kind() == ErrorKind::kInvalidArgument) return kExitUsage;
    return is_numerical(e.kind()) ? kExitNumerical : kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
}

}  // namespace blindspot
