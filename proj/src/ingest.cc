#include "blindspot/ingest.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>

#include "blindspot/csv.h"
#include "blindspot/error.h"
#include "blindspot/format.h"
#include "blindspot/random.h"

namespace blindspot {
namespace {

size_t column_of(const csv::Record& header, std::string_view name) {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw Error(ErrorKind::kMissingColumn, std::string(name));
  return static_cast<size_t>(it - header.begin());
}

int parse_label(const std::string& text, size_t row) {
  double value = 0.0;
  if (parse_double(text, value)) {
    if (value == 0.0) return 0;
    if (value == 1.0) return 1;
  }
  throw Error(ErrorKind::kInvalidLabel, "row " + std::to_string(row) + " label '" + text + "'");
}

void check_arity(const csv::Record& record, size_t expected, size_t row) {
  if (record.size() != expected) {
    throw Error(ErrorKind::kFormatError, "row " + std::to_string(row) + " has " +
                                             std::to_string(record.size()) + " fields, expected " +
                                             std::to_string(expected));
  }
}

}  // namespace

LabeledTable load_csv(const std::string& path, const Schema& schema,
                      std::string_view label_column, std::optional<std::string> id_column) {
  validate_schema(schema);
  const auto records = csv::read_file(path);
  if (records.empty()) throw Error(ErrorKind::kFormatError, "'" + path + "' has no header row");
  const auto& header = records.front();

  std::vector<size_t> feature_cols;
  for (const auto& spec : schema) feature_cols.push_back(column_of(header, spec.name));
  const size_t label_col = column_of(header, label_column);
  std::optional<size_t> id_col;
  if (id_column) id_col = column_of(header, *id_column);

  LabeledTable table(schema);
  table.reserve(records.size() - 1);
  std::vector<Cell> cells(schema.size());
  for (size_t r = 1; r < records.size(); ++r) {
    const auto& record = records[r];
    const size_t row = r - 1;
    check_arity(record, header.size(), row);
    for (size_t j = 0; j < schema.size(); ++j) {
      const std::string& text = record[feature_cols[j]];
      if (schema[j].kind == FeatureKind::kCategorical) {
        cells[j] = text;
        continue;
      }
      double value = 0.0;
      if (!parse_double(text, value) || !std::isfinite(value)) {
        throw Error(ErrorKind::kNonNumericCell,
                    "row " + std::to_string(row) + ", column '" + schema[j].name + "': '" + text + "'");
      }
      cells[j] = value;
    }
    const int label = parse_label(record[label_col], row);
    table.add_row(cells, label, id_col ? record[*id_col] : std::to_string(row));
  }
  return table;
}

Schema schema_from_header(const std::string& path, std::string_view label_column,
                          std::optional<std::string_view> id_column,
                          std::span<const std::string> categorical) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::kIoError, "cannot open '" + path + "'");
  std::string line;
  std::getline(in, line);
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  const auto records = csv::parse(line);
  if (records.empty()) throw Error(ErrorKind::kFormatError, "'" + path + "' has no header row");
  const auto& header = records.front();
  column_of(header, label_column);
  if (id_column) column_of(header, *id_column);

  Schema schema;
  for (const auto& name : header) {
    if (name == label_column || (id_column && name == *id_column)) continue;
    const bool is_cat = std::find(categorical.begin(), categorical.end(), name) != categorical.end();
    schema.push_back({name, is_cat ? FeatureKind::kCategorical : FeatureKind::kContinuous});
  }
  for (const auto& name : categorical) {
    if (std::find(header.begin(), header.end(), name) == header.end()) {
      throw Error(ErrorKind::kMissingColumn, name);
    }
  }
  validate_schema(schema);
  return schema;
}

void write_csv(const LabeledTable& table, const std::string& path, std::string_view label_column,
               std::string_view id_column) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::kIoError, "cannot write '" + path + "'");
  csv::Record header{std::string(id_column)};
  for (const auto& spec : table.schema()) header.push_back(spec.name);
  header.emplace_back(label_column);
  csv::write_record(out, header);

  csv::Record record(header.size());
  for (size_t r = 0; r < table.n_rows(); ++r) {
    record[0] = table.row_ids()[r];
    for (size_t j = 0; j < table.n_features(); ++j) {
      record[j + 1] = table.schema()[j].kind == FeatureKind::kContinuous
                          ? format_shortest(table.numeric(r, j))
                          : table.category(r, j);
    }
    record.back() = std::to_string(table.labels()[r]);
    csv::write_record(out, record);
  }
  if (!out) throw Error(ErrorKind::kIoError, "write failed for '" + path + "'");
}

void SeriesFrame::validate() const {
  if (channels.size() != channel_names.size()) {
    throw Error(ErrorKind::kInvalidArgument, "series '" + entity_id + "': channel names/values mismatch");
  }
  for (const auto& channel : channels) {
    if (channel.size() != timestamps.size()) {
      throw Error(ErrorKind::kInvalidArgument, "series '" + entity_id + "': channel length mismatch");
    }
  }
  for (size_t i = 1; i < timestamps.size(); ++i) {
    if (!(timestamps[i] > timestamps[i - 1])) {
      throw Error(ErrorKind::kInvalidArgument,
                  "series '" + entity_id + "': timestamps not strictly increasing");
    }
  }
  if (label != 0 && label != 1) throw Error(ErrorKind::kInvalidLabel, "series '" + entity_id + "'");
}

std::vector<SeriesFrame> load_series_csv(const std::string& path,
                                         std::span<const std::string> attribute_columns) {
  const auto records = csv::read_file(path);
  if (records.empty()) throw Error(ErrorKind::kFormatError, "'" + path + "' has no header row");
  const auto& header = records.front();
  const size_t entity_col = column_of(header, "entity_id");
  const size_t time_col = column_of(header, "timestamp_s");
  const size_t label_col = column_of(header, "label");
  std::vector<size_t> attr_cols;
  for (const auto& name : attribute_columns) attr_cols.push_back(column_of(header, name));

  std::vector<size_t> channel_cols;
  std::vector<std::string> channel_names;
  for (size_t c = 0; c < header.size(); ++c) {
    if (c == entity_col || c == time_col || c == label_col) continue;
    if (std::find(attr_cols.begin(), attr_cols.end(), c) != attr_cols.end()) continue;
    channel_cols.push_back(c);
    channel_names.push_back(header[c]);
  }

  struct Sample {
    double t;
    std::vector<double> values;
  };
  std::vector<std::string> order;
  std::map<std::string, std::vector<Sample>> samples;
  std::map<std::string, SeriesFrame> frames;

  for (size_t r = 1; r < records.size(); ++r) {
    const auto& record = records[r];
    const size_t row = r - 1;
    check_arity(record, header.size(), row);
    const std::string& entity = record[entity_col];
    auto [it, inserted] = frames.try_emplace(entity);
    SeriesFrame& frame = it->second;
    const int label = parse_label(record[label_col], row);
    std::vector<std::pair<std::string, std::string>> attrs;
    for (size_t a = 0; a < attr_cols.size(); ++a) {
      attrs.emplace_back(attribute_columns[a], record[attr_cols[a]]);
    }
    if (inserted) {
      order.push_back(entity);
      frame.entity_id = entity;
      frame.channel_names = channel_names;
      frame.label = label;
      frame.attributes = attrs;
    } else if (frame.label != label || frame.attributes != attrs) {
      throw Error(ErrorKind::kFormatError,
                  "entity '" + entity + "' changes label or attributes at row " + std::to_string(row));
    }

    Sample sample;
    if (!parse_double(record[time_col], sample.t) || !std::isfinite(sample.t)) {
      throw Error(ErrorKind::kNonNumericCell, "row " + std::to_string(row) + ", column 'timestamp_s'");
    }
    for (size_t c : channel_cols) {
      double value = std::numeric_limits<double>::quiet_NaN();
      if (!record[c].empty() && !parse_double(record[c], value)) {
        throw Error(ErrorKind::kNonNumericCell,
                    "row " + std::to_string(row) + ", column '" + header[c] + "'");
      }
      sample.values.push_back(value);
    }
    samples[entity].push_back(std::move(sample));
  }

  std::vector<SeriesFrame> out;
  out.reserve(order.size());
  for (const auto& entity : order) {
    auto& list = samples[entity];
    std::stable_sort(list.begin(), list.end(),
                     [](const Sample& a, const Sample& b) { return a.t < b.t; });
    SeriesFrame frame = std::move(frames[entity]);
    frame.channels.assign(channel_names.size(), {});
    for (const auto& sample : list) {
      frame.timestamps.push_back(sample.t);
      for (size_t c = 0; c < channel_names.size(); ++c) frame.channels[c].push_back(sample.values[c]);
    }
    frame.validate();
    out.push_back(std::move(frame));
  }
  return out;
}

SeriesFrame resample_series(const SeriesFrame& series, int64_t interval_s) {
  if (interval_s <= 0) throw Error(ErrorKind::kInvalidArgument, "interval must be positive");
  series.validate();
  if (series.timestamps.empty()) throw Error(ErrorKind::kEmptySeries, series.entity_id);

  const double interval = static_cast<double>(interval_s);
  auto bin_of = [&](double t) { return static_cast<int64_t>(std::floor(t / interval)); };
  const int64_t first_bin = bin_of(series.timestamps.front());
  const int64_t last_bin = bin_of(series.timestamps.back());
  const size_t n_bins = static_cast<size_t>(last_bin - first_bin + 1);
  const size_t n_channels = series.channels.size();

  std::vector<std::vector<double>> sums(n_channels, std::vector<double>(n_bins, 0.0));
  std::vector<std::vector<size_t>> counts(n_channels, std::vector<size_t>(n_bins, 0));
  for (size_t i = 0; i < series.n_steps(); ++i) {
    const size_t b = static_cast<size_t>(bin_of(series.timestamps[i]) - first_bin);
    for (size_t c = 0; c < n_channels; ++c) {
      const double v = series.channels[c][i];
      if (std::isnan(v)) continue;
      sums[c][b] += v;
      ++counts[c][b];
    }
  }

  SeriesFrame out;
  out.entity_id = series.entity_id;
  out.channel_names = series.channel_names;
  out.attributes = series.attributes;
  out.label = series.label;
  out.channels.assign(n_channels, {});

  std::vector<double> carried(n_channels, std::numeric_limits<double>::quiet_NaN());
  for (size_t b = 0; b < n_bins; ++b) {
    bool complete = true;
    for (size_t c = 0; c < n_channels; ++c) {
      if (counts[c][b] > 0) carried[c] = sums[c][b] / static_cast<double>(counts[c][b]);
      if (std::isnan(carried[c])) complete = false;
    }
    if (!complete) continue;  // only possible before every channel has a value
    out.timestamps.push_back(static_cast<double>(first_bin + static_cast<int64_t>(b)) * interval);
    for (size_t c = 0; c < n_channels; ++c) out.channels[c].push_back(carried[c]);
  }
  if (out.timestamps.empty()) throw Error(ErrorKind::kEmptySeries, series.entity_id);
  return out;
}

namespace {

Schema rolling_schema(const SeriesFrame& series, std::span<const size_t> windows,
                      std::span<const size_t> lags) {
  Schema schema;
  for (const auto& name : series.channel_names) schema.push_back({name, FeatureKind::kContinuous});
  for (const auto& name : series.channel_names) {
    for (size_t w : windows) schema.push_back({name + "_mean_" + std::to_string(w), FeatureKind::kContinuous});
    for (size_t w : windows) schema.push_back({name + "_std_" + std::to_string(w), FeatureKind::kContinuous});
    for (size_t l : lags) schema.push_back({name + "_lag_" + std::to_string(l), FeatureKind::kContinuous});
  }
  for (const auto& [name, value] : series.attributes) {
    schema.push_back({name, FeatureKind::kCategorical});
  }
  return schema;
}

void append_rolling_rows(const SeriesFrame& series, std::span<const size_t> windows,
                         std::span<const size_t> lags, LabeledTable& table) {
  size_t history = 0;  // first step index with full history
  for (size_t w : windows) history = std::max(history, w - 1);
  for (size_t l : lags) history = std::max(history, l);

  std::vector<Cell> cells;
  for (size_t t = history; t < series.n_steps(); ++t) {
    cells.clear();
    for (const auto& channel : series.channels) cells.emplace_back(channel[t]);
    for (const auto& channel : series.channels) {
      for (size_t w : windows) {
        double sum = 0.0;
        for (size_t k = t + 1 - w; k <= t; ++k) sum += channel[k];
        cells.emplace_back(sum / static_cast<double>(w));
      }
      for (size_t w : windows) {
        double sum = 0.0;
        for (size_t k = t + 1 - w; k <= t; ++k) sum += channel[k];
        const double mean = sum / static_cast<double>(w);
        double ss = 0.0;
        for (size_t k = t + 1 - w; k <= t; ++k) ss += (channel[k] - mean) * (channel[k] - mean);
        cells.emplace_back(std::sqrt(ss / static_cast<double>(w)));
      }
      for (size_t l : lags) cells.emplace_back(channel[t - l]);
    }
    for (const auto& [name, value] : series.attributes) cells.emplace_back(value);
    table.add_row(cells, series.label, series.entity_id + "@" + format_shortest(series.timestamps[t]));
  }
}

void check_rolling_input(const SeriesFrame& series, std::span<const size_t> windows,
                         std::span<const size_t> lags) {
  series.validate();
  for (size_t w : windows) {
    if (w == 0) throw Error(ErrorKind::kInvalidArgument, "window sizes must be positive");
  }
  for (size_t l : lags) {
    if (l == 0) throw Error(ErrorKind::kInvalidArgument, "lags must be positive");
  }
  if (series.timestamps.size() > 2) {
    const double step = series.timestamps[1] - series.timestamps[0];
    for (size_t i = 2; i < series.timestamps.size(); ++i) {
      if (series.timestamps[i] - series.timestamps[i - 1] != step) {
        throw Error(ErrorKind::kInvalidArgument,
                    "series '" + series.entity_id + "' is not uniformly spaced; resample first");
      }
    }
  }
  for (const auto& channel : series.channels) {
    for (double v : channel) {
      if (!std::isfinite(v)) {
        throw Error(ErrorKind::kInvalidArgument,
                    "series '" + series.entity_id + "' has missing values; resample first");
      }
    }
  }
}

}  // namespace

LabeledTable featurize_rolling(const SeriesFrame& series, std::span<const size_t> windows,
                               std::span<const size_t> lags) {
  check_rolling_input(series, windows, lags);
  LabeledTable table(rolling_schema(series, windows, lags));
  append_rolling_rows(series, windows, lags, table);
  if (table.empty()) throw Error(ErrorKind::kSeriesTooShort, series.entity_id);
  return table;
}

LabeledTable featurize_all(std::span<const SeriesFrame> series, std::span<const size_t> windows,
                           std::span<const size_t> lags) {
  if (series.empty()) throw Error(ErrorKind::kEmptySeries, "no series given");
  LabeledTable table(rolling_schema(series.front(), windows, lags));
  for (const auto& frame : series) {
    check_rolling_input(frame, windows, lags);
    if (rolling_schema(frame, windows, lags) != table.schema()) {
      throw Error(ErrorKind::kSchemaMismatch, "series '" + frame.entity_id + "' has different channels");
    }
    append_rolling_rows(frame, windows, lags, table);
  }
  if (table.empty()) throw Error(ErrorKind::kSeriesTooShort, "no series has full history");
  return table;
}

size_t train_size_for(size_t n, double test_fraction) {
  const double exact = static_cast<double>(n) * (1.0 - test_fraction);
  // Guard against products like 8.000000000000002 rounding up.
  return static_cast<size_t>(std::ceil(exact - 1e-9));
}

TrainTestSplit split(const LabeledTable& table, double test_fraction, uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "test fraction must lie in (0, 1)");
  }
  const size_t n = table.n_rows();
  const size_t n_train = train_size_for(n, test_fraction);
  if (n < 2 || n_train == 0 || n_train >= n) {
    throw Error(ErrorKind::kDegenerateSplit, "n=" + std::to_string(n) + ", test fraction " +
                                                 format_shortest(test_fraction));
  }
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  Rng rng(seed);
  for (size_t i = n - 1; i > 0; --i) {
    std::swap(order[i], order[rng.below(i + 1)]);
  }
  const std::span<const size_t> all(order);
  return {table.select(all.first(n_train)), table.select(all.subspan(n_train))};
}

}  // namespace blindspot
