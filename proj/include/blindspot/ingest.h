#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "blindspot/table.h"

namespace blindspot {

// Loads a tabular CSV. Rows keep file order. Without an id column the row
// ids are the 0-based row indices rendered as text.
//
// Throws MissingColumn, NonNumericCell (continuous features) and
// InvalidLabel (label not 0/1).
LabeledTable load_csv(const std::string& path, const Schema& schema,
                      std::string_view label_column,
                      std::optional<std::string> id_column = std::nullopt);

// Builds a schema from a CSV header: every column other than the label and
// id columns is a feature, continuous unless listed in `categorical`.
Schema schema_from_header(const std::string& path, std::string_view label_column,
                          std::optional<std::string_view> id_column,
                          std::span<const std::string> categorical);

// Writes `table` in the layout load_csv reads: id column first, features,
// label last.
void write_csv(const LabeledTable& table, const std::string& path,
               std::string_view label_column = "label",
               std::string_view id_column = "row_id");

// Per-entity multichannel time series. Channel values may be NaN (missing)
// before resampling.
struct SeriesFrame {
  std::string entity_id;
  std::vector<double> timestamps;  // seconds, strictly increasing
  std::vector<std::string> channel_names;
  std::vector<std::vector<double>> channels;  // [channel][step]
  // Static categorical attributes (e.g. gender), copied onto every row.
  std::vector<std::pair<std::string, std::string>> attributes;
  int label = 0;

  size_t n_steps() const { return timestamps.size(); }
  void validate() const;
};

// Reads a time-series CSV with columns entity_id, timestamp_s, one column
// per channel and label. Columns named in `attribute_columns` are taken as
// static categorical attributes. Series come out in order of first
// appearance; samples are sorted by time. Empty channel cells become NaN.
std::vector<SeriesFrame> load_series_csv(const std::string& path,
                                         std::span<const std::string> attribute_columns = {});

// Averages samples into [k*interval, (k+1)*interval) bins. Empty bins carry
// the previous bin's value forward; leading bins where some channel has no
// value yet are dropped. Throws EmptySeries.
SeriesFrame resample_series(const SeriesFrame& series, int64_t interval_s = 300);

// Rolling features per resampled series. Columns: the raw channels, then
// for each channel its trailing means, population stds (one per window)
// and lags, then the static attributes. Only steps with full history for
// the largest window and lag are emitted. Throws SeriesTooShort.
LabeledTable featurize_rolling(const SeriesFrame& series, std::span<const size_t> windows,
                               std::span<const size_t> lags);

// featurize_rolling over several series, concatenated. Series that are too
// short are skipped; throws SeriesTooShort only if none yields a row.
LabeledTable featurize_all(std::span<const SeriesFrame> series, std::span<const size_t> windows,
                           std::span<const size_t> lags);

struct TrainTestSplit {
  LabeledTable train;
  LabeledTable test;
};

// Seeded shuffle, then the first ceil(n * (1 - test_fraction)) rows train.
// Throws DegenerateSplit if either side would be empty.
TrainTestSplit split(const LabeledTable& table, double test_fraction, uint64_t seed);

// Number of training rows split() produces.
size_t train_size_for(size_t n, double test_fraction);

}  // namespace blindspot
