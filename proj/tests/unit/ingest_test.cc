#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "gtest/gtest.h"

#include "blindspot/error.h"
#include "blindspot/ingest.h"
#include "test_util.h"

namespace blindspot {
namespace {

using testing::temp_dir;
using testing::kind_of;
using testing::write_file;

TEST(LoadCsv, ThreeRows) {
  const auto dir = temp_dir("load_csv_three");
  const auto path = write_file(dir / "a.csv", "hr,label\n80,0\n95.5,1\n110,1\n");
  const auto table = load_csv(path, {{"hr", FeatureKind::kContinuous}}, "label");
  EXPECT_EQ(table.n_rows(), 3u);
  EXPECT_EQ(table.n_features(), 1u);
  EXPECT_DOUBLE_EQ(table.numeric(1, 0), 95.5);
  EXPECT_EQ(table.row_ids()[2], "2");
  EXPECT_EQ(table.labels()[0], 0);
}

TEST(LoadCsv, MissingColumn) {
  const auto dir = temp_dir("load_csv_missing");
  const auto path = write_file(dir / "a.csv", "hr,label\n80,0\n");
  try {
    load_csv(path, {{"hr", FeatureKind::kContinuous}, {"spo2", FeatureKind::kContinuous}}, "label");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kMissingColumn);
    EXPECT_NE(std::string(e.what()).find("spo2"), std::string::npos);
  }
}

TEST(LoadCsv, InvalidLabel) {
  const auto dir = temp_dir("load_csv_label");
  const auto path = write_file(dir / "a.csv", "hr,label\n80,2\n");
  EXPECT_EQ(kind_of([&] { load_csv(path, {{"hr", FeatureKind::kContinuous}}, "label"); }),
            ErrorKind::kInvalidLabel);
}

TEST(LoadCsv, NonNumericCell) {
  const auto dir = temp_dir("load_csv_nonnumeric");
  const auto path = write_file(dir / "a.csv", "hr,label\nfast,1\n");
  EXPECT_EQ(kind_of([&] { load_csv(path, {{"hr", FeatureKind::kContinuous}}, "label"); }),
            ErrorKind::kNonNumericCell);
}

TEST(LoadCsv, QuotedFieldsCategoricalAndIds) {
  const auto dir = temp_dir("load_csv_quoted");
  const auto path = write_file(dir / "a.csv",
                               "id,gender,hr,label\r\n\"p,1\",F,70,0\r\n\"p\"\"2\",M,1e2,1\r\n");
  const auto table = load_csv(path, {{"hr", FeatureKind::kContinuous}, {"gender", FeatureKind::kCategorical}},
                               "label", "id");
  ASSERT_EQ(table.n_rows(), 2u);
  EXPECT_EQ(table.row_ids()[0], "p,1");
  EXPECT_EQ(table.row_ids()[1], "p\"2");
  EXPECT_EQ(table.category(1, 1), "M");
  EXPECT_DOUBLE_EQ(table.numeric(1, 0), 100.0);
}

TEST(LoadCsv, MissingFileIsIoError) {
  EXPECT_EQ(kind_of([] { load_csv("/nonexistent/x.csv", {{"hr", FeatureKind::kContinuous}}, "label"); }),
            ErrorKind::kIoError);
}

TEST(LoadCsv, WriteThenLoadKeepsValues) {
  const auto dir = temp_dir("load_csv_roundtrip");
  Schema schema{{"x", FeatureKind::kContinuous}, {"g", FeatureKind::kCategorical}};
  LabeledTable table(schema);
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int r = 0; r < 50; ++r) {
    std::vector<Cell> cells{u(gen), std::string(r % 2 ? "a,b" : "c")};
    table.add_row(cells, r % 2, "id" + std::to_string(r));
  }
  const auto path = (dir / "t.csv").string();
  write_csv(table, path);
  const auto back = load_csv(path, schema, "label", "row_id");
  ASSERT_EQ(back.n_rows(), table.n_rows());
  for (size_t r = 0; r < table.n_rows(); ++r) {
    EXPECT_TRUE(back.rows_equal(r, table, r));
    EXPECT_EQ(back.row_ids()[r], table.row_ids()[r]);
  }
}

SeriesFrame one_channel(std::vector<double> t, std::vector<double> v) {
  SeriesFrame s;
  s.entity_id = "e";
  s.timestamps = std::move(t);
  s.channel_names = {"hr"};
  s.channels = {std::move(v)};
  s.label = 1;
  return s;
}

TEST(Resample, MeanOfOneBin) {
  const auto out = resample_series(one_channel({0, 60, 120, 180, 240}, {0, 1, 2, 3, 4}), 300);
  ASSERT_EQ(out.n_steps(), 1u);
  EXPECT_DOUBLE_EQ(out.channels[0][0], 2.0);
  EXPECT_DOUBLE_EQ(out.timestamps[0], 0.0);
}

TEST(Resample, ConstantStaysConstant) {
  const auto out = resample_series(one_channel({5, 100, 700, 1300, 1333}, {7, 7, 7, 7, 7}), 300);
  for (double v : out.channels[0]) EXPECT_DOUBLE_EQ(v, 7.0);
}

TEST(Resample, ForwardFillsGaps) {
  const auto out = resample_series(one_channel({0, 600}, {1, 5}), 300);
  EXPECT_EQ(out.timestamps, (std::vector<double>{0, 300, 600}));
  EXPECT_EQ(out.channels[0], (std::vector<double>{1, 1, 5}));
}

TEST(Resample, DropsLeadingBinsWithMissingChannels) {
  SeriesFrame s = one_channel({0, 300, 600}, {1, 2, 3});
  s.channel_names.push_back("spo2");
  s.channels.push_back({std::nan(""), 97, std::nan("")});
  const auto out = resample_series(s, 300);
  EXPECT_EQ(out.timestamps, (std::vector<double>{300, 600}));
  EXPECT_EQ(out.channels[1], (std::vector<double>{97, 97}));
}

TEST(Resample, EmptySeries) {
  EXPECT_EQ(kind_of([] { resample_series(one_channel({}, {}), 300); }), ErrorKind::kEmptySeries);
}

TEST(Resample, OutputSpacingIsUniform) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<double> t, v;
    double now = std::uniform_real_distribution<double>(-5000, 5000)(gen);
    const int n = 1 + static_cast<int>(gen() % 60);
    for (int i = 0; i < n; ++i) {
      now += std::uniform_real_distribution<double>(1, 900)(gen);
      t.push_back(now);
      v.push_back(std::uniform_real_distribution<double>(50, 150)(gen));
    }
    const int64_t interval = 60 + static_cast<int64_t>(gen() % 600);
    const auto out = resample_series(one_channel(t, v), interval);
    for (size_t i = 0; i < out.n_steps(); ++i) {
      EXPECT_DOUBLE_EQ(std::fmod(out.timestamps[i], static_cast<double>(interval)), 0.0);
      if (i > 0) EXPECT_DOUBLE_EQ(out.timestamps[i] - out.timestamps[i - 1], static_cast<double>(interval));
    }
  }
}

TEST(Featurize, RollingMeanStdAndLag) {
  const auto s = one_channel({0, 300, 600, 900}, {1, 2, 3, 4});
  const std::vector<size_t> windows{3};
  const std::vector<size_t> lags{1};
  const auto table = featurize_rolling(s, windows, lags);
  ASSERT_EQ(table.n_rows(), 2u);  // steps 2 and 3 have full history
  const auto mean = *table.feature_index("hr_mean_3");
  const auto lag = *table.feature_index("hr_lag_1");
  EXPECT_DOUBLE_EQ(table.numeric(1, mean), 3.0);
  EXPECT_DOUBLE_EQ(table.numeric(1, lag), 3.0);
  EXPECT_EQ(table.labels()[0], 1);
}

TEST(Featurize, ConstantChannelHasZeroStd) {
  const auto s = one_channel({0, 300, 600, 900, 1200, 1500, 1800}, std::vector<double>(7, 88.0));
  const std::vector<size_t> windows{3, 6};
  const std::vector<size_t> lags{1, 2};
  const auto table = featurize_rolling(s, windows, lags);
  for (const char* name : {"hr_std_3", "hr_std_6"}) {
    const auto j = *table.feature_index(name);
    for (size_t r = 0; r < table.n_rows(); ++r) EXPECT_EQ(table.numeric(r, j), 0.0);
  }
}

TEST(Featurize, ColumnOrderAndAttributes) {
  SeriesFrame s = one_channel({0, 300, 600}, {1, 2, 3});
  s.channel_names.push_back("sbp");
  s.channels.push_back({120, 121, 119});
  s.attributes = {{"gender", "F"}};
  const std::vector<size_t> windows{2};
  const std::vector<size_t> lags{1};
  const auto table = featurize_rolling(s, windows, lags);
  std::vector<std::string> names;
  for (const auto& f : table.schema()) names.push_back(f.name);
  EXPECT_EQ(names, (std::vector<std::string>{"hr", "sbp", "hr_mean_2", "hr_std_2", "hr_lag_1",
                                             "sbp_mean_2", "sbp_std_2", "sbp_lag_1", "gender"}));
  EXPECT_EQ(table.schema().back().kind, FeatureKind::kCategorical);
  for (size_t r = 0; r < table.n_rows(); ++r) EXPECT_EQ(table.category(r, 8), "F");
}

TEST(Featurize, TooShort) {
  const std::vector<size_t> windows{6};
  const std::vector<size_t> lags{1};
  EXPECT_EQ(kind_of([&] { featurize_rolling(one_channel({0, 300}, {1, 2}), windows, lags); }),
            ErrorKind::kSeriesTooShort);
}

TEST(Featurize, MeansMatchBruteForce) {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> noise(100, 20);
  std::vector<double> t, v;
  for (int i = 0; i < 80; ++i) {
    t.push_back(300.0 * i);
    v.push_back(noise(gen));
  }
  const std::vector<size_t> windows{3, 6, 11};
  const std::vector<size_t> lags{1, 4};
  const auto table = featurize_rolling(one_channel(t, v), windows, lags);
  const size_t first = 10;  // max(11 - 1, 4)
  ASSERT_EQ(table.n_rows(), v.size() - first);
  for (size_t r = 0; r < table.n_rows(); ++r) {
    const size_t step = first + r;
    for (size_t w : windows) {
      double sum = 0.0;
      for (size_t k = 0; k < w; ++k) sum += v[step - k];
      const auto j = *table.feature_index("hr_mean_" + std::to_string(w));
      EXPECT_NEAR(table.numeric(r, j), sum / static_cast<double>(w), 1e-12);
    }
    EXPECT_EQ(table.numeric(r, *table.feature_index("hr_lag_4")), v[step - 4]);
  }
}

TEST(SeriesCsv, LoadsAndGroupsEntities) {
  const auto dir = temp_dir("series_csv");
  const auto path = write_file(dir / "s.csv",
                               "entity_id,timestamp_s,hr,gender,label\n"
                               "b,600,80,M,0\n"
                               "a,0,70,F,1\n"
                               "b,0,75,M,0\n"
                               "a,300,,F,1\n");
  const std::vector<std::string> attrs{"gender"};
  const auto series = load_series_csv(path, attrs);
  ASSERT_EQ(series.size(), 2u);
  EXPECT_EQ(series[0].entity_id, "b");
  EXPECT_EQ(series[0].timestamps, (std::vector<double>{0, 600}));
  EXPECT_TRUE(std::isnan(series[1].channels[0][1]));
  EXPECT_EQ(series[1].attributes.front().second, "F");
  EXPECT_EQ(series[1].label, 1);
}

TEST(Split, SizesAndDeterminism) {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  for (int i = 0; i < 10; ++i) {
    rows.push_back({static_cast<double>(i)});
    labels.push_back(i % 2);
  }
  const auto table = testing::numeric_table(rows, labels);
  const auto a = split(table, 0.2, 99);
  EXPECT_EQ(a.train.n_rows(), 8u);
  EXPECT_EQ(a.test.n_rows(), 2u);
  const auto b = split(table, 0.2, 99);
  EXPECT_TRUE(std::equal(a.train.row_ids().begin(), a.train.row_ids().end(), b.train.row_ids().begin()));
  EXPECT_TRUE(std::equal(a.test.row_ids().begin(), a.test.row_ids().end(), b.test.row_ids().begin()));

  const auto c = split(table, 0.95, 99);
  EXPECT_EQ(c.train.n_rows(), 1u);
  EXPECT_EQ(c.test.n_rows(), 9u);
}

// Exact rational oracle: ceil(n * (q - p) / q) for test fraction p/q.
TEST(Split, TrainSizeMatchesCeilingOracle) {
  for (size_t n = 2; n <= 60; ++n) {
    for (size_t q : {4u, 5u, 10u, 20u, 100u}) {
      for (size_t p = 1; p < q; ++p) {
        const size_t expected = (n * (q - p) + q - 1) / q;
        EXPECT_EQ(train_size_for(n, static_cast<double>(p) / static_cast<double>(q)), expected)
            << "n=" << n << " fraction=" << p << "/" << q;
      }
    }
  }
}

TEST(Split, PartitionIsExact) {
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 20; ++trial) {
    const size_t n = 2 + gen() % 200;
    std::vector<std::vector<double>> rows(n, std::vector<double>{0.0});
    std::vector<int> labels(n, 0);
    const auto table = testing::numeric_table(rows, labels);
    const double fraction = 0.05 + 0.9 * std::uniform_real_distribution<double>(0, 1)(gen);
    TrainTestSplit parts{LabeledTable(table.schema()), LabeledTable(table.schema())};
    try {
      parts = split(table, fraction, gen());
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::kDegenerateSplit);
      continue;
    }
    std::vector<std::string> ids(parts.train.row_ids().begin(), parts.train.row_ids().end());
    ids.insert(ids.end(), parts.test.row_ids().begin(), parts.test.row_ids().end());
    std::vector<std::string> expected(table.row_ids().begin(), table.row_ids().end());
    std::sort(ids.begin(), ids.end());
    std::sort(expected.begin(), expected.end());
    EXPECT_EQ(ids, expected);
  }
}

TEST(Split, DegenerateSplit) {
  const auto one = testing::numeric_table({{1.0}}, {0});
  EXPECT_EQ(kind_of([&] { split(one, 0.5, 1); }), ErrorKind::kDegenerateSplit);
  std::vector<std::vector<double>> rows(10, std::vector<double>{0.0});
  const auto ten = testing::numeric_table(rows, std::vector<int>(10, 0));
  EXPECT_EQ(kind_of([&] { split(ten, 0.01, 1); }), ErrorKind::kDegenerateSplit);
}

}  // namespace
}  // namespace blindspot
