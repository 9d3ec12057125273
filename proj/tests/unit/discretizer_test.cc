#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "gtest/gtest.h"

#include "blindspot/discretizer.h"
#include "test_util.h"

namespace blindspot {
namespace {

using testing::kind_of;
using testing::numeric_table;

// Oracle: textbook linear-interpolation percentile, written as a weighted
// average rather than the library's base-plus-offset form.
double oracle_percentile(std::vector<double> values, double q) {
  std::sort(values.begin(), values.end());
  const double rank = (static_cast<double>(values.size()) - 1.0) * q;
  const double below = std::floor(rank);
  const double frac = rank - below;
  const size_t i = static_cast<size_t>(below);
  if (frac == 0.0) return values[i];
  return (1.0 - frac) * values[i] + frac * values[i + 1];
}

LabeledTable column_table(const std::vector<double>& values) {
  std::vector<std::vector<double>> rows;
  for (double v : values) rows.push_back({v});
  return numeric_table(rows, std::vector<int>(values.size(), 0));
}

TEST(Discretizer, QuartilesOfOneToTwelve) {
  std::vector<double> values(12);
  std::iota(values.begin(), values.end(), 1.0);
  const auto disc = Discretizer::fit(column_table(values));
  const std::vector<double> expected{oracle_percentile(values, 0.25), oracle_percentile(values, 0.5),
                                     oracle_percentile(values, 0.75)};
  EXPECT_EQ(expected, (std::vector<double>{3.75, 6.5, 9.25}));
  EXPECT_EQ(disc.feature(0).edges, expected);
  EXPECT_EQ(disc.feature(0).bins.size(), 4u);
  EXPECT_EQ(disc.feature(0).bins[0].count, 3u);
  EXPECT_DOUBLE_EQ(disc.feature(0).bins[0].mean, 2.0);
  EXPECT_DOUBLE_EQ(disc.feature(0).bins[3].min, 10.0);
  EXPECT_DOUBLE_EQ(disc.feature(0).bins[3].max, 12.0);
}

TEST(Discretizer, ConstantFeatureHasOneBin) {
  const auto disc = Discretizer::fit(column_table({4, 4, 4, 4}));
  const auto& fb = disc.feature(0);
  EXPECT_TRUE(fb.edges.empty());
  ASSERT_EQ(fb.bins.size(), 1u);
  EXPECT_EQ(fb.bins[0].frequency, 1.0);
  EXPECT_EQ(fb.bins[0].std, 0.0);
  const auto c = disc.condition_for(size_t{0}, Cell{4.0});
  EXPECT_TRUE(c.holds(Cell{4.0}));
  EXPECT_TRUE(c.holds(Cell{-1e300}));
}

TEST(Discretizer, DuplicateHeavyValuesMergeEdges) {
  const std::vector<double> values{0, 0, 0, 0, 1};
  EXPECT_EQ(oracle_percentile(values, 0.25), 0.0);
  EXPECT_EQ(oracle_percentile(values, 0.5), 0.0);
  EXPECT_EQ(oracle_percentile(values, 0.75), 0.0);
  const auto disc = Discretizer::fit(column_table(values));
  EXPECT_EQ(disc.feature(0).edges, (std::vector<double>{0.0}));
  ASSERT_EQ(disc.feature(0).bins.size(), 2u);
  EXPECT_DOUBLE_EQ(disc.feature(0).bins[0].frequency, 0.8);
  EXPECT_DOUBLE_EQ(disc.feature(0).bins[1].frequency, 0.2);
}

TEST(Discretizer, ConditionForBins) {
  std::vector<double> values(12);
  std::iota(values.begin(), values.end(), 1.0);
  Schema schema{{"f", FeatureKind::kContinuous}};
  LabeledTable table(schema);
  for (double v : values) table.add_row(std::vector<Cell>{v}, 0, std::to_string(v));
  const auto disc = Discretizer::fit(table);
  EXPECT_EQ(disc.condition_for("f", Cell{2.0}).text(), "f <= 3.75");
  EXPECT_EQ(disc.condition_for("f", Cell{7.0}).text(), "6.5 < f <= 9.25");
  EXPECT_EQ(disc.condition_for("f", Cell{100.0}).text(), "f > 9.25");
  EXPECT_EQ(disc.condition_for("f", Cell{3.75}).text(), "f <= 3.75");
  EXPECT_EQ(kind_of([&] { disc.condition_for("g", Cell{1.0}); }), ErrorKind::kUnknownFeature);
}

TEST(Discretizer, CategoricalFrequencies) {
  Schema schema{{"g", FeatureKind::kCategorical}};
  LabeledTable table(schema);
  int i = 0;
  for (const char* c : {"M", "F", "F", "F"}) table.add_row(std::vector<Cell>{std::string(c)}, 0, std::to_string(i++));
  const auto disc = Discretizer::fit(table);
  EXPECT_EQ(disc.feature(0).categories, (std::vector<std::string>{"F", "M"}));
  EXPECT_EQ(disc.feature(0).category_frequencies, (std::vector<double>{0.75, 0.25}));
  EXPECT_EQ(disc.condition_for("g", Cell{std::string("M")}).text(), "g = M");
}

TEST(Discretizer, EmptyTable) {
  LabeledTable empty({{"f", FeatureKind::kContinuous}});
  EXPECT_EQ(kind_of([&] { Discretizer::fit(empty); }), ErrorKind::kEmptyTable);
}

TEST(Discretizer, InvariantsOnRandomData) {
  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 40; ++trial) {
    const size_t n = 1 + gen() % 80;
    const int range = 1 + static_cast<int>(gen() % 6);
    std::vector<double> values(n);
    for (auto& v : values) v = static_cast<double>(static_cast<int>(gen() % range));
    const auto table = column_table(values);
    const auto disc = Discretizer::fit(table);
    const auto& fb = disc.feature(0);
    std::vector<double> expected;
    if (*std::min_element(values.begin(), values.end()) < *std::max_element(values.begin(), values.end())) {
      for (double q : {0.25, 0.5, 0.75}) {
        const double e = oracle_percentile(values, q);
        if (std::find(expected.begin(), expected.end(), e) == expected.end()) expected.push_back(e);
      }
    }
    EXPECT_EQ(fb.edges, expected);
    for (size_t i = 1; i < fb.edges.size(); ++i) EXPECT_LT(fb.edges[i - 1], fb.edges[i]);
    double total = 0.0;
    size_t counted = 0;
    for (const auto& b : fb.bins) {
      total += b.frequency;
      counted += b.count;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    EXPECT_EQ(counted, n);
    for (size_t r = 0; r < n; ++r) {
      const Condition c = disc.condition_for(size_t{0}, Cell{values[r]});
      EXPECT_TRUE(c.holds(table, r));
      // Exactly one bin's condition admits the value.
      size_t admitting = 0;
      for (size_t b = 0; b < fb.bins.size(); ++b) {
        double probe = values[r];
        if (b < fb.edges.size()) probe = fb.edges[b];
        else if (!fb.edges.empty()) probe = fb.edges.back() + 1.0;
        if (disc.condition_for(size_t{0}, Cell{probe}).holds(Cell{values[r]})) ++admitting;
      }
      EXPECT_EQ(admitting, 1u);
    }
  }
}

}  // namespace
}  // namespace blindspot
