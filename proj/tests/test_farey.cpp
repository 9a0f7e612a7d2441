#include <gtest/gtest.h>

#include <cmath>

#include "truetrees/analysis.hpp"
#include "truetrees/farey.hpp"

using namespace truetrees;

TEST(Farey, RootAndFirstGeneration) {
  const auto r = farey_root();
  EXPECT_TRUE(r.v[2].is_infinite());
  EXPECT_TRUE(farey_valid(r));
  const auto t = farey_triangle(LRWord::parse("1"));
  EXPECT_EQ(t.v[0].to_string(), "0/1");
  EXPECT_EQ(t.v[1].to_string(), "1/2");
  EXPECT_EQ(t.v[2].to_string(), "1/1");
  EXPECT_DOUBLE_EQ(farey_diameter(t), 1.0);
}

TEST(Farey, MediantsAndNesting) {
  const auto t = farey_triangle(LRWord::parse("1LRRL"));
  EXPECT_TRUE(farey_valid(t));
  LRWord w = LRWord::parse("1");
  auto prev = farey_triangle(w);
  for (char c : std::string("LRRLLLRLR")) {
    const auto next = farey_descend(prev, c);
    EXPECT_TRUE(farey_valid(next));
    EXPECT_TRUE(farey_nested(prev, next));
    EXPECT_EQ(next.v[1], mediant(next.v[0], next.v[2]));
    prev = next;
  }
  EXPECT_THROW(farey_descend(prev, 'X'), Error);
}

TEST(Farey, PureRunsExact) {
  for (int k = 1; k <= 64; ++k) {
    LRWord w;
    w.turns.assign(k, 'L');
    EXPECT_NEAR(farey_diameter(w) * (k + 1), 1.0, 1e-12) << k;
    w.turns.assign(k, 'R');
    EXPECT_NEAR(farey_diameter(w) * (k + 1), 1.0, 1e-12) << k;
  }
}

TEST(Farey, DeepWordsStayExact) {
  LRWord w;
  for (int i = 0; i < 200; ++i) w.turns.push_back(i % 3 ? 'L' : 'R');
  const auto t = farey_triangle(w);
  EXPECT_TRUE(farey_valid(t));
  EXPECT_GT(t.v[2].q, BigInt(1) << 64);
}

TEST(Farey, DiskPoints) {
  EXPECT_EQ(farey_disk_point(ExtRational::infinity()), Complex(1.0));
  EXPECT_NEAR(std::abs(farey_disk_point({0, 1}) + 1.0), 0, 1e-15);
  EXPECT_NEAR(std::abs(farey_disk_point({1, 1}) - Complex(0, -1)), 0, 1e-15);
  EXPECT_NEAR(std::abs(farey_disk_point({3, 7})), 1.0, 1e-15);
}

TEST(Farey, DistortionAndEstimate) {
  EXPECT_NEAR(farey_distortion(LRWord::parse("1L")), 0.5, 1e-15);
  EXPECT_THROW(farey_distortion(LRWord::parse("1")), Error);
  EXPECT_NEAR(word_estimate(LRWord::parse("1LLRL")), std::log(3.0) + 2 * std::log(2.0), 1e-15);
}

TEST(Farey, RatioFitBounded) {
  const auto fit = farey_ratio_fit(10000, 40, 1);
  EXPECT_EQ(fit.samples, 10000);
  EXPECT_GT(fit.lo, 0);
  EXPECT_LE(fit.spread(), 10);
  const auto report = farey_report(2000, 40, 3, 64);
  EXPECT_TRUE(report.all_pass());
}

TEST(Farey, TableCsv) {
  const auto csv = farey_table_csv(2);
  int lines = 0;
  for (char c : csv) lines += c == '\n';
  EXPECT_EQ(lines, 1 + 1 + 2 + 4);
  EXPECT_NE(csv.find("1LR,1/3,2/5,1/2"), std::string::npos);
}
