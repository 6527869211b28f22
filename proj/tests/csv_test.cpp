#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "tripletbench/csv.hpp"

namespace csv = tripletbench::csv;

TEST(Csv, SplitKeepsEmptyCells) {
  const auto cells = csv::split("a,,b,");
  ASSERT_EQ(cells.size(), 4u);
  EXPECT_EQ(cells[0], "a");
  EXPECT_EQ(cells[1], "");
  EXPECT_EQ(cells[3], "");
}

TEST(Csv, LinesStripCarriageReturns) {
  const auto lines = csv::lines("1,2\r\n3,4\r\n");
  ASSERT_EQ(lines.size(), 2u);
  EXPECT_EQ(lines[0], "1,2");
  EXPECT_EQ(lines[1], "3,4");
}

TEST(Csv, ShortestFormatRoundTrips) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(gen);
    double back = -1;
    ASSERT_TRUE(csv::parse_double(csv::format_double(v), back));
    EXPECT_EQ(back, v);
  }
  EXPECT_EQ(csv::format_double(0.1), "0.1");
}

TEST(Csv, SixDigitDecimalsRoundTripExactly) {
  for (int i = 0; i <= 1000000; i += 997) {
    const std::string text = csv::format_fixed(i / 1e6, 6);
    double v = -1;
    ASSERT_TRUE(csv::parse_double(text, v));
    EXPECT_EQ(csv::format_fixed(v, 6), text);
  }
}

TEST(Csv, StrictParsing) {
  double v = 0;
  EXPECT_FALSE(csv::parse_double("", v));
  EXPECT_FALSE(csv::parse_double("0.5x", v));
  EXPECT_FALSE(csv::parse_double("abc", v));
  EXPECT_TRUE(csv::parse_double(" 0.25 ", v));
  EXPECT_EQ(v, 0.25);
  EXPECT_TRUE(csv::parse_double("+1", v));
  EXPECT_EQ(v, 1.0);
  EXPECT_TRUE(csv::parse_double("nan", v));
  EXPECT_TRUE(std::isnan(v));
  std::size_t n = 0;
  EXPECT_FALSE(csv::parse_size("-1", n));
  EXPECT_FALSE(csv::parse_size("1.5", n));
  EXPECT_TRUE(csv::parse_size("42", n));
  EXPECT_EQ(n, 42u);
}

TEST(Csv, FixedFormatting) {
  EXPECT_EQ(csv::format_fixed(62.538, 1), "62.5");
  EXPECT_EQ(csv::format_fixed(18.92, 1), "18.9");
  EXPECT_EQ(csv::format_fixed(0.0, 1), "0.0");
}
