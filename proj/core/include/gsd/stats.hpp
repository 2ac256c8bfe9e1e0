#pragma once

// Small descriptive and rank statistics used by the experiments.

#include <span>
#include <vector>

namespace gsd {

double mean(std::span<const double> values);

/// Sample standard deviation (n - 1 denominator); 0 for fewer than 2 values.
double stddev(std::span<const double> values);

/// Ranks starting at 1; tied values share their average rank.
std::vector<double> average_ranks(std::span<const double> values);

/// Pearson correlation. Throws DegenerateError if either input is constant.
double pearson(std::span<const double> a, std::span<const double> b);

/// Spearman rank correlation (Pearson on average ranks).
double spearman(std::span<const double> a, std::span<const double> b);

/// One-sided p-value for a positive monotone trend: Spearman's rho between
/// x and y, tested with t = rho sqrt((n - 2) / (1 - rho^2)) on n - 2 degrees
/// of freedom.
struct TrendTest {
  double rho = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
};

TrendTest spearman_trend_test(std::span<const double> x, std::span<const double> y);

}  // namespace gsd
