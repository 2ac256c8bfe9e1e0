#include "gsd/stats.hpp"

#include "gsd/error.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace gsd {

double mean(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double stddev(std::span<const double> values) {
  if (values.size() < 2) return 0.0;
  const double m = mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - m) * (v - m);
  return std::sqrt(ss / static_cast<double>(values.size() - 1));
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t start = 0;
  while (start < order.size()) {
    std::size_t end = start + 1;
    while (end < order.size() && values[order[end]] == values[order[start]]) ++end;
    const double rank = 0.5 * static_cast<double>(start + end - 1) + 1.0;
    for (std::size_t k = start; k < end; ++k) ranks[order[k]] = rank;
    start = end;
  }
  return ranks;
}

double pearson(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DimensionError("correlation: inputs have lengths " + std::to_string(a.size()) + " and " +
                         std::to_string(b.size()));
  }
  if (a.size() < 2) throw DegenerateError("correlation: need at least 2 pairs");
  const double ma = mean(a);
  const double mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) throw DegenerateError("correlation undefined: an input list is constant");
  return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DimensionError("spearman: inputs have lengths " + std::to_string(a.size()) + " and " +
                         std::to_string(b.size()));
  }
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  return pearson(ra, rb);
}

TrendTest spearman_trend_test(std::span<const double> x, std::span<const double> y) {
  TrendTest out;
  out.n = x.size();
  if (out.n < 3) throw DegenerateError("trend test: need at least 3 points");
  out.rho = spearman(x, y);
  if (out.rho >= 1.0) {
    out.p_value = 0.0;
    return out;
  }
  if (out.rho <= -1.0) {
    out.p_value = 1.0;
    return out;
  }
  const double df = static_cast<double>(out.n - 2);
  const double t = out.rho * std::sqrt(df / (1.0 - out.rho * out.rho));
  boost::math::students_t dist(df);
  out.p_value = boost::math::cdf(boost::math::complement(dist, t));
  return out;
}

}  // namespace gsd
