#pragma once

// Plain reference versions of the metrics.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace oracle {

/// Two passes: collect the absolute deviations, then sum them in Kahan form.
inline double mae(const std::vector<double>& p, const std::vector<double>& t)
{
  std::vector<double> dev(p.size());
  for (std::size_t i = 0; i < p.size(); ++i)
    dev[i] = std::abs(p[i] - t[i]);
  double sum = 0.0, c = 0.0;
  for (double d : dev) {
    const double y = d - c;
    const double s = sum + y;
    c = (s - sum) - y;
    sum = s;
  }
  return sum / static_cast<double>(dev.size());
}

/// Weighted median by enumeration: sort by value, return the first value
/// whose running weight reaches half of the total.
inline double weighted_median(std::vector<double> values, std::vector<double> weights)
{
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double running = 0.0;
  for (auto i : order) {
    running += weights[i];
    if (running >= 0.5 * total)
      return values[i];
  }
  return values[order.back()];
}

} // namespace oracle
