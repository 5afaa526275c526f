#pragma once

// Brute-force regression split: try every midpoint of every feature, score by
// the summed squared error of both sides computed from scratch.

#include <Eigen/Core>

#include <algorithm>
#include <limits>
#include <vector>

namespace oracle {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double sse = std::numeric_limits<double>::infinity();
};

inline double sse(const std::vector<double>& v)
{
  if (v.empty())
    return 0.0;
  double mean = 0.0;
  for (double x : v)
    mean += x;
  mean /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v)
    s += (x - mean) * (x - mean);
  return s;
}

/// Lowest feature, then lowest threshold, among splits within rel_tol of the
/// best squared error. Only splits leaving min_leaf rows per side count.
inline Split best_split(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, int min_leaf = 1,
                        double rel_tol = 1e-9)
{
  std::vector<Split> all;
  for (int f = 0; f < x.cols(); ++f) {
    std::vector<double> values(x.col(f).data(), x.col(f).data() + x.rows());
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    for (std::size_t k = 0; k + 1 < values.size(); ++k) {
      const double t = 0.5 * (values[k] + values[k + 1]);
      std::vector<double> left, right;
      for (Eigen::Index i = 0; i < x.rows(); ++i)
        (x(i, f) < t ? left : right).push_back(y(i));
      if (static_cast<int>(left.size()) < min_leaf || static_cast<int>(right.size()) < min_leaf)
        continue;
      all.push_back({f, t, sse(left) + sse(right)});
    }
  }
  Split best;
  for (const auto& s : all)
    best.sse = std::min(best.sse, s.sse);
  const double scale = std::max(sse(std::vector<double>(y.data(), y.data() + y.size())), 1e-300);
  for (const auto& s : all) {
    if (s.sse - best.sse > rel_tol * scale)
      continue;
    if (best.feature < 0 || s.feature < best.feature
        || (s.feature == best.feature && s.threshold < best.threshold)) {
      best.feature = s.feature;
      best.threshold = s.threshold;
    }
  }
  return best;
}

} // namespace oracle
