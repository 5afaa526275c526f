#include "lumen/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace lumen {

namespace {

void check_pair(std::span<const double> p, std::span<const double> t, const char* what)
{
  if (p.empty() || p.size() != t.size())
    throw std::invalid_argument(std::string(what) + ": need equal-length non-empty inputs");
}

double quantile_sorted(const std::vector<double>& sorted, double q)
{
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

} // namespace

double mae(std::span<const double> predictions, std::span<const double> truths)
{
  check_pair(predictions, truths, "mae");
  double acc = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i)
    acc += std::abs(predictions[i] - truths[i]);
  return acc / static_cast<double>(predictions.size());
}

double mape(std::span<const double> predictions, std::span<const double> truths)
{
  check_pair(predictions, truths, "mape");
  double acc = 0.0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (truths[i] == 0.0)
      throw std::invalid_argument("mape: undefined for a zero truth value");
    acc += std::abs(predictions[i] - truths[i]) / std::abs(truths[i]);
  }
  return 100.0 * acc / static_cast<double>(predictions.size());
}

DistributionSummary summarize(std::span<const double> values)
{
  if (values.empty())
    throw std::invalid_argument("summarize: no values");
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  DistributionSummary s;
  s.n = sorted.size();
  s.min = sorted.front();
  s.max = sorted.back();
  s.q1 = quantile_sorted(sorted, 0.25);
  s.median = quantile_sorted(sorted, 0.5);
  s.q3 = quantile_sorted(sorted, 0.75);
  double sum = 0.0;
  for (double v : sorted)
    sum += v;
  s.mean = sum / static_cast<double>(s.n);
  if (s.n > 1) {
    double ss = 0.0;
    for (double v : sorted)
      ss += (v - s.mean) * (v - s.mean);
    s.sem = std::sqrt(ss / static_cast<double>(s.n - 1)) / std::sqrt(static_cast<double>(s.n));
  }
  return s;
}

EvalReport evaluate(const Regressor& model, const Dataset& reference)
{
  if (reference.empty())
    throw std::invalid_argument("evaluate: empty reference set");
  if (reference.arity() != arity(model))
    throw std::invalid_argument("evaluate: reference arity does not match the model");
  const Eigen::VectorXd truth = reference.targets();
  const Eigen::VectorXd pred = predict(model, reference.features());

  EvalReport report;
  report.n_points = reference.size();
  report.mae_dbm = mae(pred, truth);
  if ((truth.array() != 0.0).all())
    report.mape_percent = mape(pred, truth);
  report.abs_errors.resize(reference.size());
  for (std::size_t i = 0; i < reference.size(); ++i)
    report.abs_errors[i] = std::abs(pred(static_cast<Eigen::Index>(i)) - truth(static_cast<Eigen::Index>(i)));
  if (reference.origin.mean_osnr_db && std::isfinite(*reference.origin.mean_osnr_db))
    report.mean_osnr_db = reference.origin.mean_osnr_db;
  return report;
}

void to_json(nlohmann::json& j, const DistributionSummary& s)
{
  j = {{"min", s.min},   {"q1", s.q1},     {"median", s.median}, {"q3", s.q3},
       {"max", s.max},   {"mean", s.mean}, {"sem", s.sem},       {"n", s.n}};
}

void to_json(nlohmann::json& j, const EvalReport& r)
{
  j = {{"mae_dbm", r.mae_dbm},
       {"n_points", r.n_points},
       {"abs_error_summary", summarize(r.abs_errors)},
       {"abs_errors", r.abs_errors}};
  j["mape_percent"] = r.mape_percent ? nlohmann::json(*r.mape_percent) : nlohmann::json();
  if (r.mean_osnr_db)
    j["mean_osnr_db"] = *r.mean_osnr_db;
}

} // namespace lumen
