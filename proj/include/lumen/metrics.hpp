#pragma once

#include "lumen/dataset.hpp"
#include "lumen/model.hpp"

#include <Eigen/Core>
#include <json.hpp>

#include <optional>
#include <span>
#include <vector>

namespace lumen {

/// Mean absolute error.
double mae(std::span<const double> predictions, std::span<const double> truths);

/// Mean absolute percentage error, in percent. Throws if any truth is 0.
double mape(std::span<const double> predictions, std::span<const double> truths);

inline double mae(const Eigen::VectorXd& p, const Eigen::VectorXd& t)
{
  return mae(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())),
             std::span<const double>(t.data(), static_cast<std::size_t>(t.size())));
}

inline double mape(const Eigen::VectorXd& p, const Eigen::VectorXd& t)
{
  return mape(std::span<const double>(p.data(), static_cast<std::size_t>(p.size())),
              std::span<const double>(t.data(), static_cast<std::size_t>(t.size())));
}

/// Box-plot style summary. Quartiles use linear interpolation between order
/// statistics; sem is the sample standard deviation over sqrt(n), 0 for n = 1.
struct DistributionSummary {
  double min = 0.0;
  double q1 = 0.0;
  double median = 0.0;
  double q3 = 0.0;
  double max = 0.0;
  double mean = 0.0;
  double sem = 0.0;
  std::size_t n = 0;
};

DistributionSummary summarize(std::span<const double> values);

struct EvalReport {
  double mae_dbm = 0.0;
  std::optional<double> mape_percent; // absent when a truth value is 0
  std::size_t n_points = 0;
  std::vector<double> abs_errors;
  std::optional<double> mean_osnr_db;
};

EvalReport evaluate(const Regressor& model, const Dataset& reference);

void to_json(nlohmann::json& j, const DistributionSummary& s);
void to_json(nlohmann::json& j, const EvalReport& r);

} // namespace lumen
