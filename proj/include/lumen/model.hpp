#pragma once

#include "lumen/forest.hpp"
#include "lumen/mlp.hpp"

#include <string>
#include <string_view>
#include <variant>

namespace lumen {

/// Any trained RSS regressor.
using Regressor = std::variant<MlpModel, Forest>;

int arity(const Regressor& model);
std::string describe(const Regressor& model);

double predict(const Regressor& model, const Eigen::VectorXd& raw_features);
Eigen::VectorXd predict(const Regressor& model, const Eigen::MatrixXd& raw_features);

/// Model kinds accepted by the CLI: mlp32x128, mlp64x256, dt, xt, adaboost.
bool is_mlp_kind(std::string_view kind);
bool is_forest_kind(std::string_view kind);

struct TrainOptions {
  std::string kind = "mlp32x128";
  int epochs = 250;
  int batch_size = 128;
  ForestParams forest;
  std::uint64_t seed = 0;
};

/// Trains the requested kind. MLPs use all three splits; trees are fit on the
/// training split only.
Regressor train_regressor(const TrainOptions& options, const SplitSets& splits);

void save_regressor(const Regressor& model, const std::string& path);
/// Dispatches on the document's "format" field. Throws ModelFormatError or
/// ModelVersionError.
Regressor load_regressor(const std::string& path);

} // namespace lumen
