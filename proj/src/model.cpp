#include "lumen/model.hpp"

#include "lumen/errors.hpp"

#include <fstream>

namespace lumen {

int arity(const Regressor& model)
{
  return std::visit(
      [](const auto& m) {
        if constexpr (std::is_same_v<std::decay_t<decltype(m)>, MlpModel>)
          return m.config.input_dim;
        else
          return m.arity;
      },
      model);
}

std::string describe(const Regressor& model)
{
  if (const auto* mlp = std::get_if<MlpModel>(&model)) {
    std::string name = "mlp";
    for (std::size_t i = 0; i < mlp->config.hidden.size(); ++i)
      name += (i ? "x" : "") + std::to_string(mlp->config.hidden[i]);
    return name;
  }
  switch (std::get<Forest>(model).mode) {
  case ForestMode::single:
    return "dt";
  case ForestMode::extra_trees:
    return "xt";
  case ForestMode::adaboost_r2:
    return "adaboost";
  }
  return "?";
}

double predict(const Regressor& model, const Eigen::VectorXd& raw_features)
{
  if (const auto* mlp = std::get_if<MlpModel>(&model))
    return predict(*mlp, raw_features);
  return predict_forest(std::get<Forest>(model), raw_features);
}

Eigen::VectorXd predict(const Regressor& model, const Eigen::MatrixXd& raw_features)
{
  if (const auto* mlp = std::get_if<MlpModel>(&model))
    return predict(*mlp, raw_features);
  return predict_forest(std::get<Forest>(model), raw_features);
}

bool is_mlp_kind(std::string_view kind) { return kind == "mlp32x128" || kind == "mlp64x256"; }

bool is_forest_kind(std::string_view kind)
{
  return kind == "dt" || kind == "xt" || kind == "adaboost";
}

Regressor train_regressor(const TrainOptions& options, const SplitSets& splits)
{
  const int input_dim = static_cast<int>(splits.train.arity());
  if (is_mlp_kind(options.kind)) {
    MlpConfig config = mlp_preset(options.kind, input_dim);
    config.epochs = options.epochs;
    config.batch_size = options.batch_size;
    config.seed = options.seed;
    return train(config, splits);
  }
  if (!is_forest_kind(options.kind))
    throw std::invalid_argument("unknown model kind '" + options.kind + "'");
  if (splits.train.empty())
    throw std::invalid_argument("train: empty training set");
  ForestParams params = options.forest;
  params.seed = options.seed;
  const Eigen::MatrixXd x = splits.train.features();
  const Eigen::VectorXd y = splits.train.targets();
  if (options.kind == "dt")
    return fit_decision_tree(x, y, params);
  if (options.kind == "xt")
    return fit_extra_trees(x, y, params);
  return fit_adaboost_r2(x, y, params);
}

void save_regressor(const Regressor& model, const std::string& path)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write " + path);
  if (const auto* mlp = std::get_if<MlpModel>(&model))
    out << mlp_to_json(*mlp).dump() << '\n';
  else
    out << forest_to_json(std::get<Forest>(model)).dump() << '\n';
}

Regressor load_regressor(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open " + path);
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ModelFormatError(path + ": " + e.what());
  }
  const std::string format = doc.is_object() ? doc.value("format", "") : "";
  if (format == "lumen-rem/mlp")
    return mlp_from_json(doc);
  if (format == "lumen-rem/forest")
    return forest_from_json(doc);
  throw ModelFormatError(path + ": unknown model format '" + format + "'");
}

} // namespace lumen
