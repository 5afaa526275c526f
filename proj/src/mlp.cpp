#include "lumen/mlp.hpp"

#include "lumen/errors.hpp"
#include "lumen/random.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

namespace lumen {

void MlpConfig::validate() const
{
  if (input_dim < 1)
    throw std::invalid_argument("mlp: input dimension must be positive");
  if (std::any_of(hidden.begin(), hidden.end(), [](int w) { return w <= 0; }))
    throw std::invalid_argument("mlp: hidden widths must be positive");
  if (!(adam.learning_rate > 0.0))
    throw std::invalid_argument("mlp: learning rate must be positive");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0 && adam.beta2 >= 0.0 && adam.beta2 < 1.0))
    throw std::invalid_argument("mlp: Adam betas must lie in [0, 1)");
  if (!(adam.epsilon > 0.0))
    throw std::invalid_argument("mlp: Adam epsilon must be positive");
  if (epochs < 0)
    throw std::invalid_argument("mlp: epochs must be >= 0");
  if (batch_size < 1)
    throw std::invalid_argument("mlp: batch size must be >= 1");
}

MlpConfig mlp_preset(std::string_view name, int input_dim)
{
  MlpConfig config;
  config.input_dim = input_dim;
  if (name == "mlp32x128")
    config.hidden = {32, 128};
  else if (name == "mlp64x256")
    config.hidden = {64, 256};
  else
    throw std::invalid_argument("unknown MLP preset '" + std::string(name) + "'");
  return config;
}

MlpModel init(const MlpConfig& config)
{
  config.validate();
  MlpModel model;
  model.config = config;
  auto rng = make_rng(config.seed, stream::init);
  int fan_in = config.input_dim;
  std::vector<int> widths = config.hidden;
  widths.push_back(1);
  for (int fan_out : widths) {
    auto layer = DenseLayer<double>::zeros(fan_in, fan_out);
    std::normal_distribution<double> he(0.0, std::sqrt(2.0 / fan_in));
    // Fill row by row so the draw order matches the row-major file layout.
    for (Eigen::Index r = 0; r < layer.weights.rows(); ++r)
      for (Eigen::Index c = 0; c < layer.weights.cols(); ++c)
        layer.weights(r, c) = he(rng);
    model.network.layers.push_back(std::move(layer));
    fan_in = fan_out;
  }
  model.norm.feature_mean = Eigen::VectorXd::Zero(config.input_dim);
  model.norm.feature_std = Eigen::VectorXd::Ones(config.input_dim);
  return model;
}

double forward(const MlpModel& model, const Eigen::VectorXd& normalized_features)
{
  return model.network.forward(normalized_features.transpose())(0);
}

MlpModel train(const MlpConfig& config, const SplitSets& splits)
{
  if (splits.train.empty())
    throw std::invalid_argument("train: empty training set");
  if (splits.train.arity() != config.input_dim)
    throw std::invalid_argument("train: dataset arity does not match the model input dimension");

  MlpModel model = init(config);
  if (config.epochs == 0)
    return model;

  model.norm = fit_norm(splits.train);
  const Eigen::MatrixXd x = apply_norm(model.norm, splits.train.features());
  const Eigen::VectorXd y = apply_target_norm(model.norm, splits.train.targets());
  Eigen::MatrixXd x_val;
  Eigen::VectorXd y_val;
  if (!splits.validation.empty()) {
    x_val = apply_norm(model.norm, splits.validation.features());
    y_val = apply_target_norm(model.norm, splits.validation.targets());
  }

  const auto n = static_cast<std::size_t>(x.rows());
  const auto batch = static_cast<std::size_t>(config.batch_size);
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  auto rng = make_rng(config.seed, stream::shuffle);
  auto state = AdamState::for_network(model.network);

  Eigen::MatrixXd xb;
  Eigen::VectorXd yb;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    double weighted_loss = 0.0;
    for (std::size_t begin = 0; begin < n; begin += batch) {
      const std::size_t end = std::min(n, begin + batch);
      const std::vector<Eigen::Index> rows(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                           order.begin() + static_cast<std::ptrdiff_t>(end));
      xb = x(rows, Eigen::all);
      yb = y(rows);
      auto [loss, grads] = loss_and_gradients(model.network, xb, yb);
      adam_step(state, model.network, grads, config.adam);
      weighted_loss += loss * static_cast<double>(end - begin);
    }
    model.log.train_mse.push_back(weighted_loss / static_cast<double>(n));
    if (x_val.rows() > 0) {
      const Eigen::VectorXd r = model.network.forward(x_val) - y_val;
      model.log.validation_mse.push_back(r.squaredNorm() / static_cast<double>(r.size()));
    }
  }
  return model;
}

double predict(const MlpModel& model, const Eigen::VectorXd& raw_features)
{
  if (raw_features.size() != model.config.input_dim)
    throw std::invalid_argument("predict: feature arity does not match the model");
  const Eigen::VectorXd normalized =
      (raw_features - model.norm.feature_mean).cwiseQuotient(model.norm.feature_std);
  return forward(model, normalized) * model.norm.target_std + model.norm.target_mean;
}

Eigen::VectorXd predict(const MlpModel& model, const Eigen::MatrixXd& raw_features)
{
  if (raw_features.cols() != model.config.input_dim)
    throw std::invalid_argument("predict: feature arity does not match the model");
  return invert_target_norm(model.norm,
                            model.network.forward(apply_norm(model.norm, raw_features)));
}

nlohmann::json mlp_to_json(const MlpModel& model)
{
  const auto& c = model.config;
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& l : model.network.layers) {
    std::vector<double> w;
    w.reserve(static_cast<std::size_t>(l.weights.size()));
    for (Eigen::Index r = 0; r < l.weights.rows(); ++r)
      for (Eigen::Index k = 0; k < l.weights.cols(); ++k)
        w.push_back(l.weights(r, k));
    layers.push_back({{"fan_in", l.fan_in()},
                      {"fan_out", l.fan_out()},
                      {"weights", w},
                      {"bias", std::vector<double>(l.bias.begin(), l.bias.end())}});
  }
  return {{"format", "lumen-rem/mlp"},
          {"version", kMlpFormatVersion},
          {"config",
           {{"input_dim", c.input_dim},
            {"hidden", c.hidden},
            {"learning_rate", c.adam.learning_rate},
            {"beta1", c.adam.beta1},
            {"beta2", c.adam.beta2},
            {"epsilon", c.adam.epsilon},
            {"epochs", c.epochs},
            {"batch_size", c.batch_size},
            {"seed", c.seed}}},
          {"norm", model.norm},
          {"layers", layers},
          {"training_log",
           {{"train_mse", model.log.train_mse}, {"validation_mse", model.log.validation_mse}}}};
}

MlpModel mlp_from_json(const nlohmann::json& doc)
{
  if (!doc.is_object() || doc.value("format", "") != "lumen-rem/mlp")
    throw ModelFormatError("not an MLP model document");
  if (!doc.contains("version") || !doc["version"].is_number_integer())
    throw ModelFormatError("MLP model document has no integer version");
  const int version = doc["version"].get<int>();
  if (version != kMlpFormatVersion)
    throw ModelVersionError("unsupported MLP model version " + std::to_string(version)
                            + " (expected " + std::to_string(kMlpFormatVersion) + ")");
  try {
    MlpModel model;
    const auto& c = doc.at("config");
    model.config.input_dim = c.at("input_dim").get<int>();
    model.config.hidden = c.at("hidden").get<std::vector<int>>();
    model.config.adam = {c.at("learning_rate").get<double>(), c.at("beta1").get<double>(),
                         c.at("beta2").get<double>(), c.at("epsilon").get<double>()};
    model.config.epochs = c.at("epochs").get<int>();
    model.config.batch_size = c.at("batch_size").get<int>();
    model.config.seed = c.at("seed").get<std::uint64_t>();
    model.norm = doc.at("norm").get<NormStats>();

    Eigen::Index expected_in = model.config.input_dim;
    for (const auto& l : doc.at("layers")) {
      const auto fan_in = l.at("fan_in").get<Eigen::Index>();
      const auto fan_out = l.at("fan_out").get<Eigen::Index>();
      const auto w = l.at("weights").get<std::vector<double>>();
      const auto b = l.at("bias").get<std::vector<double>>();
      if (fan_in != expected_in || static_cast<Eigen::Index>(w.size()) != fan_in * fan_out
          || static_cast<Eigen::Index>(b.size()) != fan_out)
        throw ModelFormatError("MLP layer shapes do not chain");
      auto layer = DenseLayer<double>::zeros(fan_in, fan_out);
      layer.weights = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                     Eigen::RowMajor>>(w.data(), fan_in, fan_out);
      layer.bias = Eigen::Map<const Eigen::RowVectorXd>(b.data(), fan_out);
      model.network.layers.push_back(std::move(layer));
      expected_in = fan_out;
    }
    if (model.network.layers.empty() || expected_in != 1)
      throw ModelFormatError("MLP must end in a single output neuron");
    if (model.norm.feature_mean.size() != model.config.input_dim)
      throw ModelFormatError("normalization statistics do not match the input dimension");
    const auto& log = doc.at("training_log");
    model.log.train_mse = log.at("train_mse").get<std::vector<double>>();
    model.log.validation_mse = log.at("validation_mse").get<std::vector<double>>();
    return model;
  } catch (const nlohmann::json::exception& e) {
    throw ModelFormatError(std::string("malformed MLP model: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ModelFormatError(std::string("malformed MLP model: ") + e.what());
  }
}

void save_model(const MlpModel& model, const std::string& path)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write " + path);
  out << mlp_to_json(model).dump() << '\n';
}

MlpModel load_model(const std::string& path)
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
  return mlp_from_json(doc);
}

} // namespace lumen
