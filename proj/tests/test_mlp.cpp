#include "lumen/errors.hpp"
#include "lumen/mlp.hpp"

#include "oracles/adam_recurrence.hpp"
#include "oracles/finite_diff.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace lumen;

namespace {

Network random_net(const std::vector<int>& widths, std::mt19937_64& rng)
{
  std::normal_distribution<double> n(0.0, 0.7);
  Network net;
  for (std::size_t i = 0; i + 1 < widths.size(); ++i) {
    auto layer = DenseLayer<double>::zeros(widths[i], widths[i + 1]);
    for (Eigen::Index k = 0; k < layer.weights.size(); ++k)
      layer.weights.data()[k] = n(rng);
    for (Eigen::Index k = 0; k < layer.bias.size(); ++k)
      layer.bias(k) = n(rng);
    net.layers.push_back(layer);
  }
  return net;
}

Dataset linear_dataset(std::size_t n, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Dataset d;
  d.feature_names = fixed_feature_names();
  for (std::size_t i = 0; i < n; ++i) {
    const double x = u(rng) * 5, y = u(rng) * 5, z = u(rng) * 1.7;
    d.rows.push_back({-20 + 0.8 * x - 0.5 * y + 1.5 * z, x, y, z, {}, {}});
  }
  return d;
}

} // namespace

TEST(MlpInit, ShapesAndDeterminism)
{
  MlpConfig cfg = mlp_preset("mlp32x128", 3);
  cfg.seed = 4;
  const MlpModel m = init(cfg);
  ASSERT_EQ(m.network.layers.size(), 3u);
  EXPECT_EQ(m.network.layers[0].weights.rows(), 3);
  EXPECT_EQ(m.network.layers[0].weights.cols(), 32);
  EXPECT_EQ(m.network.layers[1].weights.rows(), 32);
  EXPECT_EQ(m.network.layers[1].weights.cols(), 128);
  EXPECT_EQ(m.network.layers[2].weights.rows(), 128);
  EXPECT_EQ(m.network.layers[2].weights.cols(), 1);
  for (const auto& l : m.network.layers)
    EXPECT_TRUE(l.bias.isZero());
  const MlpModel again = init(cfg);
  for (std::size_t i = 0; i < 3; ++i)
    EXPECT_EQ(again.network.layers[i].weights, m.network.layers[i].weights);

  const Eigen::MatrixXd& w = m.network.layers[1].weights;
  const double mean = w.mean();
  const double sd = std::sqrt((w.array() - mean).square().sum() / static_cast<double>(w.size() - 1));
  EXPECT_LT(std::abs(sd - std::sqrt(2.0 / 32)) / std::sqrt(2.0 / 32), 0.10);

  const MlpConfig big = mlp_preset("mlp64x256", 5);
  EXPECT_EQ(big.hidden, (std::vector<int>{64, 256}));
  EXPECT_EQ(big.input_dim, 5);
  EXPECT_THROW(mlp_preset("mlp1x1", 3), std::invalid_argument);
}

TEST(MlpForward, ZeroAndReluGate)
{
  MlpConfig cfg;
  cfg.hidden = {4, 4};
  MlpModel m = init(cfg);
  m.network = m.network.zeros_like();
  EXPECT_EQ(forward(m, Eigen::Vector3d(1.0, -2.0, 3.0)), 0.0);

  Network gate;
  gate.layers.push_back({Eigen::MatrixXd::Ones(1, 1), Eigen::RowVectorXd::Zero(1)});
  gate.layers.push_back({Eigen::MatrixXd::Ones(1, 1), Eigen::RowVectorXd::Zero(1)});
  EXPECT_EQ(gate.forward(Eigen::MatrixXd::Constant(1, 1, -5.0))(0), 0.0);
  EXPECT_EQ(gate.forward(Eigen::MatrixXd::Constant(1, 1, 5.0))(0), 5.0);
}

TEST(MlpForward, HandBuiltTwoTwoOne)
{
  Network net;
  Eigen::MatrixXd w1(2, 2);
  w1 << 1.0, -1.0, 2.0, 0.5;
  Eigen::RowVectorXd b1(2);
  b1 << 0.5, -1.0;
  Eigen::MatrixXd w2(2, 1);
  w2 << 3.0, -2.0;
  Eigen::RowVectorXd b2(1);
  b2 << 0.25;
  net.layers = {{w1, b1}, {w2, b2}};
  // x = (1, 2): hidden pre = (1 + 4 + 0.5, -1 + 1 - 1) = (5.5, -1) -> relu (5.5, 0)
  // output = 3 * 5.5 + 0.25 = 16.75
  Eigen::MatrixXd x(1, 2);
  x << 1.0, 2.0;
  EXPECT_DOUBLE_EQ(net.forward(x)(0), 16.75);
  EXPECT_THROW(net.forward(Eigen::MatrixXd::Zero(1, 3)), std::invalid_argument);
}

TEST(MlpGradients, MatchFiniteDifferences)
{
  std::mt19937_64 rng(77);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int draw = 0; draw < 20; ++draw) {
    const Network net = random_net({5, 8, 8, 1}, rng);
    Eigen::MatrixXd x(6, 5);
    Eigen::VectorXd y(6);
    for (Eigen::Index i = 0; i < x.size(); ++i)
      x.data()[i] = n(rng);
    for (Eigen::Index i = 0; i < y.size(); ++i)
      y(i) = n(rng);
    const auto [loss, grads] = loss_and_gradients(net, x, y);
    EXPECT_NEAR(loss, oracle::mse(net, x, y), 1e-12 * std::max(1.0, loss));
    const Network numeric = oracle::numeric_gradients(net, x, y);
    double num = 0.0, den = 0.0;
    for (std::size_t l = 0; l < net.layers.size(); ++l) {
      num += (grads.layers[l].weights - numeric.layers[l].weights).squaredNorm()
             + (grads.layers[l].bias - numeric.layers[l].bias).squaredNorm();
      den += grads.layers[l].weights.squaredNorm() + numeric.layers[l].weights.squaredNorm()
             + grads.layers[l].bias.squaredNorm() + numeric.layers[l].bias.squaredNorm();
    }
    EXPECT_LT(std::sqrt(num) / std::sqrt(den), 1e-5) << "draw " << draw;
  }
}

TEST(MlpGradients, PerfectFitAndResidualSign)
{
  std::mt19937_64 rng(3);
  const Network net = random_net({3, 4, 1}, rng);
  Eigen::MatrixXd x = Eigen::MatrixXd::Random(5, 3);
  const Eigen::VectorXd y = net.forward(x);
  const auto [loss, grads] = loss_and_gradients(net, x, y);
  EXPECT_EQ(loss, 0.0);
  for (const auto& l : grads.layers) {
    EXPECT_TRUE(l.weights.isZero());
    EXPECT_TRUE(l.bias.isZero());
  }
  // Mirror the targets around the outputs: residuals flip sign.
  const Eigen::VectorXd up = y.array() + 0.3;
  const Eigen::VectorXd down = y.array() - 0.3;
  const auto a = loss_and_gradients(net, x, up);
  const auto b = loss_and_gradients(net, x, down);
  EXPECT_NEAR(a.first, b.first, 1e-15);
  EXPECT_NEAR(a.second.layers.back().bias(0), -b.second.layers.back().bias(0), 1e-15);
}

TEST(Adam, MatchesScalarRecurrence)
{
  Network w;
  w.layers.push_back({Eigen::MatrixXd::Constant(1, 1, 1.0), Eigen::RowVectorXd::Zero(1)});
  AdamState state = AdamState::for_network(w);
  const AdamConfig cfg;
  const auto expected = oracle::adam_on_square(1.0, 5);
  for (int t = 0; t < 5; ++t) {
    Network g = w.zeros_like();
    g.layers[0].weights(0, 0) = 2.0 * w.layers[0].weights(0, 0);
    adam_step(state, w, g, cfg);
    EXPECT_NEAR(w.layers[0].weights(0, 0), expected[static_cast<std::size_t>(t)], 1e-12);
  }
  EXPECT_EQ(state.t, 5);
  EXPECT_NEAR(1.0 - expected[0], cfg.learning_rate, 1e-10);
}

TEST(Adam, FirstStepAndZeroGradient)
{
  std::mt19937_64 rng(8);
  Network p = random_net({3, 5, 1}, rng);
  const Network before = p;
  AdamState state = AdamState::for_network(p);
  Network g = random_net({3, 5, 1}, rng);
  adam_step(state, p, g, AdamConfig{});
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    const Eigen::ArrayXXd step = p.layers[l].weights - before.layers[l].weights;
    const Eigen::ArrayXXd sign = g.layers[l].weights.array().sign();
    EXPECT_LT((step + 0.001 * sign).abs().maxCoeff(), 1e-7);
  }

  Network q = before;
  AdamState fresh = AdamState::for_network(q);
  adam_step(fresh, q, q.zeros_like(), AdamConfig{});
  EXPECT_EQ(fresh.t, 1);
  for (std::size_t l = 0; l < q.layers.size(); ++l)
    EXPECT_EQ(q.layers[l].weights, before.layers[l].weights);
}

TEST(MlpTrain, ZeroEpochsAndDeterminism)
{
  const auto splits = split(linear_dataset(200, 1), 2);
  MlpConfig cfg;
  cfg.hidden = {8, 8};
  cfg.epochs = 0;
  cfg.seed = 3;
  const MlpModel zero = train(cfg, splits);
  EXPECT_TRUE(zero.log.train_mse.empty());
  const MlpModel fresh = init(cfg);
  for (std::size_t i = 0; i < fresh.network.layers.size(); ++i)
    EXPECT_EQ(zero.network.layers[i].weights, fresh.network.layers[i].weights);

  cfg.epochs = 5;
  cfg.batch_size = 16;
  const MlpModel a = train(cfg, splits);
  const MlpModel b = train(cfg, splits);
  EXPECT_EQ(a.log.train_mse.size(), 5u);
  EXPECT_EQ(a.log.validation_mse.size(), 5u);
  for (std::size_t i = 0; i < a.network.layers.size(); ++i)
    EXPECT_EQ(a.network.layers[i].weights, b.network.layers[i].weights);

  SplitSets empty = splits;
  empty.train.rows.clear();
  EXPECT_THROW(train(cfg, empty), std::invalid_argument);
}

TEST(MlpTrain, LearnsLinearTarget)
{
  const auto splits = split(linear_dataset(1000, 4), 5);
  MlpConfig cfg;
  cfg.hidden = {32, 32};
  cfg.epochs = 500;
  cfg.batch_size = 32;
  cfg.seed = 1;
  const MlpModel m = train(cfg, splits);
  EXPECT_LT(m.log.train_mse.back(), 1e-3);
}

TEST(MlpTrain, SmoothedLossDecreasesOnSimulatedData)
{
  const Dataset data = generate_fixed(preset_scene("mid", 1), 25, 0.2, 21, "mid");
  const auto splits = split(subsample(data, 12500, 22), 22);
  MlpConfig cfg = mlp_preset("mlp32x128", 3);
  cfg.seed = 22;
  const MlpModel m = train(cfg, splits);
  ASSERT_EQ(m.log.train_mse.size(), 250u);
  std::vector<double> window;
  for (std::size_t w = 0; w < 25; ++w) {
    double s = 0.0;
    for (std::size_t k = 0; k < 10; ++k)
      s += m.log.train_mse[10 * w + k];
    window.push_back(s / 10);
  }
  for (std::size_t w = 1; w < window.size(); ++w)
    EXPECT_LE(window[w], window[w - 1]) << "window " << w;
}

TEST(MlpPredict, BatchEqualsScalarAndOverfit)
{
  const Dataset d = linear_dataset(40, 9);
  const auto splits = split(d, 1);
  MlpConfig cfg;
  cfg.hidden = {32, 32};
  cfg.epochs = 800;
  cfg.batch_size = 8;
  const MlpModel m = train(cfg, splits);

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  Eigen::MatrixXd x(1000, 3);
  for (Eigen::Index i = 0; i < x.size(); ++i)
    x.data()[i] = u(rng);
  const Eigen::VectorXd batch = predict(m, x);
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    EXPECT_NEAR(batch(i), predict(m, Eigen::VectorXd(x.row(i).transpose())), 1e-12);

  for (const auto& r : splits.train.rows)
    EXPECT_NEAR(predict(m, feature_vector(r)), r.rss_dbm, 0.1);
  EXPECT_THROW(predict(m, Eigen::VectorXd(Eigen::VectorXd::Zero(5))), std::invalid_argument);
}

TEST(MlpModelFile, RoundTripAndErrors)
{
  const auto splits = split(linear_dataset(100, 3), 3);
  MlpConfig cfg;
  cfg.hidden = {6, 5};
  cfg.epochs = 3;
  const MlpModel m = train(cfg, splits);
  const auto dir = testing_util::scratch_dir("mlp_file");
  const auto path = (dir / "m.json").string();
  save_model(m, path);
  const MlpModel back = load_model(path);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  for (int k = 0; k < 100; ++k) {
    const Eigen::Vector3d x(u(rng), u(rng), u(rng));
    EXPECT_EQ(predict(back, Eigen::VectorXd(x)), predict(m, Eigen::VectorXd(x)));
  }
  EXPECT_EQ(back.log.train_mse, m.log.train_mse);

  const std::string text = testing_util::slurp(path);
  std::ofstream(dir / "trunc.json") << text.substr(0, text.size() / 2);
  EXPECT_THROW(load_model((dir / "trunc.json").string()), ModelFormatError);

  nlohmann::json doc = mlp_to_json(m);
  doc["version"] = 0;
  std::ofstream(dir / "v0.json") << doc.dump();
  EXPECT_THROW(load_model((dir / "v0.json").string()), ModelVersionError);

  doc = mlp_to_json(m);
  doc["layers"] = nlohmann::json::array();
  EXPECT_THROW(mlp_from_json(doc), ModelFormatError);
}
