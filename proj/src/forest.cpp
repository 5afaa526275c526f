#include "lumen/forest.hpp"

#include "lumen/errors.hpp"
#include "lumen/parallel.hpp"
#include "lumen/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>

namespace lumen {

namespace {

struct Split {
  int feature = -1;
  double threshold = 0.0;
  double score = 0.0; // between-group sum of squares, larger is better
};

bool improves(double score, const std::optional<Split>& best)
{
  return !best || score > best->score + 1e-12 * std::abs(best->score);
}

class TreeBuilder {
public:
  TreeBuilder(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const TreeParams& params,
              Rng* rng)
      : x_(x), y_(y), params_(params), rng_(rng), index_(static_cast<std::size_t>(x.rows()))
  {
    std::iota(index_.begin(), index_.end(), 0);
  }

  Tree build()
  {
    grow(0, index_.size(), 0);
    return std::move(tree_);
  }

private:
  int grow(std::size_t begin, std::size_t end, int depth)
  {
    const std::size_t n = end - begin;
    double sum = 0.0, lo = y_(index_[begin]), hi = lo;
    for (std::size_t k = begin; k < end; ++k) {
      const double v = y_(index_[k]);
      sum += v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back({});
    tree_.nodes.back().value = sum / static_cast<double>(n);

    const auto min_leaf = static_cast<std::size_t>(params_.min_samples_leaf);
    if ((params_.max_depth > 0 && depth >= params_.max_depth)
        || n < static_cast<std::size_t>(params_.min_samples_split) || n < 2 * min_leaf || lo == hi)
      return id;

    const double mean = sum / static_cast<double>(n);
    const auto split = rng_ ? random_split(begin, end, mean) : best_split(begin, end, mean);
    if (!split)
      return id;

    const auto mid = std::partition(index_.begin() + static_cast<std::ptrdiff_t>(begin),
                                    index_.begin() + static_cast<std::ptrdiff_t>(end),
                                    [&](Eigen::Index i) {
                                      return x_(i, split->feature) < split->threshold;
                                    });
    const auto cut = static_cast<std::size_t>(mid - index_.begin());
    const int left = grow(begin, cut, depth + 1);
    const int right = grow(cut, end, depth + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(id)];
    node.feature = split->feature;
    node.threshold = split->threshold;
    node.left = left;
    node.right = right;
    return id;
  }

  std::optional<Split> best_split(std::size_t begin, std::size_t end, double mean)
  {
    const std::size_t n = end - begin;
    const auto min_leaf = static_cast<std::size_t>(params_.min_samples_leaf);
    std::vector<std::pair<double, double>> column(n); // (feature value, centered target)
    std::optional<Split> best;
    for (int f = 0; f < static_cast<int>(x_.cols()); ++f) {
      for (std::size_t k = 0; k < n; ++k) {
        const auto i = index_[begin + k];
        column[k] = {x_(i, f), y_(i) - mean};
      }
      std::sort(column.begin(), column.end(),
                [](const auto& a, const auto& b) { return a.first < b.first; });
      double total = 0.0;
      for (const auto& c : column)
        total += c.second;
      double left_sum = 0.0;
      for (std::size_t k = 1; k < n; ++k) {
        left_sum += column[k - 1].second;
        if (column[k - 1].first == column[k].first)
          continue;
        if (k < min_leaf || n - k < min_leaf)
          continue;
        const double right_sum = total - left_sum;
        const double score = left_sum * left_sum / static_cast<double>(k)
                             + right_sum * right_sum / static_cast<double>(n - k);
        if (improves(score, best)) {
          double threshold = 0.5 * (column[k - 1].first + column[k].first);
          if (!(threshold > column[k - 1].first))
            threshold = column[k].first;
          best = Split{f, threshold, score};
        }
      }
    }
    return best;
  }

  std::optional<Split> random_split(std::size_t begin, std::size_t end, double mean)
  {
    const auto min_leaf = static_cast<std::size_t>(params_.min_samples_leaf);
    std::optional<Split> best;
    for (int f = 0; f < static_cast<int>(x_.cols()); ++f) {
      double lo = x_(index_[begin], f), hi = lo;
      for (std::size_t k = begin; k < end; ++k) {
        lo = std::min(lo, x_(index_[k], f));
        hi = std::max(hi, x_(index_[k], f));
      }
      if (lo == hi)
        continue;
      const double threshold = std::uniform_real_distribution<double>(lo, hi)(*rng_);
      double left_sum = 0.0, right_sum = 0.0;
      std::size_t left_n = 0;
      for (std::size_t k = begin; k < end; ++k) {
        const auto i = index_[k];
        const double c = y_(i) - mean;
        if (x_(i, f) < threshold) {
          left_sum += c;
          ++left_n;
        } else {
          right_sum += c;
        }
      }
      const std::size_t right_n = (end - begin) - left_n;
      if (left_n < std::max<std::size_t>(min_leaf, 1) || right_n < std::max<std::size_t>(min_leaf, 1))
        continue;
      const double score = left_sum * left_sum / static_cast<double>(left_n)
                           + right_sum * right_sum / static_cast<double>(right_n);
      if (improves(score, best))
        best = Split{f, threshold, score};
    }
    return best;
  }

  const Eigen::MatrixXd& x_;
  const Eigen::VectorXd& y_;
  TreeParams params_;
  Rng* rng_;
  std::vector<Eigen::Index> index_;
  Tree tree_;
};

void check_training_data(const Eigen::MatrixXd& x, const Eigen::VectorXd& y)
{
  if (x.rows() == 0)
    throw std::invalid_argument("tree fitting needs at least one row");
  if (x.rows() != y.size())
    throw std::invalid_argument("feature rows and targets disagree in length");
}

double mean_of_trees(const std::vector<Tree>& trees, const Eigen::VectorXd& x)
{
  double acc = 0.0;
  for (const auto& t : trees)
    acc += t.predict(x);
  return acc / static_cast<double>(trees.size());
}

std::vector<Tree> grow_random_trees(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                    const TreeParams& params, int count, std::uint64_t seed)
{
  std::vector<Tree> trees(static_cast<std::size_t>(count));
  parallel_for(trees.size(), [&](std::size_t t) {
    trees[t] = fit_random_tree(x, y, params, derive_seed(seed, stream::tree, t));
  });
  return trees;
}

} // namespace

int Tree::depth() const
{
  std::vector<int> level(nodes.size(), 0);
  int deepest = 0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    deepest = std::max(deepest, level[i]);
    if (!nodes[i].is_leaf()) {
      level[static_cast<std::size_t>(nodes[i].left)] = level[i] + 1;
      level[static_cast<std::size_t>(nodes[i].right)] = level[i] + 1;
    }
  }
  return deepest;
}

std::size_t Tree::leaf_count() const
{
  return static_cast<std::size_t>(
      std::count_if(nodes.begin(), nodes.end(), [](const TreeNode& n) { return n.is_leaf(); }));
}

void TreeParams::validate() const
{
  if (max_depth < 0)
    throw std::invalid_argument("max_depth must be >= 0 (0 means unlimited)");
  if (min_samples_split < 2)
    throw std::invalid_argument("min_samples_split must be >= 2");
  if (min_samples_leaf < 1)
    throw std::invalid_argument("min_samples_leaf must be >= 1");
}

Tree fit_cart(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const TreeParams& params)
{
  check_training_data(x, y);
  params.validate();
  return TreeBuilder(x, y, params, nullptr).build();
}

Tree fit_random_tree(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const TreeParams& params,
                     std::uint64_t seed)
{
  check_training_data(x, y);
  params.validate();
  Rng rng(seed);
  return TreeBuilder(x, y, params, &rng).build();
}

std::string_view to_string(ForestMode mode)
{
  switch (mode) {
  case ForestMode::single:
    return "single";
  case ForestMode::extra_trees:
    return "extra_trees";
  case ForestMode::adaboost_r2:
    return "adaboost_r2";
  }
  return "?";
}

ForestMode parse_forest_mode(std::string_view name)
{
  if (name == "single")
    return ForestMode::single;
  if (name == "extra_trees")
    return ForestMode::extra_trees;
  if (name == "adaboost_r2")
    return ForestMode::adaboost_r2;
  throw std::invalid_argument("unknown forest mode '" + std::string(name) + "'");
}

std::size_t Forest::tree_count() const
{
  std::size_t n = 0;
  for (const auto& m : members)
    n += m.size();
  return n;
}

Forest fit_decision_tree(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                         const ForestParams& params)
{
  Forest forest;
  forest.mode = ForestMode::single;
  forest.arity = static_cast<int>(x.cols());
  forest.params = params;
  forest.members.push_back({fit_cart(x, y, params.tree)});
  return forest;
}

Forest fit_extra_trees(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                       const ForestParams& params)
{
  check_training_data(x, y);
  if (params.n_trees < 1)
    throw std::invalid_argument("fit_extra_trees: n_trees must be >= 1");
  Forest forest;
  forest.mode = ForestMode::extra_trees;
  forest.arity = static_cast<int>(x.cols());
  forest.params = params;
  forest.members.push_back(grow_random_trees(x, y, params.tree, params.n_trees, params.seed));
  return forest;
}

Forest fit_adaboost_r2(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                       const ForestParams& params, const BoostObserver& observer)
{
  check_training_data(x, y);
  if (x.rows() < 2)
    throw std::invalid_argument("fit_adaboost_r2: at least two rows are required");
  if (params.n_estimators < 1 || params.base_trees < 1)
    throw std::invalid_argument("fit_adaboost_r2: n_estimators and base_trees must be >= 1");

  Forest forest;
  forest.mode = ForestMode::adaboost_r2;
  forest.arity = static_cast<int>(x.cols());
  forest.params = params;

  const Eigen::Index n = x.rows();
  Eigen::VectorXd weights = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
  auto rng = make_rng(params.seed, stream::boost);
  std::vector<Eigen::Index> sample(static_cast<std::size_t>(n));

  for (int round = 0; round < params.n_estimators; ++round) {
    std::discrete_distribution<Eigen::Index> pick(weights.begin(), weights.end());
    for (auto& s : sample)
      s = pick(rng);
    const Eigen::MatrixXd xs = x(sample, Eigen::all);
    const Eigen::VectorXd ys = y(sample);
    auto trees = grow_random_trees(xs, ys, params.tree, params.base_trees,
                                   derive_seed(params.seed, stream::boost, static_cast<std::uint64_t>(round)));

    Eigen::VectorXd error(n);
    for (Eigen::Index i = 0; i < n; ++i)
      error(i) = std::abs(mean_of_trees(trees, x.row(i).transpose()) - y(i));
    const double max_error = error.maxCoeff();
    const Eigen::VectorXd loss = max_error > 0.0 ? Eigen::VectorXd(error / max_error)
                                                 : Eigen::VectorXd::Zero(n);
    const double mean_loss = weights.dot(loss);

    if (mean_loss <= 0.0) {
      // Perfect fit: this learner alone decides.
      forest.members.push_back(std::move(trees));
      forest.member_weights.push_back(1.0);
      if (observer)
        observer(weights, mean_loss);
      break;
    }
    if (mean_loss >= 0.5) {
      // Too weak to boost. Keep it only if the ensemble would otherwise be empty.
      if (forest.members.empty()) {
        forest.members.push_back(std::move(trees));
        forest.member_weights.push_back(1.0);
      }
      break;
    }
    const double beta = mean_loss / (1.0 - mean_loss);
    forest.members.push_back(std::move(trees));
    forest.member_weights.push_back(std::log(1.0 / beta));

    weights = (weights.array() * (1.0 - loss.array()).unaryExpr([beta](double e) {
                                   return std::pow(beta, e);
                                 })).matrix();
    weights /= weights.sum();
    if (observer)
      observer(weights, mean_loss);
  }
  return forest;
}

double weighted_median(std::span<const double> values, std::span<const double> weights)
{
  if (values.empty() || values.size() != weights.size())
    throw std::invalid_argument("weighted_median: need equal-length non-empty inputs");
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double cumulative = 0.0;
  for (auto i : order) {
    cumulative += weights[i];
    if (cumulative >= 0.5 * total)
      return values[i];
  }
  return values[order.back()];
}

double predict_forest(const Forest& forest, const Eigen::VectorXd& raw_features)
{
  if (raw_features.size() != forest.arity)
    throw std::invalid_argument("predict_forest: feature arity does not match the forest");
  if (forest.members.empty())
    throw std::invalid_argument("predict_forest: empty forest");
  if (forest.mode != ForestMode::adaboost_r2)
    return mean_of_trees(forest.members.front(), raw_features);

  std::vector<double> outputs;
  outputs.reserve(forest.members.size());
  for (const auto& m : forest.members)
    outputs.push_back(mean_of_trees(m, raw_features));
  return weighted_median(outputs, forest.member_weights);
}

Eigen::VectorXd predict_forest(const Forest& forest, const Eigen::MatrixXd& raw_features)
{
  if (raw_features.cols() != forest.arity)
    throw std::invalid_argument("predict_forest: feature arity does not match the forest");
  Eigen::VectorXd out(raw_features.rows());
  for (Eigen::Index i = 0; i < out.size(); ++i)
    out(i) = predict_forest(forest, Eigen::VectorXd(raw_features.row(i).transpose()));
  return out;
}

nlohmann::json forest_to_json(const Forest& forest)
{
  nlohmann::json members = nlohmann::json::array();
  for (const auto& m : forest.members) {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& t : m) {
      std::vector<int> feature, left, right;
      std::vector<double> threshold, value;
      for (const auto& node : t.nodes) {
        feature.push_back(node.feature);
        threshold.push_back(node.threshold);
        left.push_back(node.left);
        right.push_back(node.right);
        value.push_back(node.value);
      }
      trees.push_back({{"feature", feature},
                       {"threshold", threshold},
                       {"left", left},
                       {"right", right},
                       {"value", value}});
    }
    members.push_back({{"trees", trees}});
  }
  const auto& p = forest.params;
  return {{"format", "lumen-rem/forest"},
          {"version", kForestFormatVersion},
          {"mode", to_string(forest.mode)},
          {"arity", forest.arity},
          {"params",
           {{"max_depth", p.tree.max_depth},
            {"min_samples_split", p.tree.min_samples_split},
            {"min_samples_leaf", p.tree.min_samples_leaf},
            {"n_trees", p.n_trees},
            {"n_estimators", p.n_estimators},
            {"base_trees", p.base_trees},
            {"seed", p.seed}}},
          {"members", members},
          {"member_weights", forest.member_weights}};
}

Forest forest_from_json(const nlohmann::json& doc)
{
  if (!doc.is_object() || doc.value("format", "") != "lumen-rem/forest")
    throw ModelFormatError("not a forest model document");
  if (!doc.contains("version") || !doc["version"].is_number_integer())
    throw ModelFormatError("forest document has no integer version");
  const int version = doc["version"].get<int>();
  if (version != kForestFormatVersion)
    throw ModelVersionError("unsupported forest version " + std::to_string(version));
  try {
    Forest forest;
    forest.mode = parse_forest_mode(doc.at("mode").get<std::string>());
    forest.arity = doc.at("arity").get<int>();
    const auto& p = doc.at("params");
    forest.params.tree = {p.at("max_depth").get<int>(), p.at("min_samples_split").get<int>(),
                          p.at("min_samples_leaf").get<int>()};
    forest.params.n_trees = p.at("n_trees").get<int>();
    forest.params.n_estimators = p.at("n_estimators").get<int>();
    forest.params.base_trees = p.at("base_trees").get<int>();
    forest.params.seed = p.at("seed").get<std::uint64_t>();
    for (const auto& m : doc.at("members")) {
      std::vector<Tree> trees;
      for (const auto& t : m.at("trees")) {
        const auto feature = t.at("feature").get<std::vector<int>>();
        const auto threshold = t.at("threshold").get<std::vector<double>>();
        const auto left = t.at("left").get<std::vector<int>>();
        const auto right = t.at("right").get<std::vector<int>>();
        const auto value = t.at("value").get<std::vector<double>>();
        const auto n = feature.size();
        if (n == 0 || threshold.size() != n || left.size() != n || right.size() != n
            || value.size() != n)
          throw ModelFormatError("tree arrays have inconsistent lengths");
        Tree tree;
        for (std::size_t i = 0; i < n; ++i) {
          const TreeNode node{feature[i], threshold[i], left[i], right[i], value[i]};
          const auto in_range = [n](int c) { return c > 0 && static_cast<std::size_t>(c) < n; };
          if (!node.is_leaf()
              && (node.feature >= forest.arity || !in_range(node.left) || !in_range(node.right)))
            throw ModelFormatError("tree node references are out of range");
          tree.nodes.push_back(node);
        }
        trees.push_back(std::move(tree));
      }
      if (trees.empty())
        throw ModelFormatError("forest member without trees");
      forest.members.push_back(std::move(trees));
    }
    forest.member_weights = doc.at("member_weights").get<std::vector<double>>();
    if (forest.members.empty())
      throw ModelFormatError("forest without members");
    if (forest.mode == ForestMode::adaboost_r2
        && forest.member_weights.size() != forest.members.size())
      throw ModelFormatError("adaboost member weights do not match the members");
    return forest;
  } catch (const nlohmann::json::exception& e) {
    throw ModelFormatError(std::string("malformed forest: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ModelFormatError(std::string("malformed forest: ") + e.what());
  }
}

} // namespace lumen
