#pragma once

#include <Eigen/Core>
#include <json.hpp>

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lumen {

/// Node of a flattened regression tree. Leaves have feature == -1.
/// Internal nodes send rows with x[feature] < threshold to the left child.
struct TreeNode {
  int feature = -1;
  double threshold = 0.0;
  int left = -1;
  int right = -1;
  double value = 0.0; // mean target of the rows routed here

  bool is_leaf() const { return feature < 0; }
  bool operator==(const TreeNode&) const = default;
};

struct Tree {
  std::vector<TreeNode> nodes; // nodes[0] is the root

  template <typename Derived>
  double predict(const Eigen::DenseBase<Derived>& x) const
  {
    int i = 0;
    while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
      const auto& n = nodes[static_cast<std::size_t>(i)];
      i = x(n.feature) < n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].value;
  }

  int depth() const;
  std::size_t leaf_count() const;
};

struct TreeParams {
  int max_depth = 0; // 0: unlimited
  int min_samples_split = 2;
  int min_samples_leaf = 1;

  void validate() const;
};

/// Greedy CART: each node takes the split with the largest variance reduction
/// among midpoints of consecutive distinct feature values. Ties go to the
/// lowest feature index, then the lowest threshold.
Tree fit_cart(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const TreeParams& params);

/// Extremely randomized tree: per node, one uniform cut-point in [min, max]
/// of every non-constant feature, keeping the best by variance reduction.
Tree fit_random_tree(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const TreeParams& params,
                     std::uint64_t seed);

enum class ForestMode { single, extra_trees, adaboost_r2 };

std::string_view to_string(ForestMode mode);
ForestMode parse_forest_mode(std::string_view name);

struct ForestParams {
  TreeParams tree;
  int n_trees = 100;     // extra_trees ensemble size
  int n_estimators = 50; // adaboost rounds
  int base_trees = 10;   // trees per adaboost base learner
  std::uint64_t seed = 0;
};

/// A tree ensemble. Each member is a group of trees whose outputs are
/// averaged; members are combined by weighted median in adaboost_r2 mode.
struct Forest {
  ForestMode mode = ForestMode::single;
  int arity = 0;
  ForestParams params;
  std::vector<std::vector<Tree>> members;
  std::vector<double> member_weights; // adaboost_r2 only

  std::size_t tree_count() const;
};

Forest fit_decision_tree(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                         const ForestParams& params);

/// Extra Trees: n_trees randomized trees, each on the full sample.
Forest fit_extra_trees(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                       const ForestParams& params);

/// Called after every boosting round with the renormalized sample weights.
using BoostObserver = std::function<void(const Eigen::VectorXd& sample_weights, double mean_loss)>;

/// AdaBoost.R2 (linear loss) over Extra Trees base learners trained on
/// weight-proportional resamples.
Forest fit_adaboost_r2(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                       const ForestParams& params, const BoostObserver& observer = {});

/// Smallest value whose cumulative weight reaches half the total.
double weighted_median(std::span<const double> values, std::span<const double> weights);

/// Raw (un-normalized) features in, RSS in dBm out.
double predict_forest(const Forest& forest, const Eigen::VectorXd& raw_features);
Eigen::VectorXd predict_forest(const Forest& forest, const Eigen::MatrixXd& raw_features);

inline constexpr int kForestFormatVersion = 1;

nlohmann::json forest_to_json(const Forest& forest);
Forest forest_from_json(const nlohmann::json& doc);

} // namespace lumen
