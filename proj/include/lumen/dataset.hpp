#pragma once

#include "lumen/channel.hpp"
#include "lumen/scene.hpp"

#include <Eigen/Core>
#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace lumen {

/// Receiver heights are drawn from [0, kMaxReceiverHeight].
inline constexpr double kMaxReceiverHeight = 1.7;

/// One training row: RSS at a receiver position, plus the room footprint for
/// variable-room data.
struct ChannelSample {
  double rss_dbm = 0.0;
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;
  std::optional<double> lx;
  std::optional<double> ly;

  bool operator==(const ChannelSample&) const = default;
};

/// How a dataset came to be. Enough to regenerate it bit for bit.
struct DatasetOrigin {
  std::string generator;       // fixed | variable | reference | reference-variable | csv
  std::string scene_name;      // preset name, "custom" or "variable"
  int led_count = 0;
  std::uint64_t seed = 0;
  double patch_edge = kDefaultPatchEdge;
  std::vector<std::size_t> counts;
  std::optional<Scene> scene;  // fixed-room generators only
  double noise_factor = 0.0;
  std::optional<std::uint64_t> noise_seed;
  std::optional<double> mean_osnr_db;
  std::vector<std::pair<std::string, std::uint64_t>> steps; // (derivation, seed)
};

void to_json(nlohmann::json& j, const DatasetOrigin& origin);
void from_json(const nlohmann::json& j, DatasetOrigin& origin);

struct Dataset {
  std::vector<std::string> feature_names;
  std::vector<ChannelSample> rows;
  DatasetOrigin origin;

  std::size_t size() const { return rows.size(); }
  bool empty() const { return rows.empty(); }
  bool variable_room() const { return feature_names.size() == 5; }
  Eigen::Index arity() const { return static_cast<Eigen::Index>(feature_names.size()); }

  /// n x arity feature matrix (x, y, z[, lx, ly]).
  Eigen::MatrixXd features() const;
  Eigen::VectorXd targets() const;

  /// Rows at the given indices, in that order; origin is carried over.
  Dataset select(const std::vector<std::size_t>& indices) const;
};

std::vector<std::string> fixed_feature_names();
std::vector<std::string> variable_feature_names();

/// Feature vector of one sample, matching the dataset layout.
Eigen::VectorXd feature_vector(const ChannelSample& s);

/// Cartesian product of per_axis random draws per axis: per_axis^3 rows.
Dataset generate_fixed(const Scene& scene, std::size_t per_axis, double patch_edge_m,
                       std::uint64_t seed, std::string scene_name = "custom");

/// per_dim^2 random rooms, each with per_xy^2 * per_z receiver positions.
Dataset generate_variable(int led_count, std::size_t per_xy, std::size_t per_z,
                          std::size_t per_dim, double patch_edge_m, std::uint64_t seed);

/// n independent uniform receiver positions in a fixed room.
Dataset generate_reference(const Scene& scene, std::size_t n, double patch_edge_m,
                           std::uint64_t seed, std::string scene_name = "custom");

/// n independent (room, position) draws for variable-room evaluation.
Dataset generate_reference_variable(int led_count, std::size_t n, double patch_edge_m,
                                    std::uint64_t seed);

struct NoisyDataset {
  Dataset data;
  double mean_osnr_db = 0.0; // +infinity when no noise was added
};

/// Floor applied to noisy linear powers before converting back to dBm.
inline constexpr double kNoiseFloorMw = 1e-12;

/// Adds zero-mean Gaussian noise in the linear power domain with
/// sigma = noise_factor * std(P_clean). Positions and row order are kept.
NoisyDataset add_noise(const Dataset& ds, double noise_factor, std::uint64_t seed);

/// Population standard deviation of the rows' linear powers in mW.
double power_std_mw(const Dataset& ds);

/// Mean over rows of 10 log10(P_i / sigma).
double mean_osnr_db(const Dataset& ds, double sigma_mw);

struct SplitSets {
  Dataset train;
  Dataset validation;
  Dataset test;
};

/// Seeded 60/20/20 partition: floor(0.6n), floor(0.2n), remainder.
SplitSets split(const Dataset& ds, std::uint64_t seed);

/// Uniform sample of n rows without replacement.
Dataset subsample(const Dataset& ds, std::size_t n, std::uint64_t seed);

/// Z-score statistics of features and target, fit on training rows only.
struct NormStats {
  Eigen::VectorXd feature_mean;
  Eigen::VectorXd feature_std;
  double target_mean = 0.0;
  double target_std = 1.0;
};

NormStats fit_norm(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets);
NormStats fit_norm(const Dataset& train);

Eigen::MatrixXd apply_norm(const NormStats& stats, const Eigen::MatrixXd& features);
Eigen::MatrixXd invert_norm(const NormStats& stats, const Eigen::MatrixXd& normalized);
Eigen::VectorXd apply_target_norm(const NormStats& stats, const Eigen::VectorXd& targets);
Eigen::VectorXd invert_target_norm(const NormStats& stats, const Eigen::VectorXd& normalized);

void to_json(nlohmann::json& j, const NormStats& stats);
void from_json(const nlohmann::json& j, NormStats& stats);

/// CSV with header rss_dbm,x,y,z[,lx,ly]; values in shortest round-trip form.
/// A sidecar <stem>.meta.json records the origin.
void write_csv(const Dataset& ds, const std::string& path);
Dataset read_csv(const std::string& path);

std::string sidecar_path(const std::string& csv_path);

} // namespace lumen
