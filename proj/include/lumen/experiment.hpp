#pragma once

#include "lumen/dataset.hpp"
#include "lumen/metrics.hpp"
#include "lumen/model.hpp"
#include "lumen/radio_map.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lumen {

struct TimingReport {
  std::string model_kind;
  std::size_t train_size = 0;
  double train_seconds = 0.0;         // mean over repetitions
  double predict_us_per_sample = 0.0; // mean over repetitions
  std::size_t predict_samples = 0;    // single-point predictions per repetition
  int repetitions = 0;
  std::string hardware_note;
};

/// Free-text description of the host (CPU model, worker count).
std::string hardware_note();

/// Wall-clock training time and single-point inference latency. Each
/// repetition subsamples train_size rows, splits, trains, then times at least
/// predict_samples one-at-a-time predictions.
TimingReport benchmark(const TrainOptions& options, const Dataset& data, std::size_t train_size,
                       int repetitions, std::size_t predict_samples = 10000);

void to_json(nlohmann::json& j, const TimingReport& r);

/// Cross-product experiment description. Tree kinds ignore the epoch and batch
/// dimensions.
struct CampaignSpec {
  std::string name = "campaign";
  std::string scene = "mid"; // preset name or "variable"
  int leds = 1;
  std::size_t per_axis = 50;
  std::size_t per_xy = 20;
  std::size_t per_z = 10;
  std::size_t per_dim = 10;
  double patch_edge = kDefaultPatchEdge;
  std::size_t reference_size = 500;
  std::vector<std::string> models{"mlp32x128"};
  std::vector<std::size_t> train_sizes{12500};
  std::vector<int> epochs{250};
  std::vector<int> batch_sizes{128};
  std::vector<double> noise_factors{0.0};
  int repetitions = 10;
  std::uint64_t seed = 0;
  std::size_t profile_points = 0; // > 0: half-diagonal error profile at z = 1 m
  ForestParams forest;

  void validate() const;
};

void from_json(const nlohmann::json& j, CampaignSpec& spec);
void to_json(nlohmann::json& j, const CampaignSpec& spec);

struct CampaignCell {
  std::string model;
  std::size_t train_size = 0;
  int epochs = 0;
  int batch_size = 0;
  double noise_factor = 0.0;
  double mean_osnr_db = 0.0;
  std::vector<double> maes;          // one per repetition
  std::vector<double> mapes;
  std::vector<double> train_seconds; // timing, not replayable
  DistributionSummary mae_summary;
  std::vector<double> profile_abs_error; // mean over repetitions, per profile point
};

struct CampaignResult {
  CampaignSpec spec;
  std::vector<CampaignCell> cells;
  std::vector<ProfilePoint> profile_reference;     // simulated clean profile
  std::vector<std::vector<double>> profile_osnr_db; // [noise factor][point]
};

/// Seed used for repetition r of a campaign; shared across cells so models
/// see identical training subsets.
std::uint64_t repetition_seed(std::uint64_t master, int repetition);

/// Runs every cell on pre-built clean data. Noise is injected into the
/// training data once per noise factor; the reference set stays clean.
CampaignResult run_campaign(const CampaignSpec& spec, const Dataset& training,
                            const Dataset& reference);

/// Generates the datasets the spec describes, then runs it.
CampaignResult run_campaign(const CampaignSpec& spec);

/// Writes <name>_summary.csv, <name>_runs.csv, <name>_timing.csv and, when
/// profiling, <name>_profile.csv into dir.
void write_campaign(const CampaignResult& result, const std::string& dir);

} // namespace lumen
