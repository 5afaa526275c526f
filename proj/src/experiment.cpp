#include "lumen/experiment.hpp"

#include "lumen/parallel.hpp"
#include "lumen/random.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace lumen {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start)
{
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string num(double v)
{
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

bool is_variable(const CampaignSpec& spec) { return spec.scene == "variable"; }

// Scene used for half-diagonal profiles. Variable-room campaigns profile a
// 5 x 5 x 3 m room, which lies inside the sampled room range.
Scene profile_scene(const CampaignSpec& spec)
{
  return is_variable(spec) ? variable_scene(5.0, 5.0, spec.leds) : preset_scene(spec.scene, spec.leds);
}

void write_text(const std::filesystem::path& path, const std::string& text)
{
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string cell_key(const CampaignCell& c)
{
  return c.model + ',' + std::to_string(c.train_size) + ',' + std::to_string(c.epochs) + ','
         + std::to_string(c.batch_size) + ',' + num(c.noise_factor);
}

} // namespace

std::string hardware_note()
{
  std::string cpu = "unknown CPU";
  if (std::ifstream info("/proc/cpuinfo"); info) {
    std::string line;
    while (std::getline(info, line)) {
      if (line.rfind("model name", 0) == 0) {
        const auto colon = line.find(':');
        if (colon != std::string::npos)
          cpu = line.substr(colon + 2);
        break;
      }
    }
  }
  return cpu + "; workers=" + std::to_string(worker_count());
}

TimingReport benchmark(const TrainOptions& options, const Dataset& data, std::size_t train_size,
                       int repetitions, std::size_t predict_samples)
{
  if (repetitions < 1)
    throw std::invalid_argument("benchmark: repetitions must be >= 1");
  if (predict_samples < 1)
    throw std::invalid_argument("benchmark: predict_samples must be >= 1");

  std::vector<Eigen::VectorXd> probes;
  probes.reserve(predict_samples);
  for (std::size_t i = 0; i < predict_samples; ++i)
    probes.push_back(feature_vector(data.rows[i % data.size()]));

  TimingReport report;
  report.model_kind = options.kind;
  report.train_size = train_size;
  report.repetitions = repetitions;
  report.predict_samples = predict_samples;
  report.hardware_note = hardware_note();

  double sink = 0.0;
  for (int r = 0; r < repetitions; ++r) {
    const auto seed = repetition_seed(options.seed, r);
    const auto splits = split(subsample(data, train_size, seed), seed);
    TrainOptions opts = options;
    opts.seed = seed;

    const auto t0 = Clock::now();
    const Regressor model = train_regressor(opts, splits);
    report.train_seconds += seconds_since(t0);

    const auto t1 = Clock::now();
    for (const auto& p : probes)
      sink += predict(model, p);
    report.predict_us_per_sample += seconds_since(t1) * 1e6 / static_cast<double>(probes.size());
  }
  report.train_seconds /= repetitions;
  report.predict_us_per_sample /= repetitions;
  if (!std::isfinite(sink))
    report.hardware_note += "; non-finite predictions";
  return report;
}

void to_json(nlohmann::json& j, const TimingReport& r)
{
  j = {{"model_kind", r.model_kind},
       {"train_size", r.train_size},
       {"train_seconds", r.train_seconds},
       {"predict_us_per_sample", r.predict_us_per_sample},
       {"predict_samples", r.predict_samples},
       {"repetitions", r.repetitions},
       {"hardware_note", r.hardware_note}};
}

void CampaignSpec::validate() const
{
  if (!is_variable(*this))
    (void)parse_preset(scene);
  if (leds != 1 && leds != 4)
    throw std::invalid_argument("campaign: leds must be 1 or 4");
  if (models.empty() || train_sizes.empty() || epochs.empty() || batch_sizes.empty()
      || noise_factors.empty())
    throw std::invalid_argument("campaign: every sweep dimension needs at least one value");
  for (const auto& m : models)
    if (!is_mlp_kind(m) && !is_forest_kind(m))
      throw std::invalid_argument("campaign: unknown model kind '" + m + "'");
  for (auto n : train_sizes)
    if (n < 5)
      throw std::invalid_argument("campaign: train sizes must be >= 5");
  for (auto e : epochs)
    if (e < 0)
      throw std::invalid_argument("campaign: epochs must be >= 0");
  for (auto b : batch_sizes)
    if (b < 1)
      throw std::invalid_argument("campaign: batch sizes must be >= 1");
  for (auto f : noise_factors)
    if (!(f >= 0.0))
      throw std::invalid_argument("campaign: noise factors must be >= 0");
  if (repetitions < 1)
    throw std::invalid_argument("campaign: repetitions must be >= 1");
  if (reference_size < 1 || per_axis < 1 || per_xy < 1 || per_z < 1 || per_dim < 1)
    throw std::invalid_argument("campaign: dataset counts must be >= 1");
  if (profile_points == 1)
    throw std::invalid_argument("campaign: profile needs 0 or at least 2 points");
}

void from_json(const nlohmann::json& j, CampaignSpec& s)
{
  s.name = j.value("name", s.name);
  s.scene = j.value("scene", s.scene);
  s.leds = j.value("leds", s.leds);
  s.per_axis = j.value("per_axis", s.per_axis);
  s.per_xy = j.value("per_xy", s.per_xy);
  s.per_z = j.value("per_z", s.per_z);
  s.per_dim = j.value("per_dim", s.per_dim);
  s.patch_edge = j.value("patch_edge", s.patch_edge);
  s.reference_size = j.value("reference_size", s.reference_size);
  s.models = j.value("models", s.models);
  s.train_sizes = j.value("train_sizes", s.train_sizes);
  s.epochs = j.value("epochs", s.epochs);
  s.batch_sizes = j.value("batch_sizes", s.batch_sizes);
  s.noise_factors = j.value("noise_factors", s.noise_factors);
  s.repetitions = j.value("repetitions", s.repetitions);
  s.seed = j.value("seed", s.seed);
  s.profile_points = j.value("profile_points", s.profile_points);
  if (j.contains("forest")) {
    const auto& f = j.at("forest");
    s.forest.tree.max_depth = f.value("max_depth", s.forest.tree.max_depth);
    s.forest.tree.min_samples_split = f.value("min_samples_split", s.forest.tree.min_samples_split);
    s.forest.tree.min_samples_leaf = f.value("min_samples_leaf", s.forest.tree.min_samples_leaf);
    s.forest.n_trees = f.value("n_trees", s.forest.n_trees);
    s.forest.n_estimators = f.value("n_estimators", s.forest.n_estimators);
    s.forest.base_trees = f.value("base_trees", s.forest.base_trees);
  }
}

void to_json(nlohmann::json& j, const CampaignSpec& s)
{
  j = {{"name", s.name},
       {"scene", s.scene},
       {"leds", s.leds},
       {"per_axis", s.per_axis},
       {"per_xy", s.per_xy},
       {"per_z", s.per_z},
       {"per_dim", s.per_dim},
       {"patch_edge", s.patch_edge},
       {"reference_size", s.reference_size},
       {"models", s.models},
       {"train_sizes", s.train_sizes},
       {"epochs", s.epochs},
       {"batch_sizes", s.batch_sizes},
       {"noise_factors", s.noise_factors},
       {"repetitions", s.repetitions},
       {"seed", s.seed},
       {"profile_points", s.profile_points},
       {"forest",
        {{"max_depth", s.forest.tree.max_depth},
         {"min_samples_split", s.forest.tree.min_samples_split},
         {"min_samples_leaf", s.forest.tree.min_samples_leaf},
         {"n_trees", s.forest.n_trees},
         {"n_estimators", s.forest.n_estimators},
         {"base_trees", s.forest.base_trees}}}};
}

std::uint64_t repetition_seed(std::uint64_t master, int repetition)
{
  return derive_seed(master, stream::campaign, static_cast<std::uint64_t>(repetition));
}

CampaignResult run_campaign(const CampaignSpec& spec, const Dataset& training,
                            const Dataset& reference)
{
  spec.validate();
  if (training.arity() != reference.arity())
    throw std::invalid_argument("campaign: training and reference layouts differ");

  CampaignResult result;
  result.spec = spec;

  std::vector<Point3> profile_points;
  Eigen::MatrixXd profile_inputs;
  const Scene scene = profile_scene(spec);
  if (spec.profile_points > 0) {
    const ChannelModel channel(scene, spec.patch_edge);
    result.profile_reference = half_diagonal_profile(channel, 1.0, spec.profile_points);
    profile_points = half_diagonal_points(scene.room, 1.0, spec.profile_points);
  }

  const double clean_std = power_std_mw(training);
  const Eigen::VectorXd truth = reference.targets();
  const Eigen::MatrixXd ref_x = reference.features();

  for (std::size_t a = 0; a < spec.noise_factors.size(); ++a) {
    const double nf = spec.noise_factors[a];
    const Dataset noisy = add_noise(training, nf, derive_seed(spec.seed, stream::noise, a)).data;
    const double sigma = nf * clean_std;
    const double osnr = mean_osnr_db(reference, sigma);
    if (spec.profile_points > 0) {
      std::vector<double> per_point;
      for (const auto& p : result.profile_reference)
        per_point.push_back(sigma > 0.0 ? p.rss_dbm - 10.0 * std::log10(sigma)
                                        : std::numeric_limits<double>::infinity());
      result.profile_osnr_db.push_back(std::move(per_point));
    }

    for (const auto& kind : spec.models) {
      std::vector<std::pair<int, int>> schedules;
      if (is_mlp_kind(kind)) {
        for (int e : spec.epochs)
          for (int b : spec.batch_sizes)
            schedules.emplace_back(e, b);
      } else {
        schedules.emplace_back(0, 0);
      }
      for (auto train_size : spec.train_sizes) {
        for (const auto& [epochs, batch] : schedules) {
          CampaignCell cell;
          cell.model = kind;
          cell.train_size = train_size;
          cell.epochs = epochs;
          cell.batch_size = batch;
          cell.noise_factor = nf;
          cell.mean_osnr_db = osnr;
          cell.profile_abs_error.assign(spec.profile_points, 0.0);

          for (int r = 0; r < spec.repetitions; ++r) {
            const auto seed = repetition_seed(spec.seed, r);
            const auto splits = split(subsample(noisy, train_size, seed), seed);
            TrainOptions opts;
            opts.kind = kind;
            opts.epochs = epochs;
            opts.batch_size = std::max(batch, 1);
            opts.forest = spec.forest;
            opts.seed = seed;

            const auto t0 = Clock::now();
            const Regressor model = train_regressor(opts, splits);
            cell.train_seconds.push_back(seconds_since(t0));

            const Eigen::VectorXd pred = predict(model, ref_x);
            cell.maes.push_back(mae(pred, truth));
            cell.mapes.push_back((truth.array() != 0.0).all() ? mape(pred, truth)
                                                             : std::numeric_limits<double>::quiet_NaN());
            if (spec.profile_points > 0) {
              const auto prof = half_diagonal_profile(model, scene, 1.0, spec.profile_points);
              for (std::size_t k = 0; k < prof.size(); ++k)
                cell.profile_abs_error[k] += std::abs(prof[k].rss_dbm - result.profile_reference[k].rss_dbm)
                                             / spec.repetitions;
            }
          }
          cell.mae_summary = summarize(cell.maes);
          result.cells.push_back(std::move(cell));
        }
      }
    }
  }
  return result;
}

CampaignResult run_campaign(const CampaignSpec& spec)
{
  spec.validate();
  const auto data_seed = derive_seed(spec.seed, stream::campaign, 0x1000);
  const auto ref_seed = derive_seed(spec.seed, stream::campaign, 0x2000);
  if (is_variable(spec)) {
    const auto training =
        generate_variable(spec.leds, spec.per_xy, spec.per_z, spec.per_dim, spec.patch_edge, data_seed);
    const auto reference =
        generate_reference_variable(spec.leds, spec.reference_size, spec.patch_edge, ref_seed);
    return run_campaign(spec, training, reference);
  }
  const Scene scene = preset_scene(spec.scene, spec.leds);
  const auto training = generate_fixed(scene, spec.per_axis, spec.patch_edge, data_seed, spec.scene);
  const auto reference =
      generate_reference(scene, spec.reference_size, spec.patch_edge, ref_seed, spec.scene);
  return run_campaign(spec, training, reference);
}

void write_campaign(const CampaignResult& result, const std::string& dir)
{
  const std::filesystem::path root(dir);
  std::filesystem::create_directories(root);
  const auto& name = result.spec.name;
  const std::string keys = "model,train_size,epochs,batch_size,noise_factor";

  std::string summary = keys
                        + ",mean_osnr_db,repetitions,mae_mean,mae_median,mae_q1,mae_q3,mae_min,"
                          "mae_max,mae_sem,mape_mean\n";
  std::string runs = keys + ",repetition,mae_dbm,mape_percent\n";
  std::string timing = keys + ",repetition,train_seconds\n";
  std::string profile = keys + ",point,x,y,reference_rss_dbm,osnr_db,mean_abs_error_db\n";

  for (const auto& c : result.cells) {
    const auto& s = c.mae_summary;
    double mape_mean = 0.0;
    for (double v : c.mapes)
      mape_mean += v / static_cast<double>(c.mapes.size());
    summary += cell_key(c) + ',' + num(c.mean_osnr_db) + ',' + std::to_string(c.maes.size()) + ','
               + num(s.mean) + ',' + num(s.median) + ',' + num(s.q1) + ',' + num(s.q3) + ','
               + num(s.min) + ',' + num(s.max) + ',' + num(s.sem) + ',' + num(mape_mean) + '\n';
    for (std::size_t r = 0; r < c.maes.size(); ++r) {
      runs += cell_key(c) + ',' + std::to_string(r) + ',' + num(c.maes[r]) + ',' + num(c.mapes[r])
              + '\n';
      timing += cell_key(c) + ',' + std::to_string(r) + ',' + num(c.train_seconds[r]) + '\n';
    }
    if (!c.profile_abs_error.empty()) {
      std::size_t nf_index = 0;
      while (nf_index < result.spec.noise_factors.size()
             && result.spec.noise_factors[nf_index] != c.noise_factor)
        ++nf_index;
      for (std::size_t k = 0; k < c.profile_abs_error.size(); ++k) {
        const auto& p = result.profile_reference[k];
        profile += cell_key(c) + ',' + std::to_string(k) + ',' + num(p.x) + ',' + num(p.y) + ','
                   + num(p.rss_dbm) + ',' + num(result.profile_osnr_db[nf_index][k]) + ','
                   + num(c.profile_abs_error[k]) + '\n';
      }
    }
  }

  write_text(root / (name + "_summary.csv"), summary);
  write_text(root / (name + "_runs.csv"), runs);
  write_text(root / (name + "_timing.csv"), timing);
  if (result.spec.profile_points > 0)
    write_text(root / (name + "_profile.csv"), profile);
}

} // namespace lumen
