#include "lumen/dataset.hpp"

#include "lumen/parallel.hpp"
#include "lumen/random.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace lumen {

namespace {

std::vector<double> uniform_draws(std::uint64_t seed, std::uint64_t tag, std::uint64_t index,
                                  std::size_t count, double lo, double hi)
{
  auto rng = make_rng(seed, tag, index);
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> out(count);
  for (auto& v : out)
    v = dist(rng);
  return out;
}

void fill_rss(std::vector<ChannelSample>& rows, const ChannelModel& model)
{
  parallel_for(rows.size(), [&](std::size_t i) {
    auto& s = rows[i];
    s.rss_dbm = rss_dbm(model.received_power(Point3(s.x, s.y, s.z)).total_mw());
  });
}

std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed, std::uint64_t tag)
{
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  auto rng = make_rng(seed, tag);
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

void append_number(std::string& out, double v)
{
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

double parse_number(std::string_view field, std::size_t line)
{
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (res.ec != std::errc() || res.ptr != field.data() + field.size())
    throw std::invalid_argument("csv line " + std::to_string(line) + ": bad number '"
                                + std::string(field) + "'");
  return v;
}

} // namespace

std::vector<std::string> fixed_feature_names() { return {"x", "y", "z"}; }
std::vector<std::string> variable_feature_names() { return {"x", "y", "z", "lx", "ly"}; }

Eigen::VectorXd feature_vector(const ChannelSample& s)
{
  if (s.lx && s.ly)
    return (Eigen::VectorXd(5) << s.x, s.y, s.z, *s.lx, *s.ly).finished();
  return Eigen::Vector3d(s.x, s.y, s.z);
}

Eigen::MatrixXd Dataset::features() const
{
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), arity());
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    const auto& s = rows[static_cast<std::size_t>(i)];
    out(i, 0) = s.x;
    out(i, 1) = s.y;
    out(i, 2) = s.z;
    if (arity() == 5) {
      out(i, 3) = s.lx.value();
      out(i, 4) = s.ly.value();
    }
  }
  return out;
}

Eigen::VectorXd Dataset::targets() const
{
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (Eigen::Index i = 0; i < out.size(); ++i)
    out(i) = rows[static_cast<std::size_t>(i)].rss_dbm;
  return out;
}

Dataset Dataset::select(const std::vector<std::size_t>& indices) const
{
  Dataset out;
  out.feature_names = feature_names;
  out.origin = origin;
  out.rows.reserve(indices.size());
  for (auto i : indices)
    out.rows.push_back(rows.at(i));
  return out;
}

Dataset generate_fixed(const Scene& scene, std::size_t per_axis, double patch_edge_m,
                       std::uint64_t seed, std::string scene_name)
{
  if (per_axis < 1)
    throw std::invalid_argument("generate_fixed: per_axis must be >= 1");
  const ChannelModel model(scene, patch_edge_m);
  const auto xs = uniform_draws(seed, stream::axis_x, 0, per_axis, 0.0, scene.room.lx);
  const auto ys = uniform_draws(seed, stream::axis_y, 0, per_axis, 0.0, scene.room.ly);
  const auto zs = uniform_draws(seed, stream::axis_z, 0, per_axis, 0.0, kMaxReceiverHeight);

  Dataset ds;
  ds.feature_names = fixed_feature_names();
  ds.rows.reserve(per_axis * per_axis * per_axis);
  for (double x : xs)
    for (double y : ys)
      for (double z : zs)
        ds.rows.push_back({0.0, x, y, z, std::nullopt, std::nullopt});
  fill_rss(ds.rows, model);

  ds.origin.generator = "fixed";
  ds.origin.scene_name = std::move(scene_name);
  ds.origin.led_count = static_cast<int>(scene.transmitters.size());
  ds.origin.seed = seed;
  ds.origin.patch_edge = patch_edge_m;
  ds.origin.counts = {per_axis};
  ds.origin.scene = scene;
  return ds;
}

Dataset generate_variable(int led_count, std::size_t per_xy, std::size_t per_z,
                          std::size_t per_dim, double patch_edge_m, std::uint64_t seed)
{
  if (per_xy < 1 || per_z < 1 || per_dim < 1)
    throw std::invalid_argument("generate_variable: all counts must be >= 1");
  const auto lengths =
      uniform_draws(seed, stream::room_lx, 0, per_dim, kVariableRoomMin, kVariableRoomMax);
  const auto widths =
      uniform_draws(seed, stream::room_ly, 0, per_dim, kVariableRoomMin, kVariableRoomMax);

  const std::size_t rooms = per_dim * per_dim;
  const std::size_t per_room = per_xy * per_xy * per_z;
  Dataset ds;
  ds.feature_names = variable_feature_names();
  ds.rows.resize(rooms * per_room);

  parallel_for(rooms, [&](std::size_t r) {
    const double lx = lengths[r / per_dim];
    const double ly = widths[r % per_dim];
    const ChannelModel model(variable_scene(lx, ly, led_count), patch_edge_m);
    const auto fx = uniform_draws(seed, stream::axis_x, r, per_xy, 0.0, 1.0);
    const auto fy = uniform_draws(seed, stream::axis_y, r, per_xy, 0.0, 1.0);
    const auto zs = uniform_draws(seed, stream::axis_z, r, per_z, 0.0, kMaxReceiverHeight);
    std::size_t k = r * per_room;
    for (double u : fx) {
      for (double v : fy) {
        for (double z : zs) {
          ChannelSample s{0.0, u * lx, v * ly, z, lx, ly};
          s.rss_dbm = rss_dbm(model.received_power(Point3(s.x, s.y, s.z)).total_mw());
          ds.rows[k++] = s;
        }
      }
    }
  });

  ds.origin.generator = "variable";
  ds.origin.scene_name = "variable";
  ds.origin.led_count = led_count;
  ds.origin.seed = seed;
  ds.origin.patch_edge = patch_edge_m;
  ds.origin.counts = {per_xy, per_z, per_dim};
  return ds;
}

Dataset generate_reference(const Scene& scene, std::size_t n, double patch_edge_m,
                           std::uint64_t seed, std::string scene_name)
{
  if (n < 1)
    throw std::invalid_argument("generate_reference: n must be >= 1");
  const ChannelModel model(scene, patch_edge_m);
  auto rng = make_rng(seed, stream::reference);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Dataset ds;
  ds.feature_names = fixed_feature_names();
  ds.rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = unit(rng) * scene.room.lx;
    const double y = unit(rng) * scene.room.ly;
    const double z = unit(rng) * kMaxReceiverHeight;
    ds.rows.push_back({0.0, x, y, z, std::nullopt, std::nullopt});
  }
  fill_rss(ds.rows, model);

  ds.origin.generator = "reference";
  ds.origin.scene_name = std::move(scene_name);
  ds.origin.led_count = static_cast<int>(scene.transmitters.size());
  ds.origin.seed = seed;
  ds.origin.patch_edge = patch_edge_m;
  ds.origin.counts = {n};
  ds.origin.scene = scene;
  return ds;
}

Dataset generate_reference_variable(int led_count, std::size_t n, double patch_edge_m,
                                    std::uint64_t seed)
{
  if (n < 1)
    throw std::invalid_argument("generate_reference_variable: n must be >= 1");
  auto rng = make_rng(seed, stream::reference);
  std::uniform_real_distribution<double> room(kVariableRoomMin, kVariableRoomMax);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  Dataset ds;
  ds.feature_names = variable_feature_names();
  ds.rows.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = room(rng);
    const double ly = room(rng);
    const double x = unit(rng) * lx;
    const double y = unit(rng) * ly;
    const double z = unit(rng) * kMaxReceiverHeight;
    ds.rows.push_back({0.0, x, y, z, lx, ly});
  }
  parallel_for(n, [&](std::size_t i) {
    auto& s = ds.rows[i];
    const ChannelModel model(variable_scene(*s.lx, *s.ly, led_count), patch_edge_m);
    s.rss_dbm = rss_dbm(model.received_power(Point3(s.x, s.y, s.z)).total_mw());
  });

  ds.origin.generator = "reference-variable";
  ds.origin.scene_name = "variable";
  ds.origin.led_count = led_count;
  ds.origin.seed = seed;
  ds.origin.patch_edge = patch_edge_m;
  ds.origin.counts = {n};
  return ds;
}

double power_std_mw(const Dataset& ds)
{
  if (ds.empty())
    return 0.0;
  Eigen::ArrayXd p(static_cast<Eigen::Index>(ds.size()));
  for (Eigen::Index i = 0; i < p.size(); ++i)
    p(i) = dbm_to_mw(ds.rows[static_cast<std::size_t>(i)].rss_dbm);
  return std::sqrt((p - p.mean()).square().mean());
}

double mean_osnr_db(const Dataset& ds, double sigma_mw)
{
  if (ds.empty())
    throw std::invalid_argument("mean_osnr_db: empty dataset");
  if (!(sigma_mw > 0.0))
    return std::numeric_limits<double>::infinity();
  // 10 log10(P / sigma) = rss_dbm - 10 log10(sigma)
  double acc = 0.0;
  for (const auto& s : ds.rows)
    acc += s.rss_dbm;
  return acc / static_cast<double>(ds.size()) - 10.0 * std::log10(sigma_mw);
}

NoisyDataset add_noise(const Dataset& ds, double noise_factor, std::uint64_t seed)
{
  if (!(noise_factor >= 0.0))
    throw std::invalid_argument("add_noise: noise factor must be >= 0");
  NoisyDataset out{ds, std::numeric_limits<double>::infinity()};
  out.data.origin.noise_factor = noise_factor;
  out.data.origin.noise_seed = seed;
  if (noise_factor == 0.0 || ds.empty()) {
    out.data.origin.mean_osnr_db = out.mean_osnr_db;
    return out;
  }

  const double sigma = noise_factor * power_std_mw(ds);
  out.mean_osnr_db = mean_osnr_db(ds, sigma);
  auto rng = make_rng(seed, stream::noise);
  std::normal_distribution<double> gauss(0.0, sigma);
  for (auto& s : out.data.rows) {
    const double noisy = dbm_to_mw(s.rss_dbm) + gauss(rng);
    s.rss_dbm = rss_dbm(std::max(noisy, kNoiseFloorMw));
  }
  out.data.origin.mean_osnr_db = out.mean_osnr_db;
  return out;
}

SplitSets split(const Dataset& ds, std::uint64_t seed)
{
  const std::size_t n = ds.size();
  if (n < 5)
    throw std::invalid_argument("split: at least 5 rows are required");
  const auto idx = shuffled_indices(n, seed, stream::split);
  const std::size_t n_train = n * 6 / 10;
  const std::size_t n_val = n * 2 / 10;

  auto part = [&](std::size_t begin, std::size_t end, const char* name) {
    Dataset d = ds.select({idx.begin() + static_cast<std::ptrdiff_t>(begin),
                           idx.begin() + static_cast<std::ptrdiff_t>(end)});
    d.origin.steps.emplace_back(name, seed);
    return d;
  };
  return {part(0, n_train, "split:train"), part(n_train, n_train + n_val, "split:validation"),
          part(n_train + n_val, n, "split:test")};
}

Dataset subsample(const Dataset& ds, std::size_t n, std::uint64_t seed)
{
  if (n < 1 || n > ds.size())
    throw std::invalid_argument("subsample: n must lie in [1, dataset size]");
  auto idx = shuffled_indices(ds.size(), seed, stream::subsample);
  idx.resize(n);
  Dataset out = ds.select(idx);
  out.origin.steps.emplace_back("subsample:" + std::to_string(n), seed);
  return out;
}

NormStats fit_norm(const Eigen::MatrixXd& features, const Eigen::VectorXd& targets)
{
  if (features.rows() == 0 || features.rows() != targets.size())
    throw std::invalid_argument("fit_norm: need a non-empty, aligned feature matrix and target");
  NormStats stats;
  stats.feature_mean = features.colwise().mean().transpose();
  stats.feature_std =
      ((features.rowwise() - stats.feature_mean.transpose()).array().square().colwise().mean())
          .sqrt()
          .transpose();
  stats.target_mean = targets.mean();
  stats.target_std = std::sqrt((targets.array() - stats.target_mean).square().mean());
  if ((stats.feature_std.array() <= 0.0).any())
    throw std::invalid_argument("fit_norm: constant feature column");
  if (!(stats.target_std > 0.0))
    throw std::invalid_argument("fit_norm: constant target");
  return stats;
}

NormStats fit_norm(const Dataset& train) { return fit_norm(train.features(), train.targets()); }

Eigen::MatrixXd apply_norm(const NormStats& stats, const Eigen::MatrixXd& features)
{
  if (features.cols() != stats.feature_mean.size())
    throw std::invalid_argument("apply_norm: feature arity mismatch");
  return ((features.rowwise() - stats.feature_mean.transpose()).array().rowwise()
          / stats.feature_std.transpose().array())
      .matrix();
}

Eigen::MatrixXd invert_norm(const NormStats& stats, const Eigen::MatrixXd& normalized)
{
  if (normalized.cols() != stats.feature_mean.size())
    throw std::invalid_argument("invert_norm: feature arity mismatch");
  return ((normalized.array().rowwise() * stats.feature_std.transpose().array()).matrix().rowwise()
          + stats.feature_mean.transpose());
}

Eigen::VectorXd apply_target_norm(const NormStats& stats, const Eigen::VectorXd& targets)
{
  return ((targets.array() - stats.target_mean) / stats.target_std).matrix();
}

Eigen::VectorXd invert_target_norm(const NormStats& stats, const Eigen::VectorXd& normalized)
{
  return (normalized.array() * stats.target_std + stats.target_mean).matrix();
}

void to_json(nlohmann::json& j, const NormStats& stats)
{
  j = {{"feature_mean", std::vector<double>(stats.feature_mean.begin(), stats.feature_mean.end())},
       {"feature_std", std::vector<double>(stats.feature_std.begin(), stats.feature_std.end())},
       {"target_mean", stats.target_mean},
       {"target_std", stats.target_std}};
}

void from_json(const nlohmann::json& j, NormStats& stats)
{
  const auto mean = j.at("feature_mean").get<std::vector<double>>();
  const auto std = j.at("feature_std").get<std::vector<double>>();
  if (mean.size() != std.size())
    throw std::invalid_argument("norm stats: mean/std length mismatch");
  stats.feature_mean = Eigen::Map<const Eigen::VectorXd>(mean.data(), static_cast<Eigen::Index>(mean.size()));
  stats.feature_std = Eigen::Map<const Eigen::VectorXd>(std.data(), static_cast<Eigen::Index>(std.size()));
  stats.target_mean = j.at("target_mean").get<double>();
  stats.target_std = j.at("target_std").get<double>();
}

void to_json(nlohmann::json& j, const DatasetOrigin& o)
{
  j = {{"generator", o.generator}, {"scene_name", o.scene_name}, {"led_count", o.led_count},
       {"seed", o.seed},           {"patch_edge", o.patch_edge}, {"counts", o.counts},
       {"noise_factor", o.noise_factor}};
  if (o.scene)
    j["scene"] = *o.scene;
  if (o.noise_seed)
    j["noise_seed"] = *o.noise_seed;
  if (o.mean_osnr_db) {
    // JSON has no infinity; a noiseless dataset records null.
    j["mean_osnr_db"] = std::isfinite(*o.mean_osnr_db) ? nlohmann::json(*o.mean_osnr_db) : nlohmann::json();
  }
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& [name, seed] : o.steps)
    steps.push_back({{"step", name}, {"seed", seed}});
  j["steps"] = steps;
}

void from_json(const nlohmann::json& j, DatasetOrigin& o)
{
  o.generator = j.value("generator", "");
  o.scene_name = j.value("scene_name", "");
  o.led_count = j.value("led_count", 0);
  o.seed = j.value("seed", std::uint64_t{0});
  o.patch_edge = j.value("patch_edge", kDefaultPatchEdge);
  o.counts = j.value("counts", std::vector<std::size_t>{});
  o.noise_factor = j.value("noise_factor", 0.0);
  if (j.contains("scene"))
    o.scene = j.at("scene").get<Scene>();
  if (j.contains("noise_seed"))
    o.noise_seed = j.at("noise_seed").get<std::uint64_t>();
  if (j.contains("mean_osnr_db")) {
    const auto& v = j.at("mean_osnr_db");
    o.mean_osnr_db = v.is_null() ? std::numeric_limits<double>::infinity() : v.get<double>();
  }
  o.steps.clear();
  if (j.contains("steps"))
    for (const auto& s : j.at("steps"))
      o.steps.emplace_back(s.at("step").get<std::string>(), s.at("seed").get<std::uint64_t>());
}

std::string sidecar_path(const std::string& csv_path)
{
  std::filesystem::path p(csv_path);
  p.replace_extension(".meta.json");
  return p.string();
}

void write_csv(const Dataset& ds, const std::string& path)
{
  std::string text = "rss_dbm";
  for (const auto& name : ds.feature_names)
    text += "," + name;
  text += '\n';
  for (const auto& s : ds.rows) {
    append_number(text, s.rss_dbm);
    const auto f = feature_vector(s);
    if (f.size() != ds.arity())
      throw std::invalid_argument("write_csv: row arity does not match the header");
    for (double v : f) {
      text += ',';
      append_number(text, v);
    }
    text += '\n';
  }
  std::ofstream out(path, std::ios::binary);
  if (!out)
    throw std::runtime_error("cannot write " + path);
  out << text;

  std::ofstream meta(sidecar_path(path), std::ios::binary);
  if (!meta)
    throw std::runtime_error("cannot write " + sidecar_path(path));
  meta << nlohmann::json(ds.origin).dump(2) << '\n';
}

Dataset read_csv(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw std::runtime_error("cannot open " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument(path + ": empty file");
  if (!line.empty() && line.back() == '\r')
    line.pop_back();

  Dataset ds;
  if (line == "rss_dbm,x,y,z")
    ds.feature_names = fixed_feature_names();
  else if (line == "rss_dbm,x,y,z,lx,ly")
    ds.feature_names = variable_feature_names();
  else
    throw std::invalid_argument(path + ": unexpected header '" + line + "'");

  const std::size_t columns = ds.feature_names.size() + 1;
  std::size_t line_no = 1;
  std::vector<double> values;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r')
      line.pop_back();
    if (line.empty())
      continue;
    values.clear();
    std::string_view rest(line);
    while (true) {
      const auto comma = rest.find(',');
      values.push_back(parse_number(rest.substr(0, comma), line_no));
      if (comma == std::string_view::npos)
        break;
      rest.remove_prefix(comma + 1);
    }
    if (values.size() != columns)
      throw std::invalid_argument(path + ": line " + std::to_string(line_no) + " has "
                                  + std::to_string(values.size()) + " columns");
    ChannelSample s{values[0], values[1], values[2], values[3], std::nullopt, std::nullopt};
    if (columns == 6) {
      s.lx = values[4];
      s.ly = values[5];
    }
    ds.rows.push_back(s);
  }

  const auto meta_path = sidecar_path(path);
  if (std::ifstream meta(meta_path); meta) {
    ds.origin = nlohmann::json::parse(meta).get<DatasetOrigin>();
  } else {
    ds.origin.generator = "csv";
  }
  return ds;
}

} // namespace lumen
