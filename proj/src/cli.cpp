#include "lumen/cli.hpp"

#include "lumen/dataset.hpp"
#include "lumen/experiment.hpp"
#include "lumen/metrics.hpp"
#include "lumen/model.hpp"
#include "lumen/radio_map.hpp"
#include "lumen/random.hpp"
#include "lumen/scene.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

namespace lumen {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string num(double v)
{
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_file(const fs::path& path, const std::string& text)
{
  std::ofstream file(path, std::ios::binary);
  if (!file)
    throw std::runtime_error("cannot write " + path.string());
  file << text;
}

json read_json(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot read " + path);
  return json::parse(in);
}

// A preset name, or a path to a scene JSON document.
struct SceneChoice {
  Scene scene;
  std::string name;
};

SceneChoice resolve_scene(const std::string& spec, int leds)
{
  try {
    (void)parse_preset(spec);
    return {preset_scene(spec, leds), spec};
  } catch (const std::invalid_argument&) {
  }
  if (!fs::exists(spec))
    throw UsageError("--scene: '" + spec + "' is neither a preset (small, mid, big) nor a file");
  return {load_scene(spec), "custom"};
}

void add_tree_flags(CLI::App* sub, ForestParams& p)
{
  sub->add_option("--n-trees", p.n_trees, "Extra Trees ensemble size")->capture_default_str();
  sub->add_option("--max-depth", p.tree.max_depth, "Maximum tree depth, 0 for unlimited")
      ->capture_default_str();
  sub->add_option("--min-samples-split", p.tree.min_samples_split)->capture_default_str();
  sub->add_option("--min-samples-leaf", p.tree.min_samples_leaf)->capture_default_str();
  sub->add_option("--n-estimators", p.n_estimators, "AdaBoost.R2 rounds")->capture_default_str();
  sub->add_option("--base-trees", p.base_trees, "Trees per AdaBoost.R2 base learner")
      ->capture_default_str();
}

std::string model_kind_list() { return "mlp32x128|mlp64x256|dt|xt|adaboost"; }

void check_kind(const std::string& kind)
{
  if (!is_mlp_kind(kind) && !is_forest_kind(kind))
    throw UsageError("unknown model kind '" + kind + "' (expected " + model_kind_list() + ")");
}

// Parses x,y,z[,lx,ly] columns by header name; other columns are ignored.
Eigen::MatrixXd read_points(const std::string& path, int arity)
{
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot read " + path);
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error(path + ": empty file");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
      header.push_back(cell);
  }
  const std::vector<std::string> wanted =
      arity == 5 ? variable_feature_names() : fixed_feature_names();
  std::vector<std::size_t> cols;
  for (const auto& name : wanted) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end())
      throw std::runtime_error(path + ": missing column '" + name + "'");
    cols.push_back(static_cast<std::size_t>(it - header.begin()));
  }
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty())
      continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ','))
      cells.push_back(cell);
    std::vector<double> row;
    for (auto c : cols) {
      if (c >= cells.size())
        throw std::runtime_error(path + ": short row");
      row.push_back(std::stod(cells[c]));
    }
    rows.push_back(std::move(row));
  }
  Eigen::MatrixXd x(static_cast<Eigen::Index>(rows.size()), arity);
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (int k = 0; k < arity; ++k)
      x(static_cast<Eigen::Index>(i), k) = rows[i][static_cast<std::size_t>(k)];
  return x;
}

json resolved_config(const CLI::App* sub)
{
  json cfg = json::object();
  for (const CLI::Option* opt : sub->get_options()) {
    if (opt->get_lnames().empty() || opt->get_lnames().front().rfind("help", 0) == 0)
      continue;
    const auto& key = opt->get_lnames().front();
    if (opt->count() > 0) {
      const auto& r = opt->results();
      cfg[key] = r.size() == 1 ? json(r.front()) : json(r);
    } else if (opt->get_items_expected_max() == 0) {
      cfg[key] = false;
    } else if (!opt->get_default_str().empty()) {
      cfg[key] = opt->get_default_str();
    } else {
      cfg[key] = nullptr;
    }
  }
  return cfg;
}

fs::path meta_dir_for(const std::string& out)
{
  if (out.empty())
    return fs::current_path();
  const fs::path parent = fs::path(out).parent_path();
  return parent.empty() ? fs::path(".") : parent;
}

int run_parsed(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int replay(const std::string& meta_path, std::ostream& out, std::ostream& err)
{
  const json meta = read_json(meta_path);
  if (meta.value("tool", "") != "lumen-rem" || !meta.contains("argv"))
    throw UsageError(meta_path + " is not a run.meta.json document");
  const auto argv = meta.at("argv").get<std::vector<std::string>>();
  const fs::path here = fs::current_path();
  const fs::path cwd = meta.value("cwd", here.string());
  fs::current_path(cwd);
  try {
    const int code = run_parsed(argv, out, err);
    fs::current_path(here);
    return code;
  } catch (...) {
    fs::current_path(here);
    throw;
  }
}

int run_parsed(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  CLI::App app{"Indoor VLC channel simulation and RSS radio-map regression", "lumen-rem"};
  app.set_help_all_flag("--help-all", "Help for every subcommand");
  std::string replay_path;
  app.add_option("--replay", replay_path, "Rerun the command recorded in a run.meta.json")
      ->check(CLI::ExistingFile);

  // generate
  auto* gen = app.add_subcommand("generate", "Simulate a labelled RSS dataset");
  std::string g_scene = "mid", g_out;
  int g_leds = 1;
  std::size_t g_per_axis = 50, g_per_xy = 20, g_per_z = 10, g_per_dim = 10, g_reference = 0;
  bool g_variable = false;
  std::uint64_t g_seed = 0;
  double g_noise = 0.0, g_edge = kDefaultPatchEdge;
  gen->add_option("--scene", g_scene, "Preset (small, mid, big) or scene JSON file")
      ->capture_default_str();
  gen->add_option("--leds", g_leds, "LED count for presets and variable rooms")
      ->check(CLI::IsMember({1, 4}))
      ->capture_default_str();
  gen->add_option("--per-axis", g_per_axis, "Fixed room: draws per axis (per_axis^3 rows)")
      ->capture_default_str();
  gen->add_flag("--variable", g_variable, "Variable room dimensions (features x,y,z,lx,ly)");
  gen->add_option("--per-xy", g_per_xy, "Variable rooms: draws per horizontal axis")
      ->capture_default_str();
  gen->add_option("--per-z", g_per_z, "Variable rooms: height draws")->capture_default_str();
  gen->add_option("--per-dim", g_per_dim, "Variable rooms: draws per room dimension")
      ->capture_default_str();
  gen->add_option("--reference", g_reference,
                  "Draw N independent positions instead of the product grid");
  gen->add_option("--seed", g_seed, "Master seed")->capture_default_str();
  gen->add_option("--noise-factor", g_noise, "Gaussian noise std as a multiple of std(P)")
      ->capture_default_str();
  gen->add_option("--patch-edge", g_edge, "Wall patch edge in meters")->capture_default_str();
  gen->add_option("--out", g_out, "Output CSV")->required();

  // train
  auto* trn = app.add_subcommand("train", "Fit a regressor on a dataset CSV");
  std::string t_model = "mlp32x128", t_data, t_out;
  std::size_t t_size = 12500;
  int t_epochs = 250, t_batch = 128;
  std::uint64_t t_seed = 0;
  ForestParams t_forest;
  trn->add_option("--model", t_model, model_kind_list())->capture_default_str();
  trn->add_option("--data", t_data, "Dataset CSV")->required()->check(CLI::ExistingFile);
  trn->add_option("--train-size", t_size, "Rows drawn before the 60/20/20 split")
      ->capture_default_str();
  trn->add_option("--epochs", t_epochs)->capture_default_str();
  trn->add_option("--batch-size", t_batch)->capture_default_str();
  trn->add_option("--seed", t_seed)->capture_default_str();
  add_tree_flags(trn, t_forest);
  trn->add_option("--out", t_out, "Model JSON")->required();

  // evaluate
  auto* evl = app.add_subcommand("evaluate", "MAE/MAPE of a model on a reference CSV");
  std::string e_model, e_ref, e_out;
  evl->add_option("--model", e_model, "Model JSON")->required()->check(CLI::ExistingFile);
  evl->add_option("--reference", e_ref, "Reference CSV")->required()->check(CLI::ExistingFile);
  evl->add_option("--out", e_out, "Report JSON")->required();

  // predict
  auto* prd = app.add_subcommand("predict", "Model RSS at given receiver positions");
  std::string p_model, p_points, p_out;
  std::vector<double> p_at;
  prd->add_option("--model", p_model, "Model JSON")->required()->check(CLI::ExistingFile);
  prd->add_option("--points", p_points, "CSV with x,y,z[,lx,ly] columns")
      ->check(CLI::ExistingFile);
  prd->add_option("--at", p_at, "One position: x y z [lx ly]")->expected(3, 5);
  prd->add_option("--out", p_out, "Output CSV (stdout when omitted)");

  // map
  auto* mp = app.add_subcommand("map", "Radio map on a horizontal plane");
  std::string m_model, m_scene = "mid", m_out, m_pgm;
  bool m_simulate = false;
  int m_leds = 1;
  std::vector<double> m_room;
  double m_z = 1.0, m_spacing = 0.05, m_edge = kDefaultPatchEdge;
  auto* m_model_opt =
      mp->add_option("--model", m_model, "Model JSON")->check(CLI::ExistingFile);
  auto* m_sim_opt = mp->add_flag("--simulate", m_simulate, "Use the channel simulator");
  m_model_opt->excludes(m_sim_opt);
  mp->add_option("--scene", m_scene, "Preset or scene JSON file")->capture_default_str();
  mp->add_option("--leds", m_leds)->check(CLI::IsMember({1, 4}))->capture_default_str();
  mp->add_option("--room", m_room, "Variable room footprint: lx ly")->expected(2);
  mp->add_option("--z", m_z, "Plane height")->capture_default_str();
  mp->add_option("--spacing", m_spacing, "Cell size in meters")->capture_default_str();
  mp->add_option("--patch-edge", m_edge)->capture_default_str();
  mp->add_option("--out", m_out, "Map CSV")->required();
  mp->add_option("--pgm", m_pgm, "Optional PGM image");

  // bench
  auto* bch = app.add_subcommand("bench", "Training and inference timing");
  std::string b_kind = "mlp32x128", b_data, b_out;
  int b_reps = 3, b_epochs = 250, b_batch = 128;
  std::size_t b_size = 12500, b_samples = 10000;
  std::uint64_t b_seed = 0;
  ForestParams b_forest;
  bch->add_option("--model-kind", b_kind, model_kind_list())->capture_default_str();
  bch->add_option("--data", b_data, "Dataset CSV")->required()->check(CLI::ExistingFile);
  bch->add_option("--reps", b_reps)->capture_default_str();
  bch->add_option("--train-size", b_size)->capture_default_str();
  bch->add_option("--epochs", b_epochs)->capture_default_str();
  bch->add_option("--batch-size", b_batch)->capture_default_str();
  bch->add_option("--predict-samples", b_samples)->capture_default_str();
  bch->add_option("--seed", b_seed)->capture_default_str();
  add_tree_flags(bch, b_forest);
  bch->add_option("--out", b_out, "Report JSON (stdout when omitted)");

  // campaign
  auto* cmp = app.add_subcommand("campaign", "Repeated cross-product experiment");
  std::string c_spec, c_out;
  int c_reps = 0;
  cmp->add_option("--spec", c_spec, "Campaign JSON")->required()->check(CLI::ExistingFile);
  cmp->add_option("--reps", c_reps, "Override the spec's repetitions");
  cmp->add_option("--out", c_out, "Output directory")->required();

  app.require_subcommand(0, 1);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (!replay_path.empty()) {
    if (!app.get_subcommands().empty())
      throw UsageError("--replay takes no subcommand");
    return replay(replay_path, out, err);
  }
  if (app.get_subcommands().empty()) {
    err << app.help();
    return kExitUsage;
  }

  CLI::App* sub = app.get_subcommands().front();
  for (const char* name : {"--out", "--pgm"}) {
    if (sub->get_option_no_throw(name) == nullptr || sub == cmp)
      continue;
    const fs::path parent = fs::path(sub->get_option(name)->as<std::string>()).parent_path();
    if (!parent.empty())
      fs::create_directories(parent);
  }
  std::string primary_out;
  std::uint64_t seed = 0;
  std::vector<std::string> outputs;

  if (sub == gen) {
    if (!(g_noise >= 0.0))
      throw UsageError("--noise-factor must be >= 0");
    Dataset ds;
    if (g_variable) {
      ds = g_reference > 0
               ? generate_reference_variable(g_leds, g_reference, g_edge, g_seed)
               : generate_variable(g_leds, g_per_xy, g_per_z, g_per_dim, g_edge, g_seed);
    } else {
      const auto choice = resolve_scene(g_scene, g_leds);
      ds = g_reference > 0
               ? generate_reference(choice.scene, g_reference, g_edge, g_seed, choice.name)
               : generate_fixed(choice.scene, g_per_axis, g_edge, g_seed, choice.name);
    }
    if (g_noise > 0.0)
      ds = add_noise(ds, g_noise, derive_seed(g_seed, stream::noise)).data;
    write_csv(ds, g_out);
    out << ds.size() << " rows -> " << g_out << '\n';
    primary_out = g_out;
    seed = g_seed;
    outputs = {g_out, sidecar_path(g_out)};
  } else if (sub == trn) {
    check_kind(t_model);
    const Dataset ds = read_csv(t_data);
    if (t_size > ds.size())
      throw std::invalid_argument("--train-size " + std::to_string(t_size) + " exceeds the "
                                  + std::to_string(ds.size()) + " rows in " + t_data);
    const auto splits = split(subsample(ds, t_size, t_seed), t_seed);
    TrainOptions opts{t_model, t_epochs, t_batch, t_forest, t_seed};
    const Regressor model = train_regressor(opts, splits);
    save_regressor(model, t_out);
    out << describe(model) << " trained on " << splits.train.size() << " rows -> " << t_out
        << '\n';
    primary_out = t_out;
    seed = t_seed;
    outputs = {t_out};
  } else if (sub == evl) {
    const Regressor model = load_regressor(e_model);
    const EvalReport report = evaluate(model, read_csv(e_ref));
    write_file(e_out, json(report).dump(2) + '\n');
    out << "MAE " << num(report.mae_dbm) << " dB over " << report.n_points << " points\n";
    primary_out = e_out;
    outputs = {e_out};
  } else if (sub == prd) {
    if (p_points.empty() == p_at.empty())
      throw UsageError("predict needs exactly one of --points or --at");
    const Regressor model = load_regressor(p_model);
    const int k = arity(model);
    Eigen::MatrixXd x;
    if (!p_at.empty()) {
      if (static_cast<int>(p_at.size()) != k)
        throw UsageError("--at needs " + std::to_string(k) + " values for this model");
      x = Eigen::Map<const Eigen::RowVectorXd>(p_at.data(), k);
    } else {
      x = read_points(p_points, k);
    }
    const Eigen::VectorXd pred = predict(model, x);
    const auto names = k == 5 ? variable_feature_names() : fixed_feature_names();
    std::string text;
    for (const auto& n : names)
      text += n + ',';
    text += "rss_dbm\n";
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      for (int c = 0; c < k; ++c)
        text += num(x(i, c)) + ',';
      text += num(pred(i)) + '\n';
    }
    if (p_out.empty()) {
      out << text;
    } else {
      write_file(p_out, text);
      outputs = {p_out};
    }
    primary_out = p_out;
  } else if (sub == mp) {
    if (!m_simulate && m_model.empty())
      throw UsageError("map needs --model or --simulate");
    Scene scene;
    if (!m_room.empty())
      scene = variable_scene(m_room[0], m_room[1], m_leds);
    else
      scene = resolve_scene(m_scene, m_leds).scene;
    const RadioMap map = m_simulate ? simulate_map(scene, m_z, m_spacing, m_edge)
                                    : predict_map(load_regressor(m_model), scene, m_z, m_spacing);
    write_map_csv(map, m_out);
    outputs = {m_out};
    if (!m_pgm.empty()) {
      write_map_pgm(map, m_pgm);
      outputs.push_back(m_pgm);
    }
    const auto [ix, iy] = map.argmax();
    const auto peak = map.cell_point(ix, iy);
    out << map.nx() << 'x' << map.ny() << " cells, peak " << num(map.values.maxCoeff())
        << " dBm at (" << num(peak.x()) << ", " << num(peak.y()) << ") -> " << m_out << '\n';
    primary_out = m_out;
  } else if (sub == bch) {
    check_kind(b_kind);
    TrainOptions opts{b_kind, b_epochs, b_batch, b_forest, b_seed};
    const Dataset ds = read_csv(b_data);
    if (b_size > ds.size())
      throw std::invalid_argument("--train-size exceeds the rows in " + b_data);
    const TimingReport report = benchmark(opts, ds, b_size, b_reps, b_samples);
    const std::string text = json(report).dump(2) + '\n';
    if (b_out.empty()) {
      out << text;
    } else {
      write_file(b_out, text);
      outputs = {b_out};
    }
    primary_out = b_out;
    seed = b_seed;
  } else if (sub == cmp) {
    CampaignSpec spec = read_json(c_spec).get<CampaignSpec>();
    if (c_reps > 0)
      spec.repetitions = c_reps;
    const CampaignResult result = run_campaign(spec);
    write_campaign(result, c_out);
    write_file(fs::path(c_out) / (spec.name + "_spec.json"), json(spec).dump(2) + '\n');
    out << result.cells.size() << " cells -> " << c_out << '\n';
    seed = spec.seed;
    outputs = {c_out};
  }

  const fs::path dir = sub == cmp ? fs::path(c_out) : meta_dir_for(primary_out);
  json meta = {{"tool", "lumen-rem"},
               {"subcommand", sub->get_name()},
               {"argv", args},
               {"cwd", fs::current_path().string()},
               {"seed", seed},
               {"config", resolved_config(sub)},
               {"outputs", outputs}};
  write_file(dir / "run.meta.json", meta.dump(2) + '\n');
  return kExitOk;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  try {
    return run_parsed(args, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}

int run_cli(int argc, char** argv)
{
  std::vector<std::string> args(argv + (argc > 0 ? 1 : 0), argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

} // namespace lumen
