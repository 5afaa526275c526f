#include "lumen/cli.hpp"
#include "lumen/dataset.hpp"
#include "lumen/model.hpp"

#include "test_util.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace lumen;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args)
{
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string p(const fs::path& path) { return path.string(); }

} // namespace

TEST(Cli, GenerateAndTrain)
{
  const auto dir = testing_util::scratch_dir("cli_gen");
  const auto data = p(dir / "d.csv");
  auto r = cli({"generate", "--scene", "mid", "--leds", "1", "--per-axis", "10", "--seed", "7",
                "--out", data});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(read_csv(data).size(), 1000u);
  EXPECT_TRUE(fs::exists(dir / "d.meta.json"));
  EXPECT_TRUE(fs::exists(dir / "run.meta.json"));

  const auto model = p(dir / "m.json");
  r = cli({"train", "--model", "mlp32x128", "--data", data, "--train-size", "600", "--epochs", "50",
           "--batch-size", "32", "--seed", "1", "--out", model});
  ASSERT_EQ(r.code, 0) << r.err;
  const Regressor m = load_regressor(model);
  ASSERT_TRUE(std::holds_alternative<MlpModel>(m));
  EXPECT_EQ(std::get<MlpModel>(m).log.train_mse.size(), 50u);

  const auto meta = nlohmann::json::parse(testing_util::slurp(dir / "run.meta.json"));
  EXPECT_EQ(meta["subcommand"], "train");
  EXPECT_EQ(meta["seed"], 1);
  EXPECT_EQ(meta["config"]["epochs"], "50");
  EXPECT_EQ(meta["config"]["min-samples-leaf"], "1");
}

TEST(Cli, UsageErrors)
{
  EXPECT_EQ(cli({"generate", "--scene", "mid"}).code, kExitUsage);
  const auto r = cli({"train", "--data"});
  EXPECT_EQ(r.code, kExitUsage);
  EXPECT_FALSE(r.err.empty());
  EXPECT_EQ(cli({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(cli({"generate", "--out", "x.csv", "--bogus"}).code, kExitUsage);
  EXPECT_EQ(cli({}).code, kExitUsage);
  EXPECT_EQ(cli({"generate", "--scene", "nowhere.json", "--out", "x.csv"}).code, kExitUsage);
}

TEST(Cli, HelpForEverySubcommand)
{
  for (auto sub : {"generate", "train", "evaluate", "predict", "map", "bench", "campaign"}) {
    const auto r = cli({sub, "--help"});
    EXPECT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("--"), std::string::npos) << sub;
  }
}

TEST(Cli, RuntimeErrors)
{
  const auto dir = testing_util::scratch_dir("cli_runtime");
  const auto data = p(dir / "d.csv");
  ASSERT_EQ(cli({"generate", "--per-axis", "4", "--out", data}).code, 0);
  EXPECT_EQ(cli({"train", "--data", data, "--train-size", "100", "--out", p(dir / "m.json")}).code,
            kExitRuntime);
  std::ofstream(dir / "bad.json") << "{\"format\": \"other\"}";
  EXPECT_EQ(cli({"evaluate", "--model", p(dir / "bad.json"), "--reference", data, "--out",
                 p(dir / "r.json")})
                .code,
            kExitRuntime);
}

TEST(Cli, EvaluatePredictMap)
{
  const auto dir = testing_util::scratch_dir("cli_eval");
  const auto data = p(dir / "d.csv");
  const auto ref = p(dir / "ref.csv");
  ASSERT_EQ(cli({"generate", "--per-axis", "8", "--seed", "2", "--out", data}).code, 0);
  ASSERT_EQ(cli({"generate", "--reference", "25", "--seed", "3", "--out", ref}).code, 0);
  EXPECT_EQ(read_csv(ref).size(), 25u);
  const auto model = p(dir / "xt.json");
  ASSERT_EQ(cli({"train", "--model", "xt", "--n-trees", "5", "--data", data, "--train-size", "400",
                 "--out", model})
                .code,
            0);

  const auto report = p(dir / "report.json");
  auto r = cli({"evaluate", "--model", model, "--reference", ref, "--out", report});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(testing_util::slurp(report));
  EXPECT_EQ(j["n_points"], 25);
  EXPECT_GE(j["mae_dbm"].get<double>(), 0.0);

  r = cli({"predict", "--model", model, "--at", "2.5", "2.5", "1.0"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out.rfind("x,y,z,rss_dbm\n2.5,2.5,1,", 0), 0u);
  const auto pred = p(dir / "pred.csv");
  ASSERT_EQ(cli({"predict", "--model", model, "--points", ref, "--out", pred}).code, 0);
  const std::string text = testing_util::slurp(pred);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 26);
  EXPECT_EQ(cli({"predict", "--model", model}).code, kExitUsage);
  EXPECT_EQ(cli({"predict", "--model", model, "--at", "1", "1", "1", "3", "3"}).code, kExitUsage);

  ASSERT_EQ(cli({"map", "--simulate", "--spacing", "0.5", "--out", p(dir / "sim.csv"), "--pgm",
                 p(dir / "sim.pgm")})
                .code,
            0);
  ASSERT_EQ(cli({"map", "--model", model, "--spacing", "0.5", "--out", p(dir / "pred_map.csv")}).code,
            0);
  EXPECT_EQ(cli({"map", "--out", p(dir / "none.csv")}).code, kExitUsage);
  EXPECT_EQ(cli({"map", "--model", model, "--simulate", "--out", p(dir / "both.csv")}).code,
            kExitUsage);
}

TEST(Cli, ReplayIsByteIdentical)
{
  const auto dir = testing_util::scratch_dir("cli_replay");
  const auto data = p(dir / "gen" / "d.csv");
  ASSERT_EQ(cli({"generate", "--per-axis", "6", "--noise-factor", "0.1", "--seed", "4", "--out",
                 data})
                .code,
            0);
  const std::string first = testing_util::slurp(data);
  const std::string sidecar = testing_util::slurp(dir / "gen" / "d.meta.json");
  const std::string meta = testing_util::slurp(dir / "gen" / "run.meta.json");
  fs::remove(data);
  ASSERT_EQ(cli({"--replay", p(dir / "gen" / "run.meta.json")}).code, 0);
  EXPECT_EQ(testing_util::slurp(data), first);
  EXPECT_EQ(testing_util::slurp(dir / "gen" / "d.meta.json"), sidecar);
  EXPECT_EQ(testing_util::slurp(dir / "gen" / "run.meta.json"), meta);
  EXPECT_EQ(cli({"--replay", p(dir / "gen" / "d.meta.json")}).code, kExitUsage);
}
