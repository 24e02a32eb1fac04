#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <gtest/gtest.h>

#include "asaukit/approximation.hpp"
#include "cli/commands.hpp"
#include "cli/config.hpp"

namespace asaukit::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    root_ = fs::temp_directory_path() /
            ("asaukit_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(root_);
    fs::create_directories(root_);
  }
  void TearDown() override { fs::remove_all(root_); }

  std::string dir(const std::string& name) const { return (root_ / name).string(); }

  int run(std::vector<std::string> args) {
    args.insert(args.begin(), "asaukit");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    out_.str("");
    err_.str("");
    return run_cli(static_cast<int>(argv.size()), argv.data(), out_, err_);
  }

  std::string write_config(const std::string& name, const std::string& text) {
    const auto path = dir(name);
    std::ofstream(path) << text;
    return path;
  }

  fs::path root_;
  std::ostringstream out_;
  std::ostringstream err_;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

// Every output file except the wall-clock sidecar.
std::map<std::string, std::string> outputs(const std::string& d) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::directory_iterator(d)) {
    if (e.path().filename() != "timing.json") files[e.path().filename().string()] = slurp(e.path());
  }
  return files;
}

const char* kSmallCompare = R"({
  "compare": {
    "dataset": {"kind": "two_moons", "n": 100, "noise_sd": 0.1},
    "model": {"hidden": 6},
    "roster": [{"kind": "relu"}, {"kind": "asau", "beta": 5}, {"kind": "prelu"}],
    "train": {"max_epochs": 5, "batch_size": 16, "lr": 0.03, "patience": 5}
  }
})";

TEST_F(CliTest, CurvesDefaultEmitsThreeFamilies) {
  ASSERT_EQ(run({"curves", "--out", dir("c")}), kExitOk) << err_.str();
  for (const char* f : {"curves_max.csv", "curves_leaky.csv", "curves_relu.csv", "manifest.json", "timing.json"}) {
    EXPECT_TRUE(fs::exists(fs::path(dir("c")) / f)) << f;
  }
  std::ifstream in(fs::path(dir("c")) / "curves_relu.csv");
  const auto table = read_curve_csv(in);
  EXPECT_EQ(table.series.size(), 9u);
}

TEST_F(CliTest, CurvesLargeBetaTracksTarget) {
  ASSERT_EQ(run({"curves", "--out", dir("c"), "--override", "curves.betas=[10000]", "--override", "curves.alphas=[1]",
                 "--override", "curves.grid.step=0.001"}),
            kExitOk)
      << err_.str();
  std::ifstream in(fs::path(dir("c")) / "curves_relu.csv");
  const auto table = read_curve_csv(in);
  ASSERT_EQ(table.series.size(), 1u);
  for (std::size_t i = 0; i < table.x_grid.size(); ++i) EXPECT_LT(std::abs(table.series[0].values[i] - table.target_values[i]), 1e-3);
}

TEST_F(CliTest, BadGridIsUsageError) {
  EXPECT_EQ(run({"curves", "--out", dir("c"), "--override", "curves.grid.lo=3", "--override", "curves.grid.hi=1"}),
            kExitUsage);
  EXPECT_NE(err_.str().find("lo < hi"), std::string::npos) << err_.str();
}

TEST_F(CliTest, GradcheckDefaultPasses) {
  ASSERT_EQ(run({"gradcheck", "--out", dir("g")}), kExitOk) << err_.str() << out_.str();
  const auto report = ordered_json::parse(slurp(fs::path(dir("g")) / "gradcheck_report.json"));
  EXPECT_TRUE(report["passed"].get<bool>());
  EXPECT_EQ(report["scalar"]["samples"].get<int>(), 1000);
  EXPECT_TRUE(report["network"]["passed"].get<bool>());
}

TEST_F(CliTest, GradcheckNamesBrokenAlphaPartial) {
  CommandOptions opts;
  opts.out_dir = dir("g");
  opts.overrides = {"gradcheck.samples=200", "gradcheck.network=false"};
  const auto config = resolve_config(opts);
  const PartialsFn broken = [](double x, const AsauParams& p) {
    AsauGrad g = asau_partials(x, p);
    g.d_alpha = -g.d_alpha;
    return g;
  };
  std::ostringstream log;
  EXPECT_EQ(cmd_gradcheck(config, log, broken), kExitCheckFailed);
  EXPECT_NE(log.str().find("d_alpha"), std::string::npos);
  const auto report = ordered_json::parse(slurp(fs::path(dir("g")) / "gradcheck_report.json"));
  EXPECT_FALSE(report["passed"].get<bool>());
  EXPECT_GT(report["scalar"]["failures_by_partial"]["d_alpha"].get<int>(), 0);
  EXPECT_EQ(report["scalar"]["failures_by_partial"]["d_x"].get<int>(), 0);
  EXPECT_EQ(report["scalar"]["worst"][0]["partial"], "d_alpha");
}

TEST_F(CliTest, GradcheckZeroSamplesIsUsageError) {
  EXPECT_EQ(run({"gradcheck", "--out", dir("g"), "--override", "gradcheck.samples=0"}), kExitUsage);
}

TEST_F(CliTest, SweepDefaultIsMonotone) {
  ASSERT_EQ(run({"sweep", "--out", dir("s")}), kExitOk) << err_.str();
  const std::string csv = slurp(fs::path(dir("s")) / "sweep.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "beta,sup_error");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);
}

TEST_F(CliTest, SweepSingleBeta) {
  ASSERT_EQ(run({"sweep", "--out", dir("s"), "--override", "sweep.betas=[10]"}), kExitOk) << err_.str();
  std::istringstream csv(slurp(fs::path(dir("s")) / "sweep.csv"));
  std::string header;
  std::string row;
  std::getline(csv, header);
  std::getline(csv, row);
  const double err = std::stod(row.substr(row.find(',') + 1));
  EXPECT_NEAR(err, 3.1e-2, 0.2 * 3.1e-2);
}

TEST_F(CliTest, SweepRejectsNonIncreasingBetas) {
  EXPECT_EQ(run({"sweep", "--out", dir("s"), "--override", "sweep.betas=[10,1]"}), kExitUsage);
  EXPECT_EQ(run({"sweep", "--out", dir("s"), "--override", "sweep.betas=[]"}), kExitUsage);
}

TEST_F(CliTest, SweepNonMonotoneResultExitsOne) {
  // With alpha = 0 the error no longer depends on beta.
  EXPECT_EQ(run({"sweep", "--out", dir("s"), "--override", "sweep.base.alpha=0"}), kExitCheckFailed);
}

TEST_F(CliTest, CompareWritesTableAndArtifacts) {
  const auto cfg = write_config("small.json", kSmallCompare);
  ASSERT_EQ(run({"compare", "--config", cfg, "--out", dir("cmp")}), kExitOk) << err_.str();
  const fs::path d(dir("cmp"));
  const std::string csv = slurp(d / "metrics.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')),
            "activation,status,precision_macro,recall_macro,f1_macro,precision_micro,recall_micro,f1_micro,accuracy,mcc");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
  for (const char* label : {"relu", "asau", "prelu"}) {
    EXPECT_TRUE(fs::exists(d / ("history_" + std::string(label) + ".csv")));
    EXPECT_TRUE(fs::exists(d / ("model_" + std::string(label) + ".ckpt")));
    EXPECT_TRUE(fs::exists(d / ("confusion_" + std::string(label) + ".csv")));
  }
  const auto manifest = ordered_json::parse(slurp(d / "manifest.json"));
  EXPECT_EQ(manifest["tool"], "asaukit");
  EXPECT_EQ(manifest["command"], "compare");
  EXPECT_EQ(manifest["runs"].size(), 3u);
  EXPECT_EQ(manifest["config"]["compare"]["model"]["hidden"], 6);
  const auto timing = ordered_json::parse(slurp(d / "timing.json"));
  EXPECT_TRUE(timing["wall_clock_seconds"].is_number());
}

TEST_F(CliTest, CompareRosterRules) {
  EXPECT_EQ(run({"compare", "--out", dir("x"), "--override", "compare.roster=[]"}), kExitUsage);
  EXPECT_EQ(run({"compare", "--out", dir("x"), "--override", R"(compare.roster=[{"kind":"relu"}])"}), kExitUsage);
  EXPECT_EQ(run({"compare", "--out", dir("x"), "--override", R"(compare.roster=[{"kind":"relu"},{"kind":"relu"}])"}),
            kExitUsage);
  EXPECT_EQ(run({"compare", "--out", dir("x"), "--override", R"(compare.roster=[{"kind":"relu"},{"kind":"swish"}])"}),
            kExitUsage);
}

TEST_F(CliTest, CompareFlagsDivergedRows) {
  const auto cfg = write_config("small.json", kSmallCompare);
  ASSERT_EQ(run({"compare", "--config", cfg, "--out", dir("cmp"), "--override", "compare.train.lr=1e300",
                 "--override", "compare.train.weight_decay=0"}),
            kExitOk)
      << err_.str();
  const std::string csv = slurp(fs::path(dir("cmp")) / "metrics.csv");
  EXPECT_NE(csv.find("relu,diverged"), std::string::npos) << csv;
}

TEST_F(CliTest, SegmentationCompareHasFourColumnTable) {
  const auto cfg = write_config("seg.json", R"({
    "compare": {
      "task": "segmentation",
      "dataset": {"kind": "shapes", "n": 20, "h": 16, "w": 16},
      "model": {"channels": [2, 4]},
      "roster": [{"kind": "relu"}, {"kind": "lrelu"}, {"kind": "prelu"}, {"kind": "asau", "beta": 5}],
      "train": {"max_epochs": 2, "batch_size": 4, "lr": 0.01}
    }
  })");
  ASSERT_EQ(run({"compare", "--config", cfg, "--out", dir("seg")}), kExitOk) << err_.str();
  const std::string csv = slurp(fs::path(dir("seg")) / "metrics.csv");
  std::istringstream lines(csv);
  std::string line;
  std::vector<std::string> rows;
  while (std::getline(lines, line)) rows.push_back(line.substr(0, line.find(',')));
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "activation,status,mdsc,miou,recall,precision");
  EXPECT_EQ(rows, (std::vector<std::string>{"activation", "relu", "lrelu", "prelu", "asau"}));
}

TEST_F(CliTest, EveryCommandIsByteDeterministic) {
  const auto cfg = write_config("small.json", kSmallCompare);
  const std::vector<std::vector<std::string>> commands{
      {"curves"}, {"sweep"}, {"gradcheck", "--override", "gradcheck.samples=100"}, {"compare", "--config", cfg}};
  for (const auto& base : commands) {
    auto first = base;
    first.insert(first.end(), {"--seed", "77", "--out", dir("run1")});
    auto second = base;
    second.insert(second.end(), {"--seed", "77", "--out", dir("run2")});
    ASSERT_EQ(run(first), kExitOk) << base[0] << err_.str();
    ASSERT_EQ(run(second), kExitOk) << base[0] << err_.str();
    auto a = outputs(dir("run1"));
    auto b = outputs(dir("run2"));
    // The manifest echoes the output directory; compare it with that field aligned.
    auto ma = ordered_json::parse(a.at("manifest.json"));
    auto mb = ordered_json::parse(b.at("manifest.json"));
    ma["config"]["out"] = mb["config"]["out"];
    EXPECT_EQ(ma.dump(), mb.dump()) << base[0];
    a.erase("manifest.json");
    b.erase("manifest.json");
    EXPECT_EQ(a, b) << base[0];
    fs::remove_all(dir("run1"));
    fs::remove_all(dir("run2"));
  }
}

TEST_F(CliTest, SameOutDirRerunIsIdenticalIncludingManifest) {
  const auto cfg = write_config("small.json", kSmallCompare);
  ASSERT_EQ(run({"compare", "--config", cfg, "--out", dir("same")}), kExitOk);
  const auto first = outputs(dir("same"));
  ASSERT_EQ(run({"compare", "--config", cfg, "--out", dir("same")}), kExitOk);
  EXPECT_EQ(outputs(dir("same")), first);
}

TEST_F(CliTest, ThreadCountDoesNotChangeOutputs) {
  const auto cfg = write_config("small.json", kSmallCompare);
  setenv("ASAUKIT_THREADS", "1", 1);
  ASSERT_EQ(run({"compare", "--config", cfg, "--out", dir("t")}), kExitOk);
  const auto serial = outputs(dir("t"));
  setenv("ASAUKIT_THREADS", "3", 1);
  ASSERT_EQ(run({"compare", "--config", cfg, "--out", dir("t")}), kExitOk);
  unsetenv("ASAUKIT_THREADS");
  EXPECT_EQ(outputs(dir("t")), serial);
}

TEST_F(CliTest, SeedChangesCompareOutputs) {
  const auto cfg = write_config("small.json", kSmallCompare);
  ASSERT_EQ(run({"compare", "--config", cfg, "--seed", "1", "--out", dir("a")}), kExitOk);
  ASSERT_EQ(run({"compare", "--config", cfg, "--seed", "2", "--out", dir("b")}), kExitOk);
  EXPECT_NE(slurp(fs::path(dir("a")) / "model_relu.ckpt"), slurp(fs::path(dir("b")) / "model_relu.ckpt"));
}

TEST_F(CliTest, UsageErrors) {
  EXPECT_EQ(run({}), kExitUsage);
  EXPECT_EQ(run({"bogus"}), kExitUsage);
  EXPECT_EQ(run({"curves", "--nope"}), kExitUsage);
  EXPECT_EQ(run({"curves", "--seed", "abc"}), kExitUsage);
  EXPECT_EQ(run({"curves", "--config", dir("missing.json")}), kExitUsage);
  EXPECT_EQ(run({"curves", "--config", write_config("bad.json", "{not json")}), kExitUsage);
  EXPECT_EQ(run({"curves", "--override", "noequals"}), kExitUsage);
  EXPECT_EQ(run({"curves", "--out", dir("c"), "--override", "seed=-4"}), kExitUsage);
}

TEST_F(CliTest, UnwritableOutputDirectory) {
  const auto blocker = write_config("file", "x");
  EXPECT_EQ(run({"curves", "--out", blocker + "/sub"}), kExitUsage);
  EXPECT_NE(err_.str().find("output directory"), std::string::npos) << err_.str();
}

TEST_F(CliTest, HelpAndVersion) {
  EXPECT_EQ(run({"--help"}), kExitOk);
  EXPECT_NE(out_.str().find("compare"), std::string::npos);
  EXPECT_EQ(run({"--version"}), kExitOk);
  EXPECT_NE(out_.str().find(kToolVersion), std::string::npos);
}

TEST(Config, LayeringOrder) {
  CommandOptions opts;
  opts.overrides = {"seed=5", "out=from_override", "compare.train.lr=0.5"};
  opts.seed = 9;
  auto c = resolve_config(opts);
  EXPECT_EQ(c["seed"], 9);
  EXPECT_EQ(c["out"], "from_override");
  EXPECT_EQ(c["compare"]["train"]["lr"], 0.5);
  EXPECT_EQ(c["compare"]["train"]["batch_size"], 32);
}

TEST(Config, OverrideParsesJsonThenFallsBackToString) {
  auto c = default_config();
  apply_override(c, "compare.dataset.kind=blobs");
  apply_override(c, "compare.dataset.k=28");
  apply_override(c, "new.section.flag=true");
  EXPECT_EQ(c["compare"]["dataset"]["kind"], "blobs");
  EXPECT_EQ(c["compare"]["dataset"]["k"], 28);
  EXPECT_EQ(c["new"]["section"]["flag"], true);
  EXPECT_THROW(apply_override(c, "seed.inner=1"), UsageError);
  EXPECT_THROW(apply_override(c, "a..b=1"), UsageError);
}

TEST(Config, RosterEntries) {
  const auto asau = parse_roster_entry(ordered_json::parse(
      R"({"kind":"asau","a":0.01,"beta":3,"granularity":"channel","trainable":{"a":true,"beta":false}})"));
  EXPECT_EQ(asau.label, "asau");
  const auto& act = std::get<AsauActivation>(asau.spec);
  EXPECT_EQ(act.params, AsauParams(0.01, 1, 1, 3));
  EXPECT_EQ(act.granularity, Granularity::per_channel);
  EXPECT_EQ(act.trainable, (AsauMask{true, false, true, false}));
  const auto prelu = parse_roster_entry(ordered_json::parse(R"({"kind":"prelu","label":"p"})"));
  EXPECT_EQ(prelu.label, "p");
  EXPECT_TRUE(std::get<BaselineActivation>(prelu.spec).slope_trainable);
  EXPECT_THROW(parse_roster_entry(ordered_json::parse(R"({"kind":"asau","granularity":"pixel"})")), UsageError);
}

}  // namespace
}  // namespace asaukit::cli
