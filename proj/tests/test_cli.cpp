#include <gtest/gtest.h>

#include <cstdlib>
#include <sys/wait.h>

#include "helpers.hpp"
#include "videc/btd_io.hpp"
#include "videc/manifest.hpp"

using namespace videc;
namespace fs = std::filesystem;

namespace {

int run(const std::string &args) {
  const std::string cmd = std::string(VIDEC_CLI) + " -q " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string q(const fs::path &p) { return "'" + p.string() + "'"; }

/// One small dataset shared by every test in the suite.
class Cli : public ::testing::Test {
protected:
  static void SetUpTestSuite() {
    dir_ = new test::TempDir("cli");
    ASSERT_EQ(run("synth --seed 3 --trials-per-class 10 --fs-raw 256 --out " + q(ds())), 0);
    ASSERT_EQ(run("preprocess --in " + q(ds()) + " --out " + q(ep())), 0);
    ASSERT_EQ(run("evaluate --k 5 --in " + q(ep()) + " --out " + q(res())), 0);
  }
  static void TearDownTestSuite() {
    delete dir_;
    dir_ = nullptr;
  }
  static fs::path ds() { return *dir_ / "ds"; }
  static fs::path ep() { return *dir_ / "ep"; }
  static fs::path res() { return *dir_ / "res"; }
  static fs::path scratch(const std::string &name) { return *dir_ / name; }

  static test::TempDir *dir_;
};

test::TempDir *Cli::dir_ = nullptr;

} // namespace

TEST_F(Cli, SynthWritesLoadableRecording) {
  const auto rec = load_recording(ds());
  EXPECT_EQ(rec.n_channels(), 64u);
  EXPECT_EQ(rec.events().size(), 60u);
  EXPECT_TRUE(fs::exists(ds() / "ground_truth.json"));
  const auto m = json::parse(read_file(ds() / "manifest.json"));
  EXPECT_EQ(m["command"], "synth");
  EXPECT_EQ(m["config"]["seed"], 3);
  EXPECT_FALSE(m.contains("timestamp"));
}

TEST_F(Cli, SynthIsByteIdenticalAcrossRuns) {
  const auto again = scratch("ds_again");
  ASSERT_EQ(run("synth --seed 3 --trials-per-class 10 --fs-raw 256 --out " + q(again)), 0);
  EXPECT_EQ(tree_digest(again), tree_digest(ds()));
  const auto other = scratch("ds_other");
  ASSERT_EQ(run("synth --seed 4 --trials-per-class 10 --fs-raw 256 --out " + q(other)), 0);
  EXPECT_NE(tree_digest(other), tree_digest(ds()));
}

TEST_F(Cli, PreprocessWritesEpochs) {
  const auto e = load_epochs(ep());
  EXPECT_EQ(e.n_trials(), 60u);
  EXPECT_EQ(e.fs(), 256.0);
  EXPECT_EQ(e.n_samples(), 563u);
  EXPECT_TRUE(fs::exists(ep() / "filter.json"));
}

TEST_F(Cli, EvaluateWritesSixCellsAndReport) {
  std::vector<std::string> cells;
  for (const auto &rel : tree_files(res() / "res"))
    if (fs::path(rel).filename() == "cv.json")
      cells.push_back(fs::path(rel).parent_path().filename().string());
  EXPECT_EQ(cells.size(), 6u);
  for (const auto &c : {"0-1__all64", "1-2__all64", "0-1__visual9", "1-2__visual9", "0-1__prefrontal9",
                        "1-2__prefrontal9"})
    EXPECT_NE(std::find(cells.begin(), cells.end(), c), cells.end()) << c;
  const auto report = read_file(res() / "report.txt");
  EXPECT_NE(report.find("0 - 1 s"), std::string::npos);
  EXPECT_NE(report.find("1 - 2 s"), std::string::npos);
  EXPECT_NE(report.find("group prefrontal9 (m = 1)"), std::string::npos);
  const auto cv = json::parse(read_file(res() / "res" / "ep" / "0-1__all64" / "cv.json"));
  EXPECT_EQ(cv["fold_accuracies"].size(), 5u);
  EXPECT_EQ(cv["cell"]["m"], 3);
}

TEST_F(Cli, EvaluateGroupSubsetAndDeterminism) {
  const auto out = scratch("res_all64");
  ASSERT_EQ(run("evaluate --k 5 --groups all64 --in " + q(ep()) + " --out " + q(out)), 0);
  int n = 0;
  for (const auto &rel : tree_files(out / "res"))
    n += fs::path(rel).filename() == "cv.json" ? 1 : 0;
  EXPECT_EQ(n, 2);
  const auto again = scratch("res_again");
  ASSERT_EQ(run("evaluate --k 5 --in " + q(ep()) + " --out " + q(again)), 0);
  EXPECT_EQ(read_file(again / "report.txt"), read_file(res() / "report.txt"));
  EXPECT_EQ(tree_digest(again, {"manifest.json"}), tree_digest(res(), {"manifest.json"}));
}

TEST_F(Cli, ManifestReproducesRun) {
  const auto out = scratch("res_from_manifest");
  ASSERT_EQ(run("evaluate --config " + q(res() / "manifest.json") + " --in " + q(ep()) + " --out " + q(out)), 0);
  EXPECT_EQ(tree_digest(out, {"manifest.json"}), tree_digest(res(), {"manifest.json"}));
}

TEST_F(Cli, StatsSelfComparisonNotSignificant) {
  const auto out = scratch("stats_self");
  ASSERT_EQ(run("stats --in " + q(res()) + " --pair 0-1__visual9,0-1__visual9 --out " + q(out)), 0);
  const auto j = json::parse(read_file(out / "stats.json"));
  ASSERT_EQ(j["tests"].size(), 1u);
  EXPECT_FALSE(j["tests"][0]["significant"].get<bool>());
  EXPECT_EQ(j["tests"][0]["p_value"], 1.0);
}

TEST_F(Cli, StatsExtremeAlphaFindsNothing) {
  const auto out = scratch("stats_alpha");
  ASSERT_EQ(run("stats --alpha 1e-9 --in " + q(res()) + " --out " + q(out)), 0);
  const auto j = json::parse(read_file(out / "stats.json"));
  EXPECT_EQ(j["tests"].size(), 5u);
  for (const auto &t : j["tests"])
    EXPECT_FALSE(t["significant"].get<bool>());
}

TEST_F(Cli, PatternsExportPerClassCsv) {
  const auto out = scratch("patterns");
  ASSERT_EQ(run("patterns --group visual9 --in " + q(ep()) + " --out " + q(out)), 0);
  EXPECT_TRUE(fs::exists(out / "model.json"));
  const auto csv = read_file(out / "patterns" / "light.csv");
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "channel,x,y,pattern_0,pattern_1");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 10);
  EXPECT_TRUE(fs::exists(out / "filters" / "water.csv"));
}

TEST_F(Cli, ReportRerendersSameTables) {
  const auto out = scratch("report");
  ASSERT_EQ(run("report --in " + q(res()) + " --out " + q(out)), 0);
  EXPECT_EQ(read_file(out / "report.txt"), read_file(res() / "report.txt"));
}

TEST_F(Cli, ExitCodes) {
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run("evaluate --in " + q(ep())), 2);
  EXPECT_EQ(run("evaluate --in " + q(scratch("nowhere")) + " --out " + q(scratch("x"))), 3);
  EXPECT_EQ(run("stats --sidedness sideways --in " + q(res()) + " --out " + q(scratch("y"))), 2);
  EXPECT_EQ(run("stats --pair nope,0-1__all64 --in " + q(res()) + " --out " + q(scratch("y"))), 2);
  EXPECT_EQ(run("synth --snr-db nan --out " + q(scratch("z"))), 2);
  EXPECT_EQ(run("evaluate --intervals 2-1 --in " + q(ep()) + " --out " + q(scratch("w"))), 2);
}
