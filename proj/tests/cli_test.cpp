#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "clearance/json_io.hpp"
#include "clearance/score_model.hpp"

namespace clearance {
namespace {

namespace fs = std::filesystem;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    char tmpl[] = "/tmp/clearance_cli_XXXXXX";
    ASSERT_NE(mkdtemp(tmpl), nullptr);
    dir_ = tmpl;
  }
  void TearDown() override {
    std::error_code ec;
    fs::remove_all(dir_, ec);
  }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  int run(const std::string& args) const {
    const std::string cmd = std::string(CLEARANCE_CLI_PATH) + " " + args + " 2>" + path("stderr.txt");
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  }

  std::string slurp(const std::string& name) const {
    std::ifstream in(path(name), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  Json json(const std::string& name) const { return Json::parse(slurp(name)); }

  void write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name), std::ios::binary) << text;
  }

  void make_scores() const {
    ASSERT_EQ(run("synth --n 2000 --prevalence 0.2 --pos-alpha 4 --pos-beta 3 --neg-alpha 2 --neg-beta 6 --seed 1 --out " +
                  path("train.csv")),
              0);
    ASSERT_EQ(run("synth --n 1500 --prevalence 0.2 --pos-alpha 4 --pos-beta 3 --neg-alpha 2 --neg-beta 6 --seed 2 --out " +
                  path("test.csv")),
              0);
  }

  fs::path dir_;
};

TEST_F(Cli, OptimizeWritesPolicyReportAndManifest) {
  make_scores();
  ASSERT_EQ(run("optimize --train " + path("train.csv") + " --test " + path("test.csv") +
                " --rho 0.3 --out " + path("policy.json")),
            0);
  const auto j = json("policy.json");
  EXPECT_EQ(j["status"], "ok");
  for (const char* k : {"l", "h", "workload_reduction", "recall_rate_pct_improvement"})
    EXPECT_TRUE(j["report"].contains(k)) << k;
  EXPECT_LE(j["report"]["l"].get<double>(), j["report"]["h"].get<double>());
  const auto& m = j["manifest"];
  EXPECT_EQ(m["command"], "optimize");
  EXPECT_EQ(m["params"]["lambda"], 0.5);
  EXPECT_EQ(m["params"]["rho"], 0.3);
  EXPECT_EQ(m["inputs"]["train"]["sha256"].get<std::string>().size(), 64u);
  EXPECT_TRUE(m.contains("version"));
}

TEST_F(Cli, InfeasibleExitsWithDedicatedCode) {
  write("overlap.csv", "device_id,score,label\na,0.2,1\nb,0.3,1\nc,0.6,0\nd,0.7,0\n");
  EXPECT_EQ(run("optimize --train " + path("overlap.csv") + " --xi-ru 0.9 --xi-as 0.9 --out " + path("p.json")), 2);
  const auto j = json("p.json");
  EXPECT_EQ(j["status"], "infeasible");
  EXPECT_EQ(j["policy"]["case"], "Infeasible");
  EXPECT_NE(j["reason"].get<std::string>().find("threshold_h"), std::string::npos);
}

TEST_F(Cli, BadInputExitsWithOneAndLineNumber) {
  write("bad.csv", "device_id,score,label\na,0.2,1\nb,1.5,0\n");
  EXPECT_EQ(run("optimize --train " + path("bad.csv")), 1);
  EXPECT_NE(slurp("stderr.txt").find("line 3"), std::string::npos);
  EXPECT_EQ(run("optimize --train " + path("missing.csv")), 1);
  EXPECT_EQ(run("no-such-command"), 1);
}

TEST_F(Cli, StochasticCommandsRequireSeed) {
  make_scores();
  EXPECT_EQ(run("synth --n 10 --out " + path("x.csv")), 1);
  EXPECT_NE(slurp("stderr.txt").find("--seed"), std::string::npos);
  EXPECT_EQ(run("inject --scores " + path("train.csv") + " --out " + path("x.csv")), 1);
  ASSERT_EQ(run("optimize --train " + path("train.csv") + " --out " + path("policy.json")), 0);
  EXPECT_EQ(run("committee --test " + path("test.csv") + " --policy " + path("policy.json")), 1);
}

TEST_F(Cli, CommitteeWithZeroSkillMatchesEvaluate) {
  make_scores();
  ASSERT_EQ(run("optimize --train " + path("train.csv") + " --rho 0.3 --out " + path("policy.json")), 0);
  ASSERT_EQ(run("evaluate --test " + path("test.csv") + " --policy " + path("policy.json") + " --out " +
                path("eval.json")),
            0);
  ASSERT_EQ(run("committee --k 0 --seed 9 --test " + path("test.csv") + " --policy " + path("policy.json") +
                " --out " + path("com.json")),
            0);
  EXPECT_EQ(json("eval.json")["metrics"], json("com.json")["metrics"]);
}

TEST_F(Cli, SweepEmitsTwentySevenRowsAfterManifest) {
  make_scores();
  ASSERT_EQ(run("sweep --train " + path("train.csv") + " --test " + path("test.csv") + " --out " + path("s.csv")), 0);
  std::istringstream in(slurp("s.csv"));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line.rfind("# manifest {", 0), 0u);
  std::getline(in, line);
  EXPECT_EQ(line.rfind("xi_ru,xi_as,rho,status", 0), 0u);
  int rows = 0;
  while (std::getline(in, line)) rows += !line.empty();
  EXPECT_EQ(rows, 27);
}

TEST_F(Cli, SynthOutputFeedsBackIntoReaders) {
  make_scores();
  std::ifstream in(path("train.csv"));
  const auto d = read_scores_csv(in);
  EXPECT_EQ(d.size(), 2000u);
  ASSERT_EQ(run("inject --scores " + path("train.csv") + " --seed 4 --out " + path("inj.csv")), 0);
  std::ifstream in2(path("inj.csv"));
  const auto e = read_scores_csv(in2);
  EXPECT_EQ(e.size(), 2100u);
  EXPECT_TRUE(e.back().fda_rejected);
}

TEST_F(Cli, CostRoutesOstomyToGastroUrology) {
  ASSERT_EQ(run("cost --avoided " CLEARANCE_DATA_DIR "/avoided_sample.csv --claims " CLEARANCE_DATA_DIR
                "/claims_sample.csv --crosswalk " CLEARANCE_DATA_DIR "/crosswalk.json --annual-submissions 3000"
                " --test-size 9572 --out " +
                path("cost.json")),
            0);
  const auto j = json("cost.json");
  const double gu = j["specialty_avg_allowed"]["Gastroenterology/Urology"].get<double>();
  EXPECT_NEAR(gu, (4.10 * 120000 + 5.30 * 80000) / 200000.0, 1e-9);
  const auto& per = j["savings"]["per_specialty"];
  EXPECT_NEAR(per["Gastroenterology/Urology"]["low"].get<double>(), 12000 * gu, 1e-6);
  EXPECT_FALSE(per["Gastroenterology/Urology"]["used_fallback"].get<bool>());
  EXPECT_TRUE(per["Radiology"]["used_fallback"].get<bool>());
  EXPECT_LE(j["savings"]["total_low"].get<double>(), j["savings"]["total_high"].get<double>());
  EXPECT_TRUE(j.contains("annualized"));
}

TEST_F(Cli, FeaturesFromJsonl) {
  ASSERT_EQ(run("features --devices " CLEARANCE_DATA_DIR "/submissions_sample.jsonl --out " + path("f.csv")), 0);
  std::istringstream in(slurp("f.csv"));
  std::string line;
  int rows = 0;
  while (std::getline(in, line))
    if (!line.empty() && line[0] != '#') ++rows;
  EXPECT_EQ(rows, 3);  // header + 2
  EXPECT_NE(slurp("f.csv").find("K201234,3,"), std::string::npos);
}

TEST_F(Cli, ParetoAndBuckets) {
  make_scores();
  ASSERT_EQ(run("pareto --train " + path("train.csv") + " --test " + path("test.csv") +
                " --lambda-levels 0.3,0.5,0.7 --cap 0.5 --out " + path("p.csv")),
            0);
  EXPECT_NE(slurp("p.csv").find("series,lambda"), std::string::npos);
  ASSERT_EQ(run("optimize --train " + path("train.csv") + " --rho 0.3 --out " + path("policy.json")), 0);
  std::ifstream in(path("test.csv"));
  std::string feat = "device_id,x\n";
  for (const auto& r : read_scores_csv(in)) feat += r.device_id + ",1\n";
  write("feat.csv", feat);
  ASSERT_EQ(run("buckets --test " + path("test.csv") + " --policy " + path("policy.json") + " --features " +
                path("feat.csv") + " --out " + path("b.csv")),
            0);
  EXPECT_NE(slurp("b.csv").find("label,decision,count,risk_mean,risk_sd,x_mean,x_sd"), std::string::npos);
}

TEST_F(Cli, MlOnlyReportsThreshold) {
  make_scores();
  ASSERT_EQ(run("ml-only --train " + path("train.csv") + " --test " + path("test.csv") + " --lambda 0.3 --out " +
                path("m.json")),
            0);
  const auto j = json("m.json");
  EXPECT_GT(j["threshold"].get<double>(), 0.0);
  EXPECT_TRUE(j["metrics"].contains("reject_safe"));
}

}  // namespace
}  // namespace clearance
