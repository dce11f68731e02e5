#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "solarcast_cli_tests";

struct Run {
  int code;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Run cli(const std::string& args) {
  fs::create_directories(kWork);
  const auto err_file = kWork / "stderr.txt";
  const std::string cmd = std::string(SOLARCAST_CLI) + " " + args + " >" + (kWork / "stdout.txt").string() +
                          " 2>" + err_file.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(err_file)};
}

std::string stdout_text() { return slurp(kWork / "stdout.txt"); }

const fs::path& dataset() {
  static const fs::path p = [] {
    const auto path = kWork / "data.csv";
    EXPECT_EQ(cli("synth --days 20 --step-min 60 --seed 5 --out " + path.string()).code, 0);
    return path;
  }();
  return p;
}

std::string train_args(const fs::path& out_dir, const std::string& extra = "") {
  return "train --data " + dataset().string() +
         " --model linreg,gbm --gbm-rounds 20 --seed 3 --out-dir " + out_dir.string() + " " + extra;
}

}  // namespace

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(cli("").code, 1);
  EXPECT_EQ(cli("frobnicate").code, 1);
  EXPECT_EQ(cli("train --data x.csv --model stack").code, 1);  // no seed
  EXPECT_EQ(cli("train --seed 1 --model xgboost").code, 1);
  EXPECT_EQ(cli("synth --days 2 --step-min 7 --seed 1 --out " + (kWork / "bad.csv").string()).code, 1);
  EXPECT_EQ(cli("--help").code, 0);
}

TEST(Cli, MissingDataFileExitsTwoAndNamesPath) {
  const auto r = cli("train --data /nonexistent/solar_input.csv --model linreg --seed 1 --out-dir " + (kWork / "never").string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("/nonexistent/solar_input.csv"), std::string::npos) << r.err;
}

TEST(Cli, MalformedDataExitsTwo) {
  const auto bad = kWork / "malformed.csv";
  std::ofstream(bad) << "timestamp,temperature,humidity,wind_speed,irradiance,power\nnot,a,row\n";
  EXPECT_EQ(cli("train --data " + bad.string() + " --model linreg --seed 1 --out " + (kWork / "never.solr").string()).code, 2);
}

TEST(Cli, BadModelFileExitsThree) {
  const auto bad = kWork / "bad.solr";
  std::ofstream(bad) << "not a model";
  const auto r = cli("predict --model " + bad.string() + " --data " + dataset().string() + " --out " +
                     (kWork / "p.csv").string());
  EXPECT_EQ(r.code, 3);
}

TEST(Cli, TrainEvaluatePredictReport) {
  const auto dir = kWork / "flow";
  fs::remove_all(dir);
  ASSERT_EQ(cli(train_args(dir)).code, 0);
  for (const char* f : {"model.solr", "ranking.csv", "report.csv", "error_table.txt", "scatter.svg", "predictions.csv"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  EXPECT_EQ(slurp(dir / "error_table.txt").rfind("\tActual\tPredicted\tError\n", 0), 0u);

  const auto eval_dir = kWork / "flow_eval";
  fs::remove_all(eval_dir);
  ASSERT_EQ(cli("evaluate --model " + (dir / "model.solr").string() + " --data " + dataset().string() +
                " --threshold-kw 0 --rows test --out-dir " + eval_dir.string())
                .code,
            0);
  // Re-scoring the recorded held-out rows reproduces the training-time report.
  EXPECT_EQ(slurp(eval_dir / "predictions.csv"), slurp(dir / "predictions.csv"));

  const auto preds = kWork / "preds.csv";
  ASSERT_EQ(cli("predict --model " + (dir / "model.solr").string() + " --data " + dataset().string() + " --out " +
                preds.string())
                .code,
            0);
  EXPECT_EQ(slurp(preds).rfind("row,timestamp,predicted_power\n", 0), 0u);

  ASSERT_EQ(cli("report --results " + dir.string() + " --format txt").code, 0);
  EXPECT_NE(stdout_text().find("RMSE"), std::string::npos);
  ASSERT_EQ(cli("report --results " + dir.string() + " --format svg").code, 0);
  EXPECT_NE(stdout_text().find("<svg"), std::string::npos);
}

TEST(Cli, PreprocessWritesCleanCsv) {
  const auto out = kWork / "clean.csv";
  ASSERT_EQ(cli("preprocess --data " + dataset().string() + " --policy clip --norm zscore --out " + out.string()).code,
            0);
  EXPECT_FALSE(slurp(out).empty());
}

TEST(Cli, RepeatedRunsAreByteIdenticalAcrossWorkerCounts) {
  const auto a = kWork / "det_a", b = kWork / "det_b", c = kWork / "det_c";
  for (const auto& d : {a, b, c}) fs::remove_all(d);
  ASSERT_EQ(cli(train_args(a)).code, 0);
  ASSERT_EQ(cli(train_args(b)).code, 0);
  ASSERT_EQ(cli(train_args(c, "--workers 2")).code, 0);
  for (const char* f : {"model.solr", "predictions.csv", "report.csv", "ranking.csv"}) {
    EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    EXPECT_EQ(slurp(a / f), slurp(c / f)) << f;
  }
}

TEST(Cli, ConfigFileMatchesFlagsAndFlagsWin) {
  const auto flags_dir = kWork / "cfg_flags", file_dir = kWork / "cfg_file";
  for (const auto& d : {flags_dir, file_dir}) fs::remove_all(d);
  ASSERT_EQ(cli(train_args(flags_dir)).code, 0);
  const auto cfg = kWork / "train.json";
  std::ofstream(cfg) << "{\"data\": \"" << dataset().string()
                     << "\", \"model\": [\"linreg\", \"gbm\"], \"gbm_rounds\": 20, \"seed\": 999, \"out_dir\": \""
                     << file_dir.string() << "\"}";
  ASSERT_EQ(cli("train --config " + cfg.string() + " --seed 3").code, 0);
  EXPECT_EQ(slurp(flags_dir / "model.solr"), slurp(file_dir / "model.solr"));
}
