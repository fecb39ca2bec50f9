#include <sys/wait.h>
#include <unistd.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "json.hpp"

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("ptproc_cli_" + std::to_string(::getpid()) + "_" + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path path(const std::string& name) const { return dir_ / name; }

  Result run(const std::string& args, const std::string& env = "") const {
    const fs::path err = path("stderr.txt");
    const std::string cmd = "cd '" + dir_.string() + "' && env -u PTPROC_THREADS " + env + " '" PTPROC_CLI_PATH "' " +
                            args + " 2>'" + err.string() + "'";
    Result r;
    FILE* pipe = ::popen(cmd.c_str(), "r");
    if (!pipe) return r;
    char buf[4096];
    std::size_t n;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
    const int status = ::pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.err = slurp(err);
    return r;
  }

  void write(const std::string& name, const std::string& text) const {
    std::ofstream(path(name), std::ios::binary) << text;
  }

  fs::path dir_;
};

std::vector<std::string> lines_without_timing(const std::string& text) {
  std::vector<std::string> keep;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) {
    if (line.find("\"wall_seconds\"") == std::string::npos && line.find("\"time_variance\"") == std::string::npos) {
      keep.push_back(line);
    }
  }
  return keep;
}

std::vector<std::string> csv_lines(const std::string& text) {
  std::vector<std::string> rows;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) rows.push_back(line);
  return rows;
}

}  // namespace

TEST_F(Cli, EstimateStraussNearTableValue) {
  const Result r = run("estimate --engine ais --model strauss --beta 50 --gamma 0.6 --stat papangelou-origin --seed 7");
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out);
  const double mu = j["report"]["mu_hat"], se = j["report"]["se"];
  EXPECT_LE(std::abs(mu - 30.024), 3.0 * std::hypot(se, 1.461));
  EXPECT_LE(se / mu, 0.05 * 1.0000001);
  EXPECT_EQ(j["config"]["model"]["beta"], 50.0);
  EXPECT_EQ(j["config"]["statistic"]["kind"], "papangelou_origin");
  EXPECT_EQ(j["config"]["seed"], 7);
}

TEST_F(Cli, MissingBetaIsFieldLevelError) {
  const Result r = run("estimate --gamma 0.6");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("model.beta"), std::string::npos) << r.err;
  EXPECT_TRUE(r.out.empty());
}

TEST_F(Cli, MalformedAndUnknownConfigExitTwo) {
  write("bad.json", "{ not json");
  EXPECT_EQ(run("estimate --config bad.json --beta 50 --gamma 0.5").code, 2);
  write("typo.json", R"({"model": {"beta": 50, "gamma": 0.5, "gama": 1}})");
  const Result r = run("estimate --config typo.json");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("model.gama"), std::string::npos) << r.err;
  EXPECT_EQ(run("estimate --beta 50 --gamma 0.5 --engine gibbs").code, 2);
  EXPECT_EQ(run("estimate --beta -3 --gamma 0.5").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);
}

TEST_F(Cli, EngineFailureExitThree) {
  write("short.json", R"({"cftp": {"t_max": 1}})");
  const Result r = run("estimate --config short.json --engine cftp --beta 50 --gamma 0.5");
  EXPECT_EQ(r.code, 3);
  EXPECT_FALSE(r.err.empty());
}

TEST_F(Cli, SameSeedIsByteIdenticalApartFromTiming) {
  for (const char* engine : {"ais", "mh", "cftp"}) {
    const std::string args = std::string("estimate --engine ") + engine + " --beta 50 --gamma 0.8 --seed 3 --target-rel-se 0.1";
    const Result a = run(args);
    const Result b = run(args);
    ASSERT_EQ(a.code, 0) << a.err;
    ASSERT_EQ(b.code, 0) << b.err;
    EXPECT_EQ(lines_without_timing(a.out), lines_without_timing(b.out)) << engine;
    EXPECT_GT(lines_without_timing(a.out).size(), 20u);
  }
}

TEST_F(Cli, EchoedConfigReproducesRun) {
  const Result first = run("estimate --engine mh --model inhom-strauss --beta 50 --gamma 0.8 --stat boundary-count "
                           "--seed 5 --target-rel-se 0.2 --out first.json");
  ASSERT_EQ(first.code, 0) << first.err;
  const Result again = run("estimate --config first.json --out second.json");
  ASSERT_EQ(again.code, 0) << again.err;
  const Json a = Json::parse(slurp(path("first.json"))), b = Json::parse(slurp(path("second.json")));
  EXPECT_EQ(a["config"], b["config"]);
  EXPECT_EQ(a["report"]["mu_hat"], b["report"]["mu_hat"]);
  EXPECT_EQ(a["report"]["n_total"], b["report"]["n_total"]);
  EXPECT_EQ(a["config"]["model"]["alpha"], 1.0);
  EXPECT_EQ(a["config"]["statistic"]["band"], 0.49);
}

TEST_F(Cli, FlagsOverrideConfig) {
  write("c.json", R"({"model": {"kind": "strauss", "beta": 80, "gamma": 0.5}, "seed": 9, "target_rel_se": 0.2})");
  const Result r = run("estimate --config c.json --beta 40 --seed 10");
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j["config"]["model"]["beta"], 40.0);
  EXPECT_EQ(j["config"]["seed"], 10);
  EXPECT_EQ(j["config"]["target_rel_se"], 0.2);
}

TEST_F(Cli, ThreadsFromEnvironmentDoNotChangeResults) {
  const std::string args = "estimate --beta 50 --gamma 0.6 --seed 4 --target-rel-se 0.1";
  const Result one = run(args);
  const Result four = run(args, "PTPROC_THREADS=4");
  const Result flag = run(args + " --threads 2", "PTPROC_THREADS=4");
  ASSERT_EQ(one.code, 0);
  ASSERT_EQ(four.code, 0) << four.err;
  ASSERT_EQ(flag.code, 0) << flag.err;
  const Json a = Json::parse(one.out), b = Json::parse(four.out), c = Json::parse(flag.out);
  EXPECT_EQ(b["config"]["threads"], 4);
  EXPECT_EQ(c["config"]["threads"], 2);
  EXPECT_EQ(a["report"]["mu_hat"], b["report"]["mu_hat"]);
  EXPECT_EQ(a["report"]["se"], b["report"]["se"]);
}

TEST_F(Cli, AisTraceCsv) {
  const Result r = run("estimate --beta 50 --gamma 0.6 --seed 2 --out rep.json --trace");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = csv_lines(slurp(path("rep.json.trace.csv")));
  const Json j = Json::parse(slurp(path("rep.json")));
  ASSERT_EQ(rows.size(), j["report"]["steps"].get<std::size_t>() + 1);
  EXPECT_EQ(rows.front(), "t,rho_hat,mu_hat,sigma2_hat,n_total");
  EXPECT_EQ(rows[1].rfind("1,", 0), 0u);
}

TEST_F(Cli, BenchmarkEmptyCaseListIsHeaderOnly) {
  write("empty.json", R"({"cases": []})");
  const Result r = run("benchmark --config empty.json");
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "engine,beta,gamma,mu_hat,se,wall_seconds,n_samples,time_variance,tv_ratio_vs_ais\n");
}

TEST_F(Cli, BenchmarkAisOnlyRatiosAreOne) {
  const Result r = run("benchmark --preset paper-tables --engines ais --target-rel-se 0.3 --out b.csv");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = csv_lines(slurp(path("b.csv")));
  ASSERT_EQ(rows.size(), 11u);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    EXPECT_EQ(rows[i].rfind("ais,", 0), 0u);
    EXPECT_EQ(rows[i].substr(rows[i].rfind(',') + 1), "1");
  }
}

TEST_F(Cli, BenchmarkPaperTablesShapeAndMetadata) {
  const Result r = run("benchmark --preset paper-tables --target-rel-se 0.5 --seed 1 --out b.csv");
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string text = slurp(path("b.csv"));
  EXPECT_EQ(text.find('\r'), std::string::npos);
  const auto rows = csv_lines(text);
  // Table 1 grid without gamma = 0.2 (6 cells) plus the Table 3 grid (4 cells), three engines each.
  ASSERT_EQ(rows.size(), 1u + 30u);
  const char* order[3] = {"ais,", "mh,", "cftp,"};
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(rows[i].rfind(order[(i - 1) % 3], 0), 0u) << rows[i];
  EXPECT_EQ(rows[1].rfind("ais,50,0.4,", 0), 0u);
  EXPECT_EQ(rows[30].rfind("cftp,100,0.8,", 0), 0u);
  const Json meta = Json::parse(slurp(path("b.csv.meta.json")));
  EXPECT_TRUE(meta["hardware"].contains("hardware_concurrency"));
  EXPECT_EQ(meta["config"]["cases"].size(), 10u);
  EXPECT_EQ(meta["rows_per_case"], 3);
}

TEST_F(Cli, OracleTinyStraussMatchesGolden) {
  const Result r = run("oracle --preset tiny-strauss");
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out);
  EXPECT_EQ(j["result"]["mu"].get<double>(), 1.4133346185123228);
  EXPECT_LT(j["result"]["tail_bound"].get<double>(), 1e-6);
  EXPECT_GT(j["result"]["mc_se"].get<double>(), 0.0);
}

TEST_F(Cli, OraclePoissonPresetGivesBetaArea) {
  const Result r = run("oracle --preset tiny-poisson --mc-points 20000");
  ASSERT_EQ(r.code, 0) << r.err;
  const Json j = Json::parse(r.out);
  // h is constant given n, so mc_se vanishes; the remaining gap is series truncation.
  EXPECT_NEAR(j["result"]["mu"].get<double>(), 2.0, 3.0 * j["result"]["mc_se"].get<double>() + 1e-5);
}

TEST_F(Cli, OracleTailViolationExitThree) {
  const Result r = run("oracle --preset tiny-strauss --n-max 6 --mc-points 100");
  EXPECT_EQ(r.code, 3);
  const Json j = Json::parse(r.out);
  EXPECT_GT(j["error"]["tail_bound"].get<double>(), 1e-6);
  EXPECT_EQ(j["error"]["n_max"], 6);
  EXPECT_NE(r.err.find("tail bound"), std::string::npos);
}

TEST_F(Cli, SamplePoissonRows) {
  const Result r = run("sample --sampler poisson --rho 100 --seed 8 --out pts");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto rows = csv_lines(slurp(path("pts-0.csv")));
  ASSERT_FALSE(rows.empty());
  EXPECT_EQ(rows.front(), "x,y");
  EXPECT_NEAR(static_cast<double>(rows.size() - 1), 100.0, 40.0);
  const Json manifest = Json::parse(r.out);
  EXPECT_EQ(manifest["counts"][0].get<std::size_t>(), rows.size() - 1);
}

TEST_F(Cli, SampleCftpOneFilePerReplication) {
  const Result r = run("sample --sampler cftp --beta 50 --gamma 0.5 --replications 3 --seed 1 --out c");
  ASSERT_EQ(r.code, 0) << r.err;
  for (int i = 0; i < 3; ++i) {
    const auto rows = csv_lines(slurp(path("c-" + std::to_string(i) + ".csv")));
    ASSERT_FALSE(rows.empty());
    EXPECT_EQ(rows.front(), "x,y");
    for (std::size_t k = 1; k < rows.size(); ++k) {
      double x = 0.0, y = 0.0;
      ASSERT_EQ(std::sscanf(rows[k].c_str(), "%lf,%lf", &x, &y), 2);
      EXPECT_TRUE(std::abs(x) <= 0.5 && std::abs(y) <= 0.5);
    }
  }
}

TEST_F(Cli, SampleMhTrace) {
  write("mh.json", R"({"mh": {"burn_in": 100, "thin": 10}})");
  const Result r = run("sample --config mh.json --sampler mh --beta 50 --gamma 0.5 --replications 4 --trace --out m");
  ASSERT_EQ(r.code, 0) << r.err;
  const auto trace = csv_lines(slurp(path("m-trace.csv")));
  ASSERT_EQ(trace.size(), 1u + 1u + 100u + 3u * 10u);
  EXPECT_EQ(trace.front(), "step,n");
  EXPECT_EQ(trace.back().rfind("130,", 0), 0u);
  const Json manifest = Json::parse(r.out);
  const auto last = csv_lines(slurp(path("m-3.csv")));
  EXPECT_EQ(std::to_string(manifest["counts"][3].get<std::size_t>()), trace.back().substr(4));
  EXPECT_EQ(last.size() - 1, manifest["counts"][3].get<std::size_t>());
}
