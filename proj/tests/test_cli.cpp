#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "readout/cli.hpp"

using namespace readout::cli;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "readout");
  std::ostringstream out;
  std::ostringstream err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("readout_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
    unsetenv(kSeedEnvVar);
  }
  void TearDown() override {
    fs::remove_all(dir_);
    unsetenv(kSeedEnvVar);
  }
  std::string path(const char* name) const { return (dir_ / name).string(); }
  static json read_json(const std::string& p) {
    std::ifstream f(p);
    return json::parse(f);
  }
  static std::string read_text(const std::string& p) {
    std::ifstream f(p);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
  }
  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, AnalyzeDefaultsToMaxViolation) {
  const auto r = invoke({"analyze", "--gamma", "3", "--out", path("a.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("-0.714"), std::string::npos) << r.out;
  const auto doc = read_json(path("a.json"));
  EXPECT_EQ(doc["schema_version"], kOutputSchemaVersion);
  EXPECT_EQ(doc["command"], "analyze");
  EXPECT_EQ(doc["config"]["plan"]["L"], 25);
  EXPECT_EQ(doc["config"]["plan"]["n_d"], 25);
  EXPECT_EQ(doc["config"]["problem"]["n_c"], 49);
  EXPECT_TRUE(doc["config"]["plan"].contains("alpha"));
  EXPECT_TRUE(doc["config"]["plan"].contains("beta"));
  EXPECT_NEAR(doc["config"]["problem"]["theta"].get<double>(), std::sqrt(1e-3), 1e-15);
  EXPECT_NEAR(doc["result"]["d"].get<double>(), -0.714, 0.002);
  EXPECT_TRUE(doc["result"]["violated"].get<bool>());
}

TEST_F(CliTest, AnalyzeSweep) {
  const auto r = invoke({"analyze", "--gamma", "3", "--L", "2", "--sweep", "--out", path("s.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto doc = read_json(path("s.json"));
  EXPECT_EQ(doc["sweep"].size(), 24u);
  EXPECT_LT(doc["result"]["min_d"].get<double>(), 0.0);
}

TEST_F(CliTest, PlanErrorsAreConfigErrors) {
  auto r = invoke({"analyze", "--gamma", "3", "--L", "3", "--nd", "10"});
  EXPECT_EQ(r.code, kExitConfigError);
  EXPECT_NE(r.err.find("multiple of L"), std::string::npos) << r.err;
  r = invoke({"analyze", "--gamma", "3", "--L", "3"});
  EXPECT_EQ(r.code, kExitConfigError);
  r = invoke({"analyze"});
  EXPECT_EQ(r.code, kExitConfigError);
  r = invoke({"analyze", "--gamma", "3", "--theta", "0.1"});
  EXPECT_EQ(r.code, kExitConfigError);
  r = invoke({"analyze", "--gamma", "3", "--bogus"});
  EXPECT_EQ(r.code, kExitConfigError);
  r = invoke({});
  EXPECT_EQ(r.code, kExitConfigError);
  r = invoke({"analyze", "--theta", "0.1", "--phi", "5"});
  EXPECT_EQ(r.code, kExitConfigError);
}

TEST_F(CliTest, HelpSucceeds) {
  EXPECT_EQ(invoke({"--help"}).code, kExitOk);
  const auto r = invoke({"montecarlo", "--help"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("--shots"), std::string::npos);
}

TEST_F(CliTest, LargeInitialProbabilityWarns) {
  const auto r = invoke({"analyze", "--theta", "0.5"});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.err.find("warning"), std::string::npos);
}

TEST_F(CliTest, MontecarloIsDeterministicAndEchoesSeed) {
  const std::vector<std::string> base = {"montecarlo", "--gamma", "3", "--trials", "20", "--seed", "5"};
  auto a = base;
  a.insert(a.end(), {"--out", path("a.json")});
  auto b = base;
  b.insert(b.end(), {"--out", path("b.json"), "--threads", "3"});
  ASSERT_EQ(invoke(a).code, kExitOk);
  ASSERT_EQ(invoke(b).code, kExitOk);
  const auto ja = read_json(path("a.json"));
  const auto jb = read_json(path("b.json"));
  EXPECT_EQ(ja["result"], jb["result"]);
  EXPECT_EQ(ja["config"]["seed"], 5);
  EXPECT_EQ(ja["config"]["seed_source"], "flag");
  EXPECT_EQ(ja["result"]["per_trial_d"].size(), 20u);

  setenv(kSeedEnvVar, "5", 1);
  ASSERT_EQ(invoke({"montecarlo", "--gamma", "3", "--trials", "20", "--out", path("c.json")}).code,
            kExitOk);
  const auto jc = read_json(path("c.json"));
  EXPECT_EQ(jc["config"]["seed_source"], std::string("env:") + kSeedEnvVar);
  EXPECT_EQ(jc["result"], ja["result"]);

  setenv(kSeedEnvVar, "abc", 1);
  EXPECT_EQ(invoke({"montecarlo", "--gamma", "3", "--trials", "2"}).code, kExitConfigError);
  unsetenv(kSeedEnvVar);
  ASSERT_EQ(invoke({"montecarlo", "--gamma", "3", "--trials", "2", "--out", path("d.json")}).code,
            kExitOk);
  EXPECT_EQ(read_json(path("d.json"))["config"]["seed_source"], "default");
}

TEST_F(CliTest, LandscapeWritesCsv) {
  const auto r = invoke({"landscape", "--gamma", "3", "--resolution", "4", "--out", path("g.csv"),
                         "--slices-out", path("s.csv")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto grid = read_text(path("g.csv"));
  EXPECT_EQ(grid.substr(0, grid.find('\n')), "beta,alpha,L,n_d,D");
  EXPECT_EQ(std::count(grid.begin(), grid.end(), '\n'), 1 + 15);
  const auto slices = read_text(path("s.csv"));
  EXPECT_EQ(slices.substr(0, slices.find('\n')), "L,n_d,beta,alpha,D");

  const auto s = invoke({"landscape", "--gamma", "3", "--resolution", "2", "--mode", "sampled",
                         "--trials", "3", "--shots", "100", "--seed", "1"});
  ASSERT_EQ(s.code, kExitOk) << s.err;
  EXPECT_EQ(s.out.substr(0, s.out.find('\n')), "beta,alpha,L,n_d,D,D_std");
  EXPECT_EQ(invoke({"landscape", "--gamma", "3", "--mode", "nope"}).code, kExitConfigError);
}

TEST_F(CliTest, SenmCheckRandomAndSpec) {
  auto r = invoke({"senm-check", "--random", "100", "--seed", "7", "--out", path("r.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto doc = read_json(path("r.json"));
  EXPECT_EQ(doc["result"]["models"], 100);
  EXPECT_EQ(doc["result"]["violations"], 0);
  EXPECT_GE(doc["result"]["min_d"].get<double>(), -1e-9);

  {
    std::ofstream f(path("spec.json"));
    f << R"({"steps": 2, "ensemble": {"num_symbols": 2, "num_copies": 1, "num_states": 2,
            "readout_map": [0, 1], "initial_dist": [1, 0]},
            "kernel": {"order": 1, "tables": [{"history": [0], "next": [0, 1]},
                                              {"history": [1], "next": [1, 0]}]}})";
  }
  r = invoke({"senm-check", "--spec", path("spec.json"), "--out", path("d.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(read_json(path("d.json"))["result"]["report"]["d"], 0.0);

  {
    std::ofstream f(path("bad.json"));
    f << R"({"steps": 2, "ensemble": {"num_symbols": 2}})";
  }
  r = invoke({"senm-check", "--spec", path("bad.json")});
  EXPECT_EQ(r.code, kExitConfigError);
  EXPECT_NE(r.err.find("bad.json"), std::string::npos) << r.err;
  EXPECT_EQ(invoke({"senm-check"}).code, kExitConfigError);
  EXPECT_EQ(invoke({"senm-check", "--spec", "x", "--random", "3"}).code, kExitConfigError);
}

TEST_F(CliTest, SenmCheckImitation) {
  const auto r = invoke({"senm-check", "--imitate", "--gamma", "3", "--L", "25", "--nd", "25", "--out",
                         path("i.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  const auto im = read_json(path("i.json"))["imitation"];
  EXPECT_LT(im["max_step_error"].get<double>(), 1e-12);
  EXPECT_GE(im["end_to_end_gap"].get<double>(), 0.3);
  EXPECT_GE(im["classical"]["d"].get<double>(), 0.0);
  EXPECT_NEAR(im["quantum"]["d"].get<double>(), -0.714, 0.002);
}

TEST_F(CliTest, ConfigFileSectionsAndOverrides) {
  {
    std::ofstream f(path("c.toml"));
    f << "[analyze]\ngamma = 4\nL = 2\nnd = 40\n\n[montecarlo]\ngamma = 3\ntrials = 4\n";
  }
  auto r = invoke({"analyze", "--config", path("c.toml"), "--out", path("a.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  auto doc = read_json(path("a.json"));
  EXPECT_EQ(doc["config"]["problem"]["gamma"], 4);
  EXPECT_EQ(doc["config"]["plan"]["n_d"], 40);

  r = invoke({"analyze", "--config", path("c.toml"), "--nd", "20", "--out", path("b.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(read_json(path("b.json"))["config"]["plan"]["n_d"], 20);

  r = invoke({"montecarlo", "--config", path("c.toml"), "--out", path("m.json")});
  ASSERT_EQ(r.code, kExitOk) << r.err;
  EXPECT_EQ(read_json(path("m.json"))["config"]["trials"], 4);

  {
    std::ofstream f(path("flat.toml"));
    f << "gamma = 3\n";
  }
  EXPECT_EQ(invoke({"analyze", "--config", path("flat.toml")}).code, kExitConfigError);
  EXPECT_EQ(invoke({"analyze", "--config", path("missing.toml")}).code, kExitConfigError);
}

TEST_F(CliTest, UnwritableOutputIsReported) {
  const auto r = invoke({"analyze", "--gamma", "3", "--out", "/nonexistent/dir/x.json"});
  EXPECT_EQ(r.code, kExitConfigError);
}

TEST_F(CliTest, ShippedPresetsRun) {
  std::size_t checked = 0;
  for (const auto& entry : fs::directory_iterator(READOUT_PRESET_DIR)) {
    if (entry.path().extension() != ".toml") continue;
    const auto text = read_text(entry.path().string());
    for (const std::string command : {"analyze", "montecarlo", "landscape", "senm-check"}) {
      if (text.find("[" + command + "]") == std::string::npos) continue;
      std::vector<std::string> args = {command, "--config", entry.path().string(), "--out",
                                       path("out")};
      if (command == "montecarlo") args.insert(args.end(), {"--trials", "3"});
      if (command == "landscape") args.insert(args.end(), {"--slices-out", path("slices"), "--trials", "2"});
      const auto r = invoke(args);
      EXPECT_EQ(r.code, kExitOk) << entry.path() << " " << command << ": " << r.err;
      ++checked;
    }
  }
  EXPECT_GE(checked, 15u);
}
