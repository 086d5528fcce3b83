#include <gtest/gtest.h>

#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "vigil/core/json_io.hpp"

namespace fs = std::filesystem;
using vigil::json;

namespace {

const fs::path kSource = VIGIL_SOURCE_DIR;
const fs::path kFixtures = kSource / "fixtures";

struct Result {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("vigil_cli_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Runs the CLI with stdout and stderr captured to files.
  Result cli(const std::vector<std::string>& args) {
    pid_t pid = spawn(args);
    int status = 0;
    waitpid(pid, &status, 0);
    return collect(status);
  }

  pid_t spawn(const std::vector<std::string>& args) {
    pid_t pid = fork();
    if (pid == 0) {
      FILE* o = std::freopen((dir_ / "stdout").c_str(), "w", stdout);
      FILE* e = std::freopen((dir_ / "stderr").c_str(), "w", stderr);
      if (!o || !e) _exit(127);
      std::vector<char*> argv;
      std::string bin = VIGIL_CLI_PATH;
      argv.push_back(bin.data());
      std::vector<std::string> copy = args;
      for (auto& a : copy) argv.push_back(a.data());
      argv.push_back(nullptr);
      execv(bin.c_str(), argv.data());
      _exit(127);
    }
    return pid;
  }

  Result collect(int status) {
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
    r.out = slurp(dir_ / "stdout");
    r.err = slurp(dir_ / "stderr");
    return r;
  }

  fs::path write(const std::string& name, const std::string& text) {
    std::ofstream(dir_ / name) << text;
    return dir_ / name;
  }

  fs::path remote_config(const std::string& endpoint) {
    json j{{"stream", {{"manifest", (kFixtures / "stream_300.json").string()}}},
           {"filter", {{"vocab", (kSource / "assets/vocab/default.txt").string()}}},
           {"backends", {{"reasoner", {{"mode", "remote"}, {"endpoint", endpoint}, {"timeout", 0.3}}}}}};
    return write("remote.json", j.dump());
  }

  fs::path dir_;
};

std::vector<json> lines(const std::string& text) {
  std::vector<json> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) out.push_back(json::parse(line));
  }
  return out;
}

}  // namespace

TEST_F(Cli, RunWritesDecisionJsonl) {
  auto r = cli({"run", "--config", (kFixtures / "run_300.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto ds = lines(r.out);
  ASSERT_EQ(ds.size(), 3u);
  EXPECT_EQ(ds[0].at("v"), 1);
  EXPECT_EQ(ds[0].at("emitted_ts_us"), 3'300'000);
  auto counts = json::parse(r.err.substr(r.err.find('{')));
  EXPECT_EQ(counts.at("windows"), 3);
}

TEST_F(Cli, RunOutputIsDeterministicAndSeedOverrides) {
  auto cfg = (kFixtures / "run_300_jitter.json").string();
  auto a = cli({"run", "--config", cfg});
  auto b = cli({"run", "--config", cfg, "--wire"});
  auto c = cli({"run", "--config", cfg, "--seed", "8"});
  ASSERT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out, c.out);
}

TEST_F(Cli, MissingVocabularyIsConfigError) {
  auto r = cli({"run", "--config", (kFixtures / "missing_vocab.json").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("filter.vocab"), std::string::npos) << r.err;
}

TEST_F(Cli, BadSpeedIsConfigError) {
  auto r = cli({"run", "--config", (kFixtures / "run_300.json").string(), "--speed", "-3"});
  EXPECT_EQ(r.code, 2);
}

TEST_F(Cli, UnreachableRemoteExitsThree) {
  auto r = cli({"run", "--config", remote_config("http://127.0.0.1:9").string()});
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("reasoner"), std::string::npos) << r.err;
}

TEST_F(Cli, SimulateRejectsRemoteBackends) {
  auto r = cli({"simulate", "--config", remote_config("http://127.0.0.1:9").string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("backends.reasoner"), std::string::npos) << r.err;
}

TEST_F(Cli, SimulateReportsLatency) {
  auto r = cli({"simulate", "--config", (kFixtures / "latency_onset.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto j = json::parse(r.out);
  EXPECT_NEAR(j.at("detection").at("latency_s").get<double>(), 3.3, 1e-6);
  auto bad = cli({"simulate", "--config", (kFixtures / "latency_onset.json").string(), "--latency", "gpu=1"});
  EXPECT_EQ(bad.code, 2);
}

// Interrupting a finite-speed run still leaves complete JSONL lines.
TEST_F(Cli, SigintLeavesParseableOutput) {
  auto out = dir_ / "decisions.jsonl";
  pid_t pid = spawn({"run", "--config", (kFixtures / "run_300.json").string(), "--speed", "1", "--out", out.string()});
  std::this_thread::sleep_for(std::chrono::milliseconds(4500));  // past the first window close at 3.3 s
  kill(pid, SIGINT);
  int status = 0;
  waitpid(pid, &status, 0);
  auto r = collect(status);
  EXPECT_EQ(r.code, 0) << r.err;
  auto ds = lines(slurp(out));
  EXPECT_GE(ds.size(), 1u);
  EXPECT_LT(ds.size(), 3u);
}

TEST_F(Cli, EvalTableAndJson) {
  auto run = cli({"run", "--config", (kFixtures / "latency_onset.json").string()});
  ASSERT_EQ(run.code, 0);
  auto decisions = write("d.jsonl", run.out);
  auto refs = write("refs.json", R"({"shop_onset": ["a man hides a bottle under his jacket"]})");
  auto table = cli({"eval", "--decisions", decisions.string(), "--manifest", (kFixtures / "stream_onset.json").string(),
                    "--references", refs.string(), "--format", "table"});
  ASSERT_EQ(table.code, 0) << table.err;
  EXPECT_EQ(table.out.rfind("# METEOR", 0), 0u);
  auto j = cli({"eval", "--decisions", decisions.string(), "--manifest", (kFixtures / "stream_onset.json").string(),
                "--references", refs.string()});
  ASSERT_EQ(j.code, 0) << j.err;
  auto rep = json::parse(j.out);
  EXPECT_NEAR(rep.at("mean_latency_s").get<double>(), 3.3, 1e-9);
  EXPECT_TRUE(rep.at("text").contains("bleu"));
}

TEST_F(Cli, EvalBadDecisionLineIsRuntimeError) {
  auto decisions = write("d.jsonl", "{not json}\n");
  auto r = cli({"eval", "--decisions", decisions.string()});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("line 1"), std::string::npos) << r.err;
}

TEST_F(Cli, CorpusCommands) {
  auto s = cli({"corpus", "sample", "--from", "30", "--to", "100"});
  ASSERT_EQ(s.code, 0);
  EXPECT_EQ(json::parse(s.out), json::parse("[30,38,47,56,65,73,82,91]"));
  auto bad = cli({"corpus", "split", "--ratio", "2:8", "--length", "100"});
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("3:7, 1:1, 7:3"), std::string::npos);
  auto few = cli({"corpus", "sample", "--from", "0", "--to", "7"});
  EXPECT_EQ(few.code, 2);
  auto split = cli({"corpus", "split", "--ratio", "3:7", "--length", "100"});
  ASSERT_EQ(split.code, 0);
  EXPECT_EQ(json::parse(split.out).at("historical").size(), 30u);
}

TEST_F(Cli, SynthRoundTrip) {
  auto out = dir_ / "m.json";
  auto r = cli({"corpus", "synth", "--id", "x", "--frames", "50", "--marker", "anomaly_onset=1.0", "--out",
                out.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  auto m = json::parse(slurp(out));
  EXPECT_EQ(m.at("frames").size(), 50u);
  EXPECT_EQ(m.at("stream_id"), "x");
}
