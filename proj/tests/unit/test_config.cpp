#include <gtest/gtest.h>

#include "vigil/pipeline/config.hpp"

using namespace vigil;

namespace {

const std::filesystem::path kFixtures = std::filesystem::path(VIGIL_SOURCE_DIR) / "fixtures";

json minimal() {
  return json::parse(R"({"stream": {"manifest": "stream_300.json"},
                         "filter": {"vocab": "../assets/vocab/default.txt"}})");
}

bool mentions(const ConfigError& e, const std::string& path) {
  for (const auto& p : e.problems) {
    if (p.rfind(path + ":", 0) == 0) return true;
  }
  return false;
}

}  // namespace

TEST(Config, DefaultsFromMinimalDocument) {
  auto c = parse_config(minimal(), kFixtures);
  EXPECT_TRUE(std::isinf(c.speed));
  EXPECT_EQ(c.window, WindowConfig{});
  EXPECT_EQ(c.filter.tau, 3u);
  EXPECT_EQ(c.filter.horizon, 10u);
  EXPECT_EQ(c.bus, BusConfig{});
  EXPECT_EQ(c.agent3.threshold, 0.5);
  EXPECT_EQ(c.agent3.cold_start, ColdStart::empty_history);
  EXPECT_EQ(c.captioner.mode, BackendMode::mock);
  EXPECT_EQ(c.reasoner.kind, BackendKind::reasoner);
}

TEST(Config, FixtureRoundTrip) {
  for (const char* name : {"run_300.json", "run_300_jitter.json", "latency_onset.json"}) {
    auto c = load_config(kFixtures / name);
    auto back = parse_config(to_json_value(c), kFixtures);
    EXPECT_EQ(back, c) << name;
  }
}

TEST(Config, FullRoundTripWithEveryField) {
  PipelineConfig c;
  c.manifest = "stream_300.json";
  c.vocab = "../assets/vocab/default.txt";
  c.speed = 4.0;
  c.window.stride = 50;
  c.filter.tau = 5;
  c.filter.horizon = 12;
  c.filter.rule = ScreenRule::literal;
  c.bus.wire = true;
  c.bus.q3.capacity = 8;
  c.captioner.latency = LatencyModel::uniform(Duration{100'000}, Duration{300'000});
  c.captioner.faults.frames = {4, 5};
  c.captioner.faults.kind = FaultKind::timeout;
  c.captioner.caption_script.frames[7] = "seven";
  c.captioner.caption_script.ranges.push_back({0, 10, "low {id}"});
  c.summarizer.mode = BackendMode::remote;
  c.summarizer.remote = {"http://127.0.0.1:9000", Duration{1'500'000}, 3};
  ReasonerRule rule;
  rule.summary_contains = "bag";
  rule.frame_ids = std::set<FrameId>{1, 2};
  rule.response = {"a", "b", "c", 0.9};
  c.reasoner.reasoner_script.rules.push_back(rule);
  c.agent3.threshold = 0.7;
  c.agent3.cold_start = ColdStart::block;
  c.agent3.retrigger_period = Duration{500'000};
  c.seed = 99;
  EXPECT_EQ(parse_config(to_json_value(c), kFixtures), c);
}

TEST(Config, ReportsEveryProblemWithItsPath) {
  auto j = minimal();
  j["stream"]["speed"] = -1;
  j["window"]["stride"] = 0;
  j["agent3"]["threshold"] = 2.0;
  j["bus"]["q2"]["overflow"] = "sometimes";
  j["backends"]["reasoner"]["mode"] = "remote";
  j["backends"]["captioner"]["latency"] = {{"kind", "uniform"}, {"lo", 0.3}, {"hi", 0.1}};
  j["backends"]["summarizer"]["faults"] = {{"rate", 1.5}};
  try {
    parse_config(j, kFixtures);
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_TRUE(mentions(e, "stream.speed"));
    EXPECT_TRUE(mentions(e, "window"));
    EXPECT_TRUE(mentions(e, "agent3.threshold"));
    EXPECT_TRUE(mentions(e, "bus.q2.overflow"));
    EXPECT_TRUE(mentions(e, "backends.reasoner.endpoint"));
    EXPECT_TRUE(mentions(e, "backends.captioner.latency"));
    EXPECT_TRUE(mentions(e, "backends.summarizer.faults.rate"));
  }
}

TEST(Config, MissingManifestAndVocab) {
  try {
    parse_config(json::object(), kFixtures);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_TRUE(mentions(e, "stream.manifest"));
    EXPECT_TRUE(mentions(e, "filter.vocab"));
  }
  auto j = minimal();
  j["filter"]["vocab"] = "nope.txt";
  try {
    parse_config(j, kFixtures);
    FAIL();
  } catch (const ConfigError& e) {
    ASSERT_EQ(e.problems.size(), 1u);
    EXPECT_NE(e.problems[0].find("file not found"), std::string::npos);
  }
}

TEST(Config, WrongTypesAreNamed) {
  auto j = minimal();
  j["seed"] = "seven";
  j["filter"]["tau"] = "three";
  try {
    parse_config(j, kFixtures);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_TRUE(mentions(e, "filter.tau"));
    EXPECT_EQ(e.problems.size(), 2u);
  }
}

TEST(Config, EnvOverridesReplaceEndpoints) {
  auto c = parse_config(minimal(), kFixtures);
  apply_env_overrides(c, [](const char* name) -> const char* {
    if (std::string(name) == "VIGIL_REASONER_ENDPOINT") return "http://gpu:8000";
    if (std::string(name) == "VIGIL_CAPTIONER_ENDPOINT") return "";
    return nullptr;
  });
  EXPECT_EQ(c.reasoner.remote.endpoint, "http://gpu:8000");
  EXPECT_EQ(c.captioner.remote.endpoint, "");
}

TEST(Config, HorizonDefaultsToTwiceSamples) {
  auto j = minimal();
  j["window"]["samples_per_window"] = 7;
  EXPECT_EQ(parse_config(j, kFixtures).filter.horizon, 14u);
}

TEST(Config, RelativePathsResolveAgainstConfigDir) {
  auto c = load_config(kFixtures / "run_300.json");
  EXPECT_EQ(c.resolve(c.manifest), kFixtures / c.manifest);
  EXPECT_TRUE(std::filesystem::exists(c.resolve(c.vocab)));
}
