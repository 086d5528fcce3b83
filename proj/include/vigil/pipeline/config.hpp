#pragma once

// Pipeline configuration. One JSON document:
//
// {
//   "stream":   {"manifest": "stream.json", "speed": "inf"},
//   "window":   {"window_len": 100, "stride": 70, "samples_per_window": 5,
//                "adjacent_count": 8, "adjacent_spacing": 0.1},
//   "filter":   {"vocab": "vocab.txt", "tau": 3, "horizon": 10,
//                "screen_rule": "prefix_cut", "enabled": true},
//   "bus":      {"wire": false,
//                "q1": {"capacity": 16, "overflow": "block"},
//                "q2": {"capacity": 1, "overflow": "latest_wins"},
//                "q3": {"capacity": 4096, "overflow": "drop_oldest"}},
//   "backends": {"captioner": {...}, "summarizer": {...}, "reasoner": {...}},
//   "prompts":  {"dir": "prompts"},
//   "agent3":   {"threshold": 0.5, "cold_start": "empty_history", "retrigger_period": 0},
//   "seed": 0
// }
//
// Relative paths resolve against the config file's directory. Times are in
// seconds. A backend section is either
//   {"mode": "remote", "endpoint": "http://host:port", "timeout": 2.0, "retries": 1}
// or
//   {"mode": "mock", "latency": {"kind": "fixed", "seconds": 0.1}
//                              | {"kind": "uniform", "lo": 0.1, "hi": 0.3},
//    "faults": {"rate": 0.0, "frames": [], "calls": [], "kind": "error"|"timeout"},
//    "script": {...}}
// Captioner script: {"frames": {"40": "text"}, "ranges": [{"from": 60, "to": 100, "text": "..."}],
//                    "fallback": "caption {id}"}
// Reasoner script:  {"rules": [{"summary": "...", "summary_contains": "...", "frame_ids": [..],
//                    "response": {"subject", "location", "cause", "score"}}], "default": {...}}
//
// Environment overrides: VIGIL_CAPTIONER_ENDPOINT, VIGIL_SUMMARIZER_ENDPOINT,
// VIGIL_REASONER_ENDPOINT replace the endpoint of the matching backend.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "vigil/agents/discrimination_agent.hpp"
#include "vigil/agents/summary_agent.hpp"
#include "vigil/backends/mock.hpp"
#include "vigil/backends/remote.hpp"
#include "vigil/bus/bus.hpp"
#include "vigil/windowing.hpp"

namespace vigil {

// Carries every problem found, each prefixed with its field path.
struct ConfigError : Error {
  explicit ConfigError(std::vector<std::string> problems)
      : Error(join(problems)), problems(std::move(problems)) {}
  std::vector<std::string> problems;

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out;
    for (const auto& p : v) {
      if (!out.empty()) out += "\n";
      out += p;
    }
    return out;
  }
};

struct BackendSpec {
  BackendKind kind = BackendKind::captioner;
  BackendMode mode = BackendMode::mock;
  RemoteOptions remote;
  LatencyModel latency;
  FaultPlan faults;
  CaptionScript caption_script;    // captioner only
  ReasonerScript reasoner_script;  // reasoner only

  friend bool operator==(const BackendSpec&, const BackendSpec&) = default;
};

inline BackendSpec spec_of(BackendKind kind) {
  BackendSpec s;
  s.kind = kind;
  return s;
}

struct PipelineConfig {
  std::string manifest;
  double speed = kUnlimitedSpeed;
  WindowConfig window;
  FilterConfig filter;
  std::string vocab;
  BusConfig bus;
  BackendSpec captioner = spec_of(BackendKind::captioner);
  BackendSpec summarizer = spec_of(BackendKind::summarizer);
  BackendSpec reasoner = spec_of(BackendKind::reasoner);
  std::string prompts_dir;  // empty: use the bundled prompts
  DiscriminationConfig agent3;
  std::uint64_t seed = 0;

  std::filesystem::path base_dir;  // not serialized

  std::filesystem::path resolve(const std::string& p) const {
    std::filesystem::path path(p);
    if (path.is_absolute() || base_dir.empty()) return path;
    return base_dir / path;
  }

  BackendSpec& backend(BackendKind k) {
    switch (k) {
      case BackendKind::captioner: return captioner;
      case BackendKind::summarizer: return summarizer;
      default: return reasoner;
    }
  }

  friend bool operator==(const PipelineConfig& a, const PipelineConfig& b) {
    auto same_speed = a.speed == b.speed || (std::isinf(a.speed) && std::isinf(b.speed));
    return a.manifest == b.manifest && same_speed && a.window == b.window && a.filter == b.filter &&
           a.vocab == b.vocab && a.bus == b.bus && a.captioner == b.captioner && a.summarizer == b.summarizer &&
           a.reasoner == b.reasoner && a.prompts_dir == b.prompts_dir && a.agent3 == b.agent3 && a.seed == b.seed;
  }
};

namespace config_detail {

inline json latency_json(const LatencyModel& l) {
  if (l.kind == LatencyModel::Kind::fixed) return {{"kind", "fixed"}, {"seconds", to_seconds(l.lo)}};
  return {{"kind", "uniform"}, {"lo", to_seconds(l.lo)}, {"hi", to_seconds(l.hi)}};
}

inline json response_json(const ReasonerResponse& r) { return json(r); }

inline json backend_json(const BackendSpec& b) {
  json j;
  if (b.mode == BackendMode::remote) {
    j = {{"mode", "remote"},
         {"endpoint", b.remote.endpoint},
         {"timeout", to_seconds(b.remote.timeout)},
         {"retries", b.remote.retries}};
    return j;
  }
  j["mode"] = "mock";
  j["latency"] = latency_json(b.latency);
  j["faults"] = {{"rate", b.faults.rate},
                 {"frames", b.faults.frames},
                 {"calls", b.faults.calls},
                 {"kind", b.faults.kind == FaultKind::timeout ? "timeout" : "error"}};
  if (b.kind == BackendKind::captioner) {
    json frames = json::object();
    for (const auto& [id, text] : b.caption_script.frames) frames[std::to_string(id)] = text;
    json ranges = json::array();
    for (const auto& r : b.caption_script.ranges) ranges.push_back({{"from", r.from}, {"to", r.to}, {"text", r.text}});
    j["script"] = {{"frames", frames}, {"ranges", ranges}, {"fallback", b.caption_script.fallback}};
  } else if (b.kind == BackendKind::reasoner) {
    json rules = json::array();
    for (const auto& r : b.reasoner_script.rules) {
      json rule{{"response", response_json(r.response)}};
      if (r.summary) rule["summary"] = *r.summary;
      if (r.summary_contains) rule["summary_contains"] = *r.summary_contains;
      if (r.frame_ids) rule["frame_ids"] = *r.frame_ids;
      rules.push_back(rule);
    }
    j["script"] = {{"rules", rules}, {"default", response_json(b.reasoner_script.fallback)}};
  }
  return j;
}

// Reads fields while collecting errors with their paths.
class Reader {
 public:
  std::vector<std::string> problems;

  void fail(const std::string& path, const std::string& what) { problems.push_back(path + ": " + what); }

  template <class T>
  void get(const json& obj, const char* key, const std::string& path, T& out) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    try {
      out = it->get<T>();
    } catch (const json::exception&) {
      fail(path + "." + key, "wrong type");
    }
  }

  void seconds(const json& obj, const char* key, const std::string& path, Duration& out) {
    auto it = obj.find(key);
    if (it == obj.end()) return;
    if (!it->is_number()) return fail(path + "." + key, "expected seconds as a number");
    double s = it->get<double>();
    if (!std::isfinite(s) || s < 0) return fail(path + "." + key, "must be a finite non-negative number");
    out = from_seconds(s);
  }

  const json* section(const json& root, const char* key, const std::string& path) {
    auto it = root.find(key);
    if (it == root.end()) return nullptr;
    if (!it->is_object()) {
      fail(path.empty() ? key : path + "." + key, "expected an object");
      return nullptr;
    }
    return &*it;
  }
};

inline ReasonerResponse read_response(Reader& rd, const json& j, const std::string& path) {
  try {
    return parse_reasoner_response(j);
  } catch (const BackendProtocolError& e) {
    rd.fail(path, e.what());
    return {};
  }
}

inline BackendSpec read_backend(Reader& rd, const json& j, BackendKind kind, const std::string& path) {
  BackendSpec b;
  b.kind = kind;
  std::string mode = "mock";
  rd.get(j, "mode", path, mode);
  if (mode == "remote") {
    b.mode = BackendMode::remote;
  } else if (mode != "mock") {
    rd.fail(path + ".mode", "expected 'mock' or 'remote'");
  }
  rd.get(j, "endpoint", path, b.remote.endpoint);
  rd.seconds(j, "timeout", path, b.remote.timeout);
  rd.get(j, "retries", path, b.remote.retries);
  if (b.remote.retries < 0) rd.fail(path + ".retries", "must be >= 0");

  if (const json* lat = rd.section(j, "latency", path)) {
    std::string lk = "fixed";
    rd.get(*lat, "kind", path + ".latency", lk);
    if (lk == "fixed") {
      Duration d{0};
      rd.seconds(*lat, "seconds", path + ".latency", d);
      b.latency = LatencyModel::fixed(d);
    } else if (lk == "uniform") {
      Duration lo{0}, hi{0};
      rd.seconds(*lat, "lo", path + ".latency", lo);
      rd.seconds(*lat, "hi", path + ".latency", hi);
      if (hi < lo) rd.fail(path + ".latency", "uniform needs lo <= hi");
      b.latency = LatencyModel::uniform(lo, hi);
    } else {
      rd.fail(path + ".latency.kind", "expected 'fixed' or 'uniform'");
    }
  }
  if (const json* f = rd.section(j, "faults", path)) {
    rd.get(*f, "rate", path + ".faults", b.faults.rate);
    if (!(b.faults.rate >= 0.0 && b.faults.rate <= 1.0)) rd.fail(path + ".faults.rate", "must be in [0,1]");
    rd.get(*f, "frames", path + ".faults", b.faults.frames);
    rd.get(*f, "calls", path + ".faults", b.faults.calls);
    std::string fk = "error";
    rd.get(*f, "kind", path + ".faults", fk);
    if (fk == "timeout") {
      b.faults.kind = FaultKind::timeout;
    } else if (fk != "error") {
      rd.fail(path + ".faults.kind", "expected 'error' or 'timeout'");
    }
  }
  if (const json* s = rd.section(j, "script", path)) {
    const std::string sp = path + ".script";
    if (kind == BackendKind::captioner) {
      if (const json* frames = rd.section(*s, "frames", sp)) {
        for (const auto& [key, val] : frames->items()) {
          try {
            b.caption_script.frames[std::stoll(key)] = val.get<std::string>();
          } catch (const std::exception&) {
            rd.fail(sp + ".frames." + key, "expected frame id key with string caption");
          }
        }
      }
      if (auto it = s->find("ranges"); it != s->end()) {
        if (!it->is_array()) {
          rd.fail(sp + ".ranges", "expected an array");
        } else {
          for (std::size_t i = 0; i < it->size(); ++i) {
            const auto& r = (*it)[i];
            try {
              b.caption_script.ranges.push_back(
                  {r.at("from").get<FrameId>(), r.at("to").get<FrameId>(), r.at("text").get<std::string>()});
            } catch (const json::exception&) {
              rd.fail(sp + ".ranges[" + std::to_string(i) + "]", "needs integer 'from', 'to' and string 'text'");
            }
          }
        }
      }
      rd.get(*s, "fallback", sp, b.caption_script.fallback);
    } else if (kind == BackendKind::reasoner) {
      if (auto it = s->find("rules"); it != s->end()) {
        if (!it->is_array()) {
          rd.fail(sp + ".rules", "expected an array");
        } else {
          for (std::size_t i = 0; i < it->size(); ++i) {
            const auto& r = (*it)[i];
            const std::string rp = sp + ".rules[" + std::to_string(i) + "]";
            ReasonerRule rule;
            if (!r.is_object()) {
              rd.fail(rp, "expected an object");
              continue;
            }
            try {
              if (r.contains("summary")) rule.summary = r["summary"].get<std::string>();
              if (r.contains("summary_contains")) rule.summary_contains = r["summary_contains"].get<std::string>();
              if (r.contains("frame_ids")) rule.frame_ids = r["frame_ids"].get<std::set<FrameId>>();
            } catch (const json::exception&) {
              rd.fail(rp, "'summary'/'summary_contains' must be strings, 'frame_ids' an integer array");
            }
            if (!r.contains("response")) {
              rd.fail(rp + ".response", "required");
            } else {
              rule.response = read_response(rd, r["response"], rp + ".response");
            }
            b.reasoner_script.rules.push_back(std::move(rule));
          }
        }
      }
      if (auto it = s->find("default"); it != s->end()) {
        b.reasoner_script.fallback = read_response(rd, *it, sp + ".default");
      }
    }
  }
  if (b.mode == BackendMode::remote && b.remote.endpoint.empty()) rd.fail(path + ".endpoint", "required in remote mode");
  return b;
}

inline void read_queue(Reader& rd, const json& bus, const char* key, QueuePolicy& q) {
  const std::string path = std::string("bus.") + key;
  if (const json* s = rd.section(bus, key, "bus")) {
    rd.get(*s, "capacity", path, q.capacity);
    if (q.capacity < 1) rd.fail(path + ".capacity", "must be >= 1");
    if (auto it = s->find("overflow"); it != s->end()) {
      try {
        q.overflow = overflow_from_string(it->get<std::string>());
      } catch (const std::exception& e) {
        rd.fail(path + ".overflow", e.what());
      }
    }
  }
}

}  // namespace config_detail

inline json to_json_value(const PipelineConfig& c) {
  using namespace config_detail;
  json speed = std::isinf(c.speed) ? json("inf") : json(c.speed);
  json j;
  j["stream"] = {{"manifest", c.manifest}, {"speed", speed}};
  j["window"] = {{"window_len", c.window.window_len},
                 {"stride", c.window.stride},
                 {"samples_per_window", c.window.samples_per_window},
                 {"adjacent_count", c.window.adjacent_count},
                 {"adjacent_spacing", to_seconds(c.window.adjacent_spacing)}};
  j["filter"] = {{"vocab", c.vocab},
                 {"tau", c.filter.tau},
                 {"horizon", c.filter.horizon},
                 {"screen_rule", c.filter.rule == ScreenRule::literal ? "literal" : "prefix_cut"},
                 {"enabled", c.filter.enabled}};
  auto q = [](const QueuePolicy& p) { return json{{"capacity", p.capacity}, {"overflow", to_string(p.overflow)}}; };
  j["bus"] = {{"wire", c.bus.wire}, {"q1", q(c.bus.q1)}, {"q2", q(c.bus.q2)}, {"q3", q(c.bus.q3)}};
  j["backends"] = {{"captioner", backend_json(c.captioner)},
                   {"summarizer", backend_json(c.summarizer)},
                   {"reasoner", backend_json(c.reasoner)}};
  j["prompts"] = {{"dir", c.prompts_dir}};
  j["agent3"] = {{"threshold", c.agent3.threshold},
                 {"cold_start", c.agent3.cold_start == ColdStart::block ? "block" : "empty_history"},
                 {"retrigger_period", to_seconds(c.agent3.retrigger_period)}};
  j["seed"] = c.seed;
  return j;
}

// Parses and validates; throws ConfigError listing every problem.
inline PipelineConfig parse_config(const json& j, std::filesystem::path base_dir = {}) {
  using namespace config_detail;
  Reader rd;
  PipelineConfig c;
  c.base_dir = std::move(base_dir);
  if (!j.is_object()) throw ConfigError({"<root>: expected a JSON object"});

  if (const json* s = rd.section(j, "stream", "")) {
    rd.get(*s, "manifest", "stream", c.manifest);
    if (auto it = s->find("speed"); it != s->end()) {
      if (it->is_string() && (*it == "inf" || *it == "max")) {
        c.speed = kUnlimitedSpeed;
      } else if (it->is_number() && it->get<double>() > 0) {
        c.speed = it->get<double>();
      } else {
        rd.fail("stream.speed", "expected a positive number or \"inf\"");
      }
    }
  }
  if (c.manifest.empty()) rd.fail("stream.manifest", "required");

  if (const json* w = rd.section(j, "window", "")) {
    rd.get(*w, "window_len", "window", c.window.window_len);
    rd.get(*w, "stride", "window", c.window.stride);
    rd.get(*w, "samples_per_window", "window", c.window.samples_per_window);
    rd.get(*w, "adjacent_count", "window", c.window.adjacent_count);
    rd.seconds(*w, "adjacent_spacing", "window", c.window.adjacent_spacing);
  }
  try {
    c.window.validate();
  } catch (const std::invalid_argument& e) {
    rd.fail("window", e.what());
  }
  c.filter.horizon = static_cast<std::size_t>(2 * std::max<std::int64_t>(c.window.samples_per_window, 1));

  if (const json* f = rd.section(j, "filter", "")) {
    rd.get(*f, "vocab", "filter", c.vocab);
    rd.get(*f, "tau", "filter", c.filter.tau);
    rd.get(*f, "horizon", "filter", c.filter.horizon);
    rd.get(*f, "enabled", "filter", c.filter.enabled);
    std::string rule = "prefix_cut";
    rd.get(*f, "screen_rule", "filter", rule);
    if (rule == "literal") {
      c.filter.rule = ScreenRule::literal;
    } else if (rule != "prefix_cut") {
      rd.fail("filter.screen_rule", "expected 'prefix_cut' or 'literal'");
    }
  }
  if (c.vocab.empty()) {
    rd.fail("filter.vocab", "required");
  } else if (!std::filesystem::exists(c.resolve(c.vocab))) {
    rd.fail("filter.vocab", "file not found: " + c.resolve(c.vocab).string());
  }
  if (c.filter.horizon < 1) rd.fail("filter.horizon", "must be >= 1");

  if (const json* b = rd.section(j, "bus", "")) {
    rd.get(*b, "wire", "bus", c.bus.wire);
    read_queue(rd, *b, "q1", c.bus.q1);
    read_queue(rd, *b, "q2", c.bus.q2);
    read_queue(rd, *b, "q3", c.bus.q3);
  }

  if (const json* be = rd.section(j, "backends", "")) {
    for (auto kind : {BackendKind::captioner, BackendKind::summarizer, BackendKind::reasoner}) {
      const std::string path = std::string("backends.") + to_string(kind);
      if (const json* s = rd.section(*be, to_string(kind), "backends")) {
        c.backend(kind) = read_backend(rd, *s, kind, path);
      }
    }
  }

  if (const json* p = rd.section(j, "prompts", "")) rd.get(*p, "dir", "prompts", c.prompts_dir);

  if (const json* a = rd.section(j, "agent3", "")) {
    rd.get(*a, "threshold", "agent3", c.agent3.threshold);
    if (!(c.agent3.threshold >= 0.0 && c.agent3.threshold <= 1.0)) rd.fail("agent3.threshold", "must be in [0,1]");
    std::string cs = "empty_history";
    rd.get(*a, "cold_start", "agent3", cs);
    if (cs == "block") {
      c.agent3.cold_start = ColdStart::block;
    } else if (cs != "empty_history") {
      rd.fail("agent3.cold_start", "expected 'empty_history' or 'block'");
    }
    rd.seconds(*a, "retrigger_period", "agent3", c.agent3.retrigger_period);
  }
  rd.get(j, "seed", "", c.seed);

  if (!rd.problems.empty()) throw ConfigError(rd.problems);
  return c;
}

// Endpoint overrides from the environment. getenv is injectable for tests.
inline void apply_env_overrides(PipelineConfig& c,
                                const std::function<const char*(const char*)>& getenv_fn = std::getenv) {
  const std::pair<BackendKind, const char*> vars[] = {{BackendKind::captioner, "VIGIL_CAPTIONER_ENDPOINT"},
                                                      {BackendKind::summarizer, "VIGIL_SUMMARIZER_ENDPOINT"},
                                                      {BackendKind::reasoner, "VIGIL_REASONER_ENDPOINT"}};
  for (const auto& [kind, var] : vars) {
    if (const char* v = getenv_fn(var); v && *v) c.backend(kind).remote.endpoint = v;
  }
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError({"<file>: cannot open " + path.string()});
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError({std::string("<file>: invalid JSON: ") + e.what()});
  }
  auto c = parse_config(j, path.parent_path());
  apply_env_overrides(c);
  return c;
}

}  // namespace vigil
