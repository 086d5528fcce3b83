// vigil: run, simulate and evaluate the streaming pipeline.
//
// Exit codes: 0 ok, 1 runtime failure, 2 bad config or arguments,
// 3 remote backend unreachable.

#include <atomic>
#include <chrono>
#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vigil/corpus.hpp"
#include "vigil/eval/report.hpp"
#include "vigil/pipeline/run.hpp"
#include "vigil/pipeline/sim_report.hpp"

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;
constexpr int kExitUnreachable = 3;

std::atomic<bool> g_stop{false};

extern "C" void on_signal(int) { g_stop.store(true); }

double parse_speed(const std::string& s) {
  if (s == "inf" || s == "infinity" || s == "max") return vigil::kUnlimitedSpeed;
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || !(v > 0)) throw vigil::ConfigError({"--speed: expected a positive number or 'inf'"});
  return v;
}

void print_config_error(const vigil::ConfigError& e) {
  for (const auto& p : e.problems) std::cerr << "config error: " << p << '\n';
}

struct Loaded {
  vigil::PipelineConfig cfg;
  vigil::StreamManifest manifest;
  vigil::Components comps;
};

Loaded load_all(const std::string& config_path, const std::function<void(vigil::PipelineConfig&)>& tweak) {
  Loaded l;
  l.cfg = vigil::load_config(config_path);
  tweak(l.cfg);
  try {
    l.manifest = vigil::load_manifest(l.cfg.resolve(l.cfg.manifest));
    vigil::validate(l.manifest);
  } catch (const vigil::ManifestError& e) {
    throw vigil::ConfigError({std::string("stream.manifest: ") + e.what()});
  }
  l.comps = vigil::build_components(l.cfg, VIGIL_DEFAULT_PROMPTS_DIR);
  return l;
}

int cmd_run(const std::string& config, const std::string& speed, const std::string& out, bool wire,
            std::optional<std::uint64_t> seed) {
  Loaded l;
  try {
    l = load_all(config, [&](vigil::PipelineConfig& c) {
      if (!speed.empty()) c.speed = parse_speed(speed);
      if (wire) c.bus.wire = true;
      if (seed) c.seed = *seed;
    });
  } catch (const vigil::ConfigError& e) {
    print_config_error(e);
    return kExitConfig;
  }
  try {
    vigil::check_remote_backends(l.cfg);
  } catch (const vigil::BackendError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUnreachable;
  }

  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!out.empty() && out != "-") {
    file.open(out, std::ios::out | std::ios::trunc);
    if (!file) {
      std::cerr << "error: cannot open " << out << '\n';
      return kExitRuntime;
    }
    os = &file;
  }

  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  // One complete line per decision, flushed, so an interrupted run leaves
  // valid JSONL behind.
  auto sink = [&](const vigil::Decision& d) { *os << vigil::to_jsonl(d) << '\n' << std::flush; };
  auto result = vigil::run_pipeline(l.cfg, l.comps, l.manifest, sink, &g_stop);
  if (g_stop.load()) std::cerr << "interrupted: queues drained\n";
  std::cerr << vigil::json(result.counts).dump() << '\n';
  return 0;
}

int cmd_simulate(const std::string& config, const std::vector<std::string>& latency, std::optional<std::uint64_t> seed,
                 const std::string& out) {
  Loaded l;
  try {
    l = load_all(config, [&](vigil::PipelineConfig& c) {
      for (const auto& spec : latency) vigil::apply_latency_override(c, spec);
      if (seed) c.seed = *seed;
      c.speed = vigil::kUnlimitedSpeed;
      for (const auto* b : {&c.captioner, &c.summarizer, &c.reasoner}) {
        if (b->mode == vigil::BackendMode::remote) {
          throw vigil::ConfigError({std::string("backends.") + vigil::to_string(b->kind) +
                                    ".mode: simulate accepts mock backends only"});
        }
      }
    });
  } catch (const vigil::ConfigError& e) {
    print_config_error(e);
    return kExitConfig;
  }
  const auto wall0 = std::chrono::steady_clock::now();
  auto result = vigil::run_pipeline(l.cfg, l.comps, l.manifest);
  const auto wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - wall0).count();
  const auto report = vigil::to_json_value(vigil::build_sim_report(result, l.manifest)).dump(2);
  if (!out.empty() && out != "-") {
    std::ofstream f(out);
    f << report << '\n';
  } else {
    std::cout << report << '\n';
  }
  std::cerr << "host wall time: " << wall << " s\n";
  return 0;
}

int cmd_eval(const std::string& decisions, const std::vector<std::string>& manifests, const std::string& references,
             const std::string& format, const vigil::eval::ReportOptions& opt) {
  auto ds = vigil::eval::load_decisions(decisions);
  std::vector<vigil::StreamManifest> ms;
  for (const auto& m : manifests) ms.push_back(vigil::load_manifest(m));
  std::optional<vigil::eval::References> refs;
  if (!references.empty()) refs = vigil::eval::load_references(references);
  auto rep = vigil::eval::build_report(ds, ms, refs ? &*refs : nullptr, opt);
  if (format == "table") {
    std::cout << vigil::eval::to_table(rep);
  } else {
    std::cout << vigil::eval::to_json_value(rep).dump(2) << '\n';
  }
  return 0;
}

vigil::json ids_json(const std::vector<vigil::FrameId>& v) { return vigil::json(v); }

vigil::StreamManifest sub_manifest(const vigil::StreamManifest& m, std::size_t from, std::size_t to,
                                   const std::string& suffix) {
  vigil::StreamManifest s;
  s.stream_id = m.stream_id + suffix;
  s.fps = m.fps;
  s.frames.assign(m.frames.begin() + static_cast<std::ptrdiff_t>(from),
                  m.frames.begin() + static_cast<std::ptrdiff_t>(to));
  for (const auto& mk : m.markers) {
    if (!s.frames.empty() && mk.ts >= s.frames.front().ts && mk.ts <= s.frames.back().ts) s.markers.push_back(mk);
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vigil: streaming multi-agent anomaly pipeline"};
  app.require_subcommand(1);

  std::string config, speed, out, format = "json", references, decisions, ratio = "3:7", manifest_path, synth_id = "synthetic";
  std::vector<std::string> latency, manifests, markers;
  bool wire = false, bleu_sentence = false, bleu_geometric = false, cider_x10 = false;
  std::optional<std::uint64_t> seed;
  std::int64_t length = 100, from = 0, to = 0, frames = 300;
  std::size_t k = 8;
  double fps = 30.0;
  std::optional<int> label;

  auto* run = app.add_subcommand("run", "replay a stream through the pipeline, Decision JSONL on stdout or --out");
  run->add_option("--config", config, "pipeline config (JSON)")->required();
  run->add_option("--speed", speed, "replay speed multiplier or 'inf' (default from config)");
  run->add_option("--out", out, "Decision JSONL file (default stdout)");
  run->add_flag("--wire", wire, "pass messages through the framed wire codec");
  run->add_option("--seed", seed, "override the config seed");

  auto* sim = app.add_subcommand("simulate", "virtual-clock run with a per-stage timing report");
  sim->add_option("--config", config, "pipeline config (JSON)")->required();
  sim->add_option("--latency", latency, "backend=SECONDS | backend=uniform:LO:HI (repeatable)");
  sim->add_option("--seed", seed, "override the config seed");
  sim->add_option("--out", out, "report file (default stdout)");

  auto* ev = app.add_subcommand("eval", "detection, text and latency metrics from a Decision log");
  ev->add_option("--decisions", decisions, "Decision JSONL")->required();
  ev->add_option("--manifest,--manifests", manifests, "stream manifests (labels and onset markers)");
  ev->add_option("--references", references, "JSON object item_id -> reference strings");
  ev->add_option("--format", format, "json or table")->check(CLI::IsMember({"json", "table"}));
  ev->add_flag("--bleu-sentence", bleu_sentence, "average per-pair BLEU instead of corpus-level counts");
  ev->add_flag("--bleu-geometric", bleu_geometric, "BLEU-n as geometric mean of p1..pn");
  ev->add_flag("--cider-x10", cider_x10, "scale CIDEr by 10");

  auto* corp = app.add_subcommand("corpus", "fixture tools");
  corp->require_subcommand(1);
  auto* split = corp->add_subcommand("split", "split a clip into historical and adjacent parts");
  split->add_option("--ratio", ratio, "3:7, 1:1 or 7:3");
  split->add_option("--manifest", manifest_path, "emit split manifests for this stream");
  split->add_option("--length", length, "clip length when no manifest is given");
  split->add_option("--k", k, "adjacent re-sample size");
  auto* sample = corp->add_subcommand("sample", "re-sample k ids from an adjacent segment [from, to)");
  sample->add_option("--from", from)->required();
  sample->add_option("--to", to)->required();
  sample->add_option("--k", k);
  auto* synth = corp->add_subcommand("synth", "write a synthetic evenly spaced manifest");
  synth->add_option("--id", synth_id);
  synth->add_option("--frames", frames);
  synth->add_option("--fps", fps);
  synth->add_option("--marker", markers, "label=SECONDS (repeatable)");
  synth->add_option("--label", label);
  synth->add_option("--out", out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) return cmd_run(config, speed, out, wire, seed);
    if (*sim) return cmd_simulate(config, latency, seed, out);
    if (*ev) {
      vigil::eval::ReportOptions opt;
      opt.bleu.sentence_average = bleu_sentence;
      opt.bleu.geometric = bleu_geometric;
      opt.cider.scale10 = cider_x10;
      return cmd_eval(decisions, manifests, references, format, opt);
    }
    if (*split) {
      if (!manifest_path.empty()) {
        auto m = vigil::load_manifest(manifest_path);
        std::vector<vigil::FrameId> ids;
        for (const auto& f : m.frames) ids.push_back(f.frame_id);
        auto s = vigil::corpus::split_segment(ids, ratio);
        const auto cut = s.historical.size();
        vigil::json j{{"ratio", ratio},
                      {"historical", sub_manifest(m, 0, cut, "_hist")},
                      {"adjacent", sub_manifest(m, cut, m.frames.size(), "_adj")},
                      {"adjacent_sample", ids_json(vigil::corpus::sample_adjacent(s.adjacent, k))}};
        std::cout << j.dump(2) << '\n';
      } else {
        std::vector<vigil::FrameId> ids;
        for (std::int64_t i = 0; i < length; ++i) ids.push_back(i);
        auto s = vigil::corpus::split_segment(ids, ratio);
        vigil::json j{{"ratio", ratio},
                      {"historical", s.historical},
                      {"adjacent", s.adjacent},
                      {"adjacent_sample", vigil::corpus::sample_adjacent(s.adjacent, k)}};
        std::cout << j.dump() << '\n';
      }
      return 0;
    }
    if (*sample) {
      std::vector<vigil::FrameId> ids;
      for (auto i = from; i < to; ++i) ids.push_back(i);
      std::cout << vigil::json(vigil::corpus::sample_adjacent(ids, k)).dump() << '\n';
      return 0;
    }
    if (*synth) {
      auto m = vigil::synthetic_manifest(synth_id, frames, fps);
      for (const auto& spec : markers) {
        auto eq = spec.find('=');
        if (eq == std::string::npos) throw vigil::ConfigError({"--marker: expected label=SECONDS"});
        m.markers.push_back({vigil::from_seconds(std::stod(spec.substr(eq + 1))), spec.substr(0, eq)});
      }
      m.label = label;
      const auto text = vigil::json(m).dump(1);
      if (!out.empty() && out != "-") {
        std::ofstream(out) << text << '\n';
      } else {
        std::cout << text << '\n';
      }
      return 0;
    }
  } catch (const vigil::ConfigError& e) {
    print_config_error(e);
    return kExitConfig;
  } catch (const vigil::corpus::CorpusError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
