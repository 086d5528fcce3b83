#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "vigil/core/json_io.hpp"
#include "vigil/core/types.hpp"

namespace vigil {

struct ManifestError : Error {
  ManifestError(const std::string& what, std::optional<FrameId> frame = std::nullopt)
      : Error(what), offending_frame(frame) {}
  std::optional<FrameId> offending_frame;
};

struct ManifestFrame {
  FrameId frame_id = 0;
  Timestamp ts{0};
  std::string payload;

  friend bool operator==(const ManifestFrame&, const ManifestFrame&) = default;
};

// Ground-truth marker. Labels are free strings; evaluation looks for
// kAnomalyOnset and kCrimeOnset.
struct Marker {
  Timestamp ts{0};
  std::string label;

  friend bool operator==(const Marker&, const Marker&) = default;
};

inline constexpr const char* kAnomalyOnset = "anomaly_onset";
inline constexpr const char* kCrimeOnset = "crime_onset";

struct StreamManifest {
  std::string stream_id;
  double fps = 30.0;
  std::vector<ManifestFrame> frames;
  std::vector<Marker> markers;
  std::optional<int> label;  // explicit video-level ground truth
  std::filesystem::path base_dir;  // payload locators resolve against this

  std::optional<Timestamp> marker(std::string_view name) const {
    for (const auto& m : markers) {
      if (m.label == name) return m.ts;
    }
    return std::nullopt;
  }

  // Video-level label: explicit field, else presence of an onset marker.
  int ground_truth() const {
    if (label) return *label;
    return (marker(kAnomalyOnset) || marker(kCrimeOnset)) ? 1 : 0;
  }

  friend bool operator==(const StreamManifest& a, const StreamManifest& b) {
    return a.stream_id == b.stream_id && a.fps == b.fps && a.frames == b.frames &&
           a.markers == b.markers && a.label == b.label;
  }
};

// Throws ManifestError naming the first offending frame.
inline void validate(const StreamManifest& m) {
  if (!(m.fps > 0.0) || !std::isfinite(m.fps)) throw ManifestError("manifest: fps must be > 0");
  if (m.stream_id.empty()) throw ManifestError("manifest: stream_id must not be empty");
  std::set<FrameId> seen;
  for (std::size_t i = 0; i < m.frames.size(); ++i) {
    const auto& f = m.frames[i];
    if (!seen.insert(f.frame_id).second) {
      throw ManifestError("manifest: duplicate frame_id " + std::to_string(f.frame_id), f.frame_id);
    }
    if (i == 0) continue;
    const auto& prev = m.frames[i - 1];
    if (f.frame_id < prev.frame_id) {
      throw ManifestError("manifest: frame_id " + std::to_string(f.frame_id) + " out of order",
                          f.frame_id);
    }
    if (f.ts < prev.ts) {
      throw ManifestError("manifest: frame_id " + std::to_string(f.frame_id) +
                              " has a timestamp earlier than its predecessor",
                          f.frame_id);
    }
  }
}

inline void to_json(json& j, const StreamManifest& m) {
  json frames = json::array();
  for (const auto& f : m.frames) {
    frames.push_back({{"frame_id", f.frame_id}, {"ts", to_seconds(f.ts)}, {"payload", f.payload}});
  }
  json markers = json::array();
  for (const auto& mk : m.markers) markers.push_back({{"ts", to_seconds(mk.ts)}, {"label", mk.label}});
  j = json{{"stream_id", m.stream_id}, {"fps", m.fps}, {"frames", frames}, {"markers", markers}};
  if (m.label) j["label"] = *m.label;
}

namespace detail {

inline Timestamp parse_ts(const json& j, const char* where) {
  if (auto it = j.find("ts_us"); it != j.end() && it->is_number_integer()) {
    return Timestamp{it->get<std::int64_t>()};
  }
  auto it = j.find("ts");
  if (it == j.end() || !it->is_number()) {
    throw ManifestError(std::string(where) + ": needs numeric 'ts' (seconds) or 'ts_us'");
  }
  return from_seconds(it->get<double>());
}

}  // namespace detail

inline void from_json(const json& j, StreamManifest& m) {
  if (!j.is_object()) throw ManifestError("manifest: expected a JSON object");
  try {
    m.stream_id = j.value("stream_id", std::string{});
    m.fps = j.value("fps", 30.0);
    m.frames.clear();
    m.markers.clear();
    m.label.reset();
    for (const auto& f : j.at("frames")) {
      ManifestFrame mf;
      mf.frame_id = f.at("frame_id").get<FrameId>();
      mf.ts = detail::parse_ts(f, "manifest frame");
      mf.payload = f.value("payload", std::string{});
      m.frames.push_back(std::move(mf));
    }
    if (auto it = j.find("markers"); it != j.end()) {
      for (const auto& mk : *it) {
        m.markers.push_back({detail::parse_ts(mk, "manifest marker"), mk.at("label").get<std::string>()});
      }
    }
    if (auto it = j.find("label"); it != j.end() && !it->is_null()) m.label = it->get<int>();
  } catch (const json::exception& e) {
    throw ManifestError(std::string("manifest: ") + e.what());
  }
}

inline StreamManifest parse_manifest(const json& j) {
  StreamManifest m = j.get<StreamManifest>();
  validate(m);
  return m;
}

inline StreamManifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ManifestError("manifest: cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ManifestError("manifest: " + path.string() + ": " + e.what());
  }
  auto m = parse_manifest(j);
  m.base_dir = path.parent_path();
  return m;
}

// Evenly spaced frames 0..count-1 at the given rate.
inline StreamManifest synthetic_manifest(std::string stream_id, std::int64_t count, double fps = 30.0) {
  StreamManifest m;
  m.stream_id = std::move(stream_id);
  m.fps = fps;
  m.frames.reserve(static_cast<std::size_t>(std::max<std::int64_t>(count, 0)));
  for (std::int64_t i = 0; i < count; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "frames/%06lld.jpg", static_cast<long long>(i));
    m.frames.push_back({i, from_seconds(static_cast<double>(i) / fps), buf});
  }
  return m;
}

}  // namespace vigil
