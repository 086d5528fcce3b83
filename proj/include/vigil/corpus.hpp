#pragma once

// Clip utilities: split a clip into historical and adjacent segments by ratio
// and re-sample the adjacent part.

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "vigil/core/types.hpp"
#include "vigil/windowing.hpp"

namespace vigil::corpus {

struct CorpusError : Error {
  using Error::Error;
};

inline constexpr std::string_view kSupportedRatios = "3:7, 1:1, 7:3";

// Historical share in tenths.
inline int ratio_tenths(std::string_view ratio) {
  if (ratio == "3:7") return 3;
  if (ratio == "1:1") return 5;
  if (ratio == "7:3") return 7;
  throw CorpusError("unsupported ratio '" + std::string(ratio) + "' (supported: " + std::string(kSupportedRatios) +
                    ")");
}

struct Split {
  std::vector<FrameId> historical;
  std::vector<FrameId> adjacent;
};

inline Split split_segment(std::span<const FrameId> ids, std::string_view ratio) {
  const int tenths = ratio_tenths(ratio);
  if (ids.empty() || ids.size() % 10 != 0) {
    throw CorpusError("clip length must be a positive multiple of 10, got " + std::to_string(ids.size()));
  }
  const std::size_t cut = ids.size() / 10 * static_cast<std::size_t>(tenths);
  return {{ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(cut)},
          {ids.begin() + static_cast<std::ptrdiff_t>(cut), ids.end()}};
}

// Same floor-uniform offsets as the caption window sampler.
inline std::vector<FrameId> sample_adjacent(std::span<const FrameId> adjacent, std::size_t k = 8) {
  if (adjacent.size() < k) {
    throw CorpusError("adjacent segment has " + std::to_string(adjacent.size()) + " ids, need at least " +
                      std::to_string(k));
  }
  std::vector<FrameId> out;
  for (auto off : uniform_sample(0, static_cast<std::int64_t>(adjacent.size()), k)) {
    out.push_back(adjacent[static_cast<std::size_t>(off)]);
  }
  return out;
}

}  // namespace vigil::corpus
