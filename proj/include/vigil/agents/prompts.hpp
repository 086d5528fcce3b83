#pragma once

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "vigil/core/types.hpp"

namespace vigil {

// Markup used in the discrimination identifier.
inline constexpr const char* kFramePlaceholder = "<image>";
inline constexpr const char* kFrameSeparator = "<sep>";
inline constexpr const char* kHistoryOpen = "<history>";
inline constexpr const char* kHistoryClose = "</history>";

// Placeholder in the caption template replaced by the raw caption.
inline constexpr const char* kCaptionSlot = "[caption]";

struct Prompts {
  std::string caption_template = "[caption]";  // Agent 1 post-format
  std::string summary_prompt;                  // Agent 2
  std::string instruction;                     // Agent 3

  friend bool operator==(const Prompts&, const Prompts&) = default;
};

struct PromptError : Error {
  using Error::Error;
};

inline std::string read_prompt_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PromptError("cannot read prompt file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string text = ss.str();
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.pop_back();
  if (text.empty()) throw PromptError("prompt file " + path.string() + " is empty");
  return text;
}

// Reads agent1.txt, agent2.txt and agent3.txt from a directory.
inline Prompts load_prompts(const std::filesystem::path& dir) {
  Prompts p;
  p.caption_template = read_prompt_file(dir / "agent1.txt");
  p.summary_prompt = read_prompt_file(dir / "agent2.txt");
  p.instruction = read_prompt_file(dir / "agent3.txt");
  return p;
}

inline std::string apply_caption_template(const std::string& tmpl, const std::string& raw) {
  auto pos = tmpl.find(kCaptionSlot);
  if (pos == std::string::npos) return raw;
  std::string out = tmpl;
  out.replace(pos, std::char_traits<char>::length(kCaptionSlot), raw);
  return out;
}

}  // namespace vigil
