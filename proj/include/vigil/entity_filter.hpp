#pragma once

// Main-entity screening and redundant-caption filtering.
//
// Entity mentions are counted over a rolling horizon of recent captions. The
// nonzero counts are sorted descending (ties by vocabulary order) and the main
// set S is cut at the first "cliff", the first rank j >= 2 whose predecessor
// count is more than twice its own. Entities below the cliff, or with a count
// not above tau, form the redundant set D. A caption whose every mentioned
// entity is in D is dropped.

#include <algorithm>
#include <cctype>
#include <deque>
#include <istream>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "vigil/core/types.hpp"

namespace vigil {

// Lowercase ASCII alphanumeric words; everything else separates.
inline std::vector<std::string> word_tokens(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char ch : text) {
    if (std::isalnum(ch)) {
      cur.push_back(static_cast<char>(std::tolower(ch)));
    } else if (!cur.empty()) {
      out.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

class EntityVocabulary {
 public:
  struct Entry {
    std::string name;                              // canonical (first alias)
    std::vector<std::vector<std::string>> aliases;  // tokenized, includes name
  };

  EntityVocabulary() = default;

  // Each element is "name" or "name|alias|alias".
  explicit EntityVocabulary(const std::vector<std::string>& lines) {
    for (const auto& line : lines) add(line);
  }

  void add(std::string_view line) {
    Entry entry;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      auto bar = line.find('|', pos);
      auto piece = line.substr(pos, bar == std::string_view::npos ? std::string_view::npos : bar - pos);
      auto tokens = word_tokens(piece);
      if (tokens.empty()) throw std::invalid_argument("vocabulary: empty entity or alias in '" + std::string(line) + "'");
      std::string key = join(tokens);
      if (!index_.emplace(key, entries_.size()).second) {
        throw std::invalid_argument("vocabulary: duplicate entity or alias '" + key + "'");
      }
      if (entry.name.empty()) entry.name = key;
      max_alias_len_ = std::max(max_alias_len_, tokens.size());
      entry.aliases.push_back(std::move(tokens));
      if (bar == std::string_view::npos) break;
      pos = bar + 1;
    }
    entries_.push_back(std::move(entry));
  }

  // Plain-text format: one entity per line, aliases separated by '|'; blank
  // lines and lines starting with '#' are ignored.
  static EntityVocabulary parse(std::istream& in) {
    EntityVocabulary v;
    std::string line;
    while (std::getline(in, line)) {
      auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      auto last = line.find_last_not_of(" \t\r");
      v.add(std::string_view(line).substr(first, last - first + 1));
    }
    return v;
  }

  static EntityVocabulary parse(std::string_view text) {
    std::istringstream in{std::string(text)};
    return parse(in);
  }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const Entry& operator[](EntityId id) const { return entries_.at(id); }
  const std::vector<Entry>& entries() const { return entries_; }

  std::optional<EntityId> find(std::string_view name) const {
    auto it = index_.find(join(word_tokens(name)));
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  // Per-entity mention counts in one text. Whole-word, case-insensitive,
  // longest alias wins at each position.
  std::vector<std::size_t> count_mentions(std::string_view text) const {
    std::vector<std::size_t> counts(entries_.size(), 0);
    auto tokens = word_tokens(text);
    std::size_t i = 0;
    while (i < tokens.size()) {
      std::size_t matched = 0;
      for (std::size_t len = std::min(max_alias_len_, tokens.size() - i); len >= 1; --len) {
        std::string key = tokens[i];
        for (std::size_t t = 1; t < len; ++t) key += ' ' + tokens[i + t];
        if (auto it = index_.find(key); it != index_.end()) {
          ++counts[it->second];
          matched = len;
          break;
        }
      }
      i += matched ? matched : 1;
    }
    return counts;
  }

  // Distinct entities mentioned in a text, vocabulary order.
  std::vector<EntityId> mentioned(std::string_view text) const {
    std::vector<EntityId> ids;
    auto counts = count_mentions(text);
    for (EntityId id = 0; id < counts.size(); ++id) {
      if (counts[id] > 0) ids.push_back(id);
    }
    return ids;
  }

 private:
  static std::string join(const std::vector<std::string>& tokens) {
    std::string out;
    for (const auto& t : tokens) {
      if (!out.empty()) out += ' ';
      out += t;
    }
    return out;
  }

  std::vector<Entry> entries_;
  std::unordered_map<std::string, EntityId> index_;
  std::size_t max_alias_len_ = 0;
};

struct FrequencyTable {
  std::vector<std::size_t> counts;  // indexed by EntityId
  std::size_t horizon = 0;          // number of captions counted

  std::size_t operator[](EntityId id) const { return counts.at(id); }
};

inline FrequencyTable count_entities(std::span<const Caption> captions, const EntityVocabulary& vocab) {
  FrequencyTable table{std::vector<std::size_t>(vocab.size(), 0), captions.size()};
  for (const auto& c : captions) {
    auto per = vocab.count_mentions(c.text);
    for (EntityId id = 0; id < per.size(); ++id) table.counts[id] += per[id];
  }
  return table;
}

enum class ScreenRule {
  prefix_cut,  // keep entities ranked before the first cliff
  literal,     // keep entities ranked immediately after a cliff
};

struct ScreenResult {
  std::set<EntityId> main_entities;
  std::set<EntityId> redundant_entities;
  std::vector<std::pair<EntityId, std::size_t>> sorted_counts;  // nonzero, descending

  bool is_main(EntityId id) const { return main_entities.contains(id); }
  bool is_redundant(EntityId id) const { return redundant_entities.contains(id); }
};

inline constexpr std::size_t kDefaultTau = 3;

inline ScreenResult screen_main_entities(const FrequencyTable& freq, std::size_t tau = kDefaultTau,
                                         ScreenRule rule = ScreenRule::prefix_cut) {
  ScreenResult r;
  for (EntityId id = 0; id < freq.counts.size(); ++id) {
    if (freq.counts[id] > 0) r.sorted_counts.emplace_back(id, freq.counts[id]);
  }
  std::stable_sort(r.sorted_counts.begin(), r.sorted_counts.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  const auto& sc = r.sorted_counts;
  auto cliff_before = [&](std::size_t i) { return i > 0 && sc[i - 1].second > 2 * sc[i].second; };

  if (rule == ScreenRule::prefix_cut) {
    for (std::size_t i = 0; i < sc.size(); ++i) {
      if (cliff_before(i)) break;
      if (sc[i].second > tau) r.main_entities.insert(sc[i].first);
    }
  } else {
    // The top-ranked entity has no predecessor, so the literal rule never selects it.
    for (std::size_t i = 1; i < sc.size(); ++i) {
      if (sc[i].second > tau && cliff_before(i)) r.main_entities.insert(sc[i].first);
    }
  }
  for (const auto& [id, n] : sc) {
    if (!r.main_entities.contains(id)) r.redundant_entities.insert(id);
  }
  return r;
}

// Drops captions whose mentioned entities are all redundant. Captions with no
// vocabulary entity are kept. Order is preserved.
inline std::vector<Caption> filter_captions(std::span<const Caption> captions, const ScreenResult& screen) {
  std::vector<Caption> kept;
  for (const auto& c : captions) {
    bool redundant_only = !c.entities.empty() &&
                          std::all_of(c.entities.begin(), c.entities.end(),
                                      [&](EntityId id) { return screen.is_redundant(id); });
    if (!redundant_only) kept.push_back(c);
  }
  return kept;
}

// Rolling window of the most recent captions used as the counting horizon.
class CaptionHorizon {
 public:
  explicit CaptionHorizon(std::size_t capacity) : capacity_(std::max<std::size_t>(capacity, 1)) {}

  void push(const Caption& c) {
    items_.push_back(c);
    while (items_.size() > capacity_) items_.pop_front();
  }

  std::vector<Caption> items() const { return {items_.begin(), items_.end()}; }
  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }

 private:
  std::size_t capacity_;
  std::deque<Caption> items_;
};

}  // namespace vigil
