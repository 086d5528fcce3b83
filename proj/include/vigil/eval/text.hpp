#pragma once

// Caption/summary text metrics over tokenized pairs. Tokens are lowercased,
// ASCII punctuation is removed and the rest is split on whitespace.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vigil/eval/detection.hpp"

namespace vigil::eval {

using Tokens = std::vector<std::string>;

inline Tokens tokenize(std::string_view text) {
  Tokens out;
  std::string cur;
  for (char ch : text) {
    auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      if (!cur.empty()) out.push_back(std::move(cur));
      cur.clear();
    } else if (!std::ispunct(c)) {
      cur.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  if (!cur.empty()) out.push_back(std::move(cur));
  return out;
}

struct TextPair {
  std::string item_id;
  Tokens candidate;
  std::vector<Tokens> references;
};

inline TextPair make_pair(std::string item_id, std::string_view candidate, std::span<const std::string> references) {
  if (references.empty()) throw MetricError("item '" + item_id + "' has no reference text");
  TextPair p{std::move(item_id), tokenize(candidate), {}};
  for (const auto& r : references) p.references.push_back(tokenize(r));
  return p;
}

using NgramCounts = std::map<std::vector<std::string>, std::size_t>;

inline NgramCounts ngrams(const Tokens& t, std::size_t n) {
  NgramCounts out;
  if (n == 0 || t.size() < n) return out;
  for (std::size_t i = 0; i + n <= t.size(); ++i) ++out[Tokens(t.begin() + i, t.begin() + i + n)];
  return out;
}

// ---- BLEU ----

struct BleuOptions {
  bool sentence_average = false;  // mean of per-pair scores instead of pooled counts
  bool geometric = false;         // BLEU-n as geometric mean of p_1..p_n instead of p_n alone
};

struct BleuStats {
  double matched[4] = {0, 0, 0, 0};
  double total[4] = {0, 0, 0, 0};
  double cand_len = 0;
  double ref_len = 0;
};

namespace detail {

// Closest reference length; shorter wins a tie.
inline std::size_t closest_ref_len(std::size_t c, const std::vector<Tokens>& refs) {
  std::size_t best = refs.front().size();
  for (const auto& r : refs) {
    auto d = [&](std::size_t x) { return x > c ? x - c : c - x; };
    if (d(r.size()) < d(best) || (d(r.size()) == d(best) && r.size() < best)) best = r.size();
  }
  return best;
}

inline void accumulate_bleu(const TextPair& p, BleuStats& s) {
  s.cand_len += static_cast<double>(p.candidate.size());
  s.ref_len += static_cast<double>(closest_ref_len(p.candidate.size(), p.references));
  for (std::size_t n = 1; n <= 4; ++n) {
    NgramCounts max_ref;
    for (const auto& r : p.references) {
      for (const auto& [g, c] : ngrams(r, n)) max_ref[g] = std::max(max_ref[g], c);
    }
    for (const auto& [g, c] : ngrams(p.candidate, n)) {
      auto it = max_ref.find(g);
      s.matched[n - 1] += static_cast<double>(std::min(c, it == max_ref.end() ? 0 : it->second));
      s.total[n - 1] += static_cast<double>(c);
    }
  }
}

inline double bleu_from_stats(const BleuStats& s, bool geometric) {
  if (s.cand_len == 0) return 0.0;
  const double bp = s.cand_len >= s.ref_len ? 1.0 : std::exp(1.0 - s.ref_len / s.cand_len);
  double sum = 0.0, log_acc = 0.0;
  bool zero = false;
  for (int n = 0; n < 4; ++n) {
    const double p = s.total[n] > 0 ? s.matched[n] / s.total[n] : 0.0;
    if (!geometric) {
      sum += bp * p;
      continue;
    }
    if (p == 0.0) zero = true;
    if (!zero) log_acc += std::log(p);
    sum += zero ? 0.0 : bp * std::exp(log_acc / (n + 1));
  }
  return sum;
}

}  // namespace detail

// Sum of BLEU-1..BLEU-4, so identity scores 4.
inline double bleu_cumulative(const TextPair& p, const BleuOptions& o = {}) {
  BleuStats s;
  detail::accumulate_bleu(p, s);
  return detail::bleu_from_stats(s, o.geometric);
}

inline double bleu_cumulative(std::span<const TextPair> corpus, const BleuOptions& o = {}) {
  if (corpus.empty()) throw MetricError("BLEU needs a non-empty corpus");
  if (o.sentence_average) {
    double acc = 0.0;
    for (const auto& p : corpus) acc += bleu_cumulative(p, o);
    return acc / static_cast<double>(corpus.size());
  }
  BleuStats s;
  for (const auto& p : corpus) detail::accumulate_bleu(p, s);
  return detail::bleu_from_stats(s, o.geometric);
}

// ---- ROUGE-L ----

inline std::size_t lcs_length(const Tokens& a, const Tokens& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline double rouge_l(const TextPair& p, double beta = 1.2) {
  double best = 0.0;
  for (const auto& r : p.references) {
    const auto l = static_cast<double>(lcs_length(p.candidate, r));
    if (l == 0) continue;
    const double prec = l / static_cast<double>(p.candidate.size());
    const double rec = l / static_cast<double>(r.size());
    const double b2 = beta * beta;
    best = std::max(best, (1 + b2) * prec * rec / (rec + b2 * prec));
  }
  return best;
}

// ---- METEOR (exact match only) ----

struct Alignment {
  std::size_t matches = 0;
  std::size_t chunks = 0;
};

// Greedy left-to-right over the candidate. A match that continues the current
// chunk is preferred, otherwise the earliest unused reference position.
inline Alignment align_exact(const Tokens& cand, const Tokens& ref) {
  std::vector<bool> used(ref.size(), false);
  Alignment a;
  std::size_t last = 0;
  bool in_chunk = false;
  for (const auto& w : cand) {
    std::size_t pick = ref.size();
    if (in_chunk && last + 1 < ref.size() && !used[last + 1] && ref[last + 1] == w) {
      pick = last + 1;
    } else {
      for (std::size_t j = 0; j < ref.size(); ++j) {
        if (!used[j] && ref[j] == w) {
          pick = j;
          break;
        }
      }
    }
    if (pick == ref.size()) {
      in_chunk = false;
      continue;
    }
    if (!(in_chunk && pick == last + 1)) ++a.chunks;
    used[pick] = true;
    ++a.matches;
    last = pick;
    in_chunk = true;
  }
  return a;
}

// Fmean = 10PR / (R + 9P), penalty 0.5 (chunks/matches)^3. A single chunk
// carries no penalty so that identity scores exactly 1.
inline double meteor_basic(const TextPair& p) {
  double best = 0.0;
  for (const auto& r : p.references) {
    auto a = align_exact(p.candidate, r);
    if (a.matches == 0) continue;
    const double m = static_cast<double>(a.matches);
    const double prec = m / static_cast<double>(p.candidate.size());
    const double rec = m / static_cast<double>(r.size());
    const double fmean = 10 * prec * rec / (rec + 9 * prec);
    const double penalty = a.chunks <= 1 ? 0.0 : 0.5 * std::pow(static_cast<double>(a.chunks) / m, 3);
    best = std::max(best, fmean * (1 - penalty));
  }
  return best;
}

// ---- CIDEr ----

struct CiderOptions {
  bool scale10 = false;  // multiply by 10 as in the common CIDEr-D reporting convention
};

// Per n: vectors of raw n-gram counts weighted by idf = ln(N / max(1, df)),
// df counted over each item's reference set. Cosine similarity averaged over
// references, then over n = 1..4, then over the corpus. Zero vectors score 0.
inline double cider(std::span<const TextPair> corpus, const CiderOptions& o = {}) {
  if (corpus.empty()) throw MetricError("CIDEr needs a non-empty corpus");
  const double N = static_cast<double>(corpus.size());
  double total = 0.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    std::map<std::vector<std::string>, std::size_t> df;
    for (const auto& p : corpus) {
      std::map<std::vector<std::string>, bool> seen;
      for (const auto& r : p.references) {
        for (const auto& [g, c] : ngrams(r, n)) seen[g] = true;
      }
      for (const auto& [g, b] : seen) ++df[g];
    }
    auto idf = [&](const std::vector<std::string>& g) {
      auto it = df.find(g);
      return std::log(N / static_cast<double>(std::max<std::size_t>(1, it == df.end() ? 0 : it->second)));
    };
    auto vec = [&](const Tokens& t) {
      std::map<std::vector<std::string>, double> v;
      for (const auto& [g, c] : ngrams(t, n)) v[g] = static_cast<double>(c) * idf(g);
      return v;
    };
    auto norm = [](const std::map<std::vector<std::string>, double>& v) {
      double s = 0.0;
      for (const auto& [g, x] : v) s += x * x;
      return std::sqrt(s);
    };
    for (const auto& p : corpus) {
      const auto cv = vec(p.candidate);
      const double cn = norm(cv);
      double acc = 0.0;
      for (const auto& r : p.references) {
        const auto rv = vec(r);
        const double rn = norm(rv);
        if (cn == 0 || rn == 0) continue;
        double dot = 0.0;
        for (const auto& [g, x] : cv) {
          auto it = rv.find(g);
          if (it != rv.end()) dot += x * it->second;
        }
        acc += dot / (cn * rn);
      }
      total += acc / static_cast<double>(p.references.size());
    }
  }
  const double score = total / (4.0 * N);
  return o.scale10 ? 10.0 * score : score;
}

template <class Metric>
double mean_over(std::span<const TextPair> corpus, Metric metric) {
  if (corpus.empty()) throw MetricError("empty corpus");
  double acc = 0.0;
  for (const auto& p : corpus) acc += metric(p);
  return acc / static_cast<double>(corpus.size());
}

}  // namespace vigil::eval
