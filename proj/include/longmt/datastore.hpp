#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "longmt/errors.hpp"
#include "longmt/synthesis.hpp"
#include "longmt/text.hpp"

namespace longmt::datastore {

enum class TokenScheme { whitespace_cjk, characters };

inline const char* to_string(TokenScheme s) {
  return s == TokenScheme::whitespace_cjk ? "whitespace_cjk" : "characters";
}

inline TokenScheme token_scheme_from_string(const std::string& s) {
  if (s == "whitespace_cjk") return TokenScheme::whitespace_cjk;
  if (s == "characters") return TokenScheme::characters;
  throw ConfigError("unknown token scheme: " + s);
}

// whitespace_cjk: split on whitespace, then every CJK codepoint becomes its
// own token (so mixed text like "你好 world" yields 你 / 好 / world).
// characters: one token per unicode scalar.
inline std::vector<std::string> tokenize(std::string_view text_in, TokenScheme scheme) {
  const auto cps = text::to_codepoints(text_in);
  std::vector<std::string> tokens;
  if (scheme == TokenScheme::characters) {
    tokens.reserve(cps.size());
    for (char32_t cp : cps) {
      std::string t;
      text::append_utf8(t, cp);
      tokens.push_back(std::move(t));
    }
    return tokens;
  }
  std::string current;
  auto flush = [&]() {
    if (!current.empty()) {
      tokens.push_back(current);
      current.clear();
    }
  };
  for (char32_t cp : cps) {
    if (text::is_space(cp)) {
      flush();
    } else if (text::is_cjk(cp)) {
      flush();
      std::string t;
      text::append_utf8(t, cp);
      tokens.push_back(std::move(t));
    } else {
      text::append_utf8(current, cp);
    }
  }
  flush();
  return tokens;
}

// Levenshtein distance over unicode scalar values, unit costs.
inline std::size_t edit_distance(std::string_view a, std::string_view b) {
  const auto ca = text::to_codepoints(a);
  const auto cb = text::to_codepoints(b);
  if (ca.empty()) return cb.size();
  if (cb.empty()) return ca.size();

  std::vector<std::size_t> prev(cb.size() + 1);
  std::vector<std::size_t> cur(cb.size() + 1);
  for (std::size_t j = 0; j <= cb.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= ca.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= cb.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (ca[i - 1] == cb[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[cb.size()];
}

namespace detail {

// Platform-independent uniform draw in [0, bound). std::mt19937_64 has a
// standardized sequence; distributions do not, so we roll our own by
// rejection sampling.
inline std::uint64_t bounded_draw(std::mt19937_64& rng, std::uint64_t bound) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % bound;
}

template <typename T>
void deterministic_shuffle(std::vector<T>& items, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(bounded_draw(rng, i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace detail

struct SplitCounts {
  std::size_t train = 0;
  std::size_t validation = 0;
  std::size_t test = 0;

  std::size_t total() const { return train + validation + test; }
};

struct DatasetSplit {
  std::vector<synthesis::LongThoughtSample> train;
  std::vector<synthesis::LongThoughtSample> validation;
  std::vector<synthesis::LongThoughtSample> test;
  std::uint64_t seed = 0;
};

// Deterministic shuffle by seed, then partition in order. Same seed, same
// membership — on any platform.
inline DatasetSplit split(std::vector<synthesis::LongThoughtSample> samples,
                          const SplitCounts& counts, std::uint64_t seed) {
  if (counts.total() > samples.size()) {
    throw ConfigError("split counts (" + std::to_string(counts.total()) +
                      ") exceed sample count (" + std::to_string(samples.size()) + ")");
  }
  detail::deterministic_shuffle(samples, seed);
  DatasetSplit out;
  out.seed = seed;
  auto it = samples.begin();
  out.train.assign(it, it + static_cast<std::ptrdiff_t>(counts.train));
  it += static_cast<std::ptrdiff_t>(counts.train);
  out.validation.assign(it, it + static_cast<std::ptrdiff_t>(counts.validation));
  it += static_cast<std::ptrdiff_t>(counts.validation);
  out.test.assign(it, it + static_cast<std::ptrdiff_t>(counts.test));
  return out;
}

// Aggregate statistics over a synthesized dataset: token-length means,
// the histogram of surviving refinement counts, per-position score trends
// grouped by n, and the mean edit distance caused by each refinement step
// (computed on the original, pre-pruning step sequence).
struct DatasetStats {
  std::size_t sample_count = 0;
  double mean_query_tokens = 0.0;
  double mean_thought_tokens = 0.0;
  double mean_output_tokens = 0.0;
  std::map<int, std::size_t> step_histogram;
  std::map<int, std::vector<double>> score_trends;
  std::vector<double> mean_edit_distance_by_step;
  std::string token_scheme;
};

inline DatasetStats compute_stats(const std::vector<synthesis::Trajectory>& trajectories,
                                  const std::vector<synthesis::LongThoughtSample>& samples,
                                  TokenScheme scheme) {
  std::unordered_map<std::string, const synthesis::Trajectory*> by_id;
  for (const auto& t : trajectories) by_id[t.source.id] = &t;

  DatasetStats stats;
  stats.sample_count = samples.size();
  stats.token_scheme = to_string(scheme);

  double query_tokens = 0.0;
  double thought_tokens = 0.0;
  double output_tokens = 0.0;
  std::map<int, std::vector<double>> trend_sums;
  std::map<int, std::size_t> trend_counts;
  std::vector<double> edit_sums;
  std::vector<std::size_t> edit_counts;

  for (const auto& sample : samples) {
    const auto it = by_id.find(sample.id);
    if (it == by_id.end()) {
      throw ValidationError("sample " + sample.id + " has no matching trajectory");
    }
    query_tokens += static_cast<double>(tokenize(sample.source_text, scheme).size());
    thought_tokens += static_cast<double>(tokenize(sample.thought, scheme).size());
    output_tokens += static_cast<double>(tokenize(sample.translation, scheme).size());

    const int n = sample.meta.n;
    ++stats.step_histogram[n];
    auto& sums = trend_sums[n];
    sums.resize(static_cast<std::size_t>(n) + 1, 0.0);
    if (sample.meta.retained_scores.size() != static_cast<std::size_t>(n) + 1) {
      throw ValidationError("sample " + sample.id + " has n=" + std::to_string(n) +
                            " but " + std::to_string(sample.meta.retained_scores.size()) +
                            " retained scores");
    }
    for (std::size_t j = 0; j < sample.meta.retained_scores.size(); ++j) {
      sums[j] += sample.meta.retained_scores[j];
    }
    ++trend_counts[n];

    const auto& steps = it->second->steps;
    for (std::size_t k = 1; k < steps.size(); ++k) {
      if (edit_sums.size() < k) {
        edit_sums.resize(k, 0.0);
        edit_counts.resize(k, 0);
      }
      edit_sums[k - 1] += static_cast<double>(
          edit_distance(steps[k - 1].translation, steps[k].translation));
      ++edit_counts[k - 1];
    }
  }

  if (!samples.empty()) {
    stats.mean_query_tokens = query_tokens / static_cast<double>(samples.size());
    stats.mean_thought_tokens = thought_tokens / static_cast<double>(samples.size());
    stats.mean_output_tokens = output_tokens / static_cast<double>(samples.size());
  }
  for (auto& [n, sums] : trend_sums) {
    std::vector<double> means;
    means.reserve(sums.size());
    for (double s : sums) means.push_back(s / static_cast<double>(trend_counts[n]));
    stats.score_trends[n] = std::move(means);
  }
  stats.mean_edit_distance_by_step.reserve(edit_sums.size());
  for (std::size_t k = 0; k < edit_sums.size(); ++k) {
    stats.mean_edit_distance_by_step.push_back(edit_sums[k] /
                                               static_cast<double>(edit_counts[k]));
  }
  return stats;
}

inline nlohmann::json stats_to_json(const DatasetStats& s) {
  nlohmann::json hist = nlohmann::json::object();
  for (const auto& [n, c] : s.step_histogram) hist[std::to_string(n)] = c;
  nlohmann::json trends = nlohmann::json::object();
  for (const auto& [n, means] : s.score_trends) trends[std::to_string(n)] = means;
  return nlohmann::json{{"sample_count", s.sample_count},
                        {"mean_query_tokens", s.mean_query_tokens},
                        {"mean_thought_tokens", s.mean_thought_tokens},
                        {"mean_output_tokens", s.mean_output_tokens},
                        {"step_histogram", std::move(hist)},
                        {"score_trends", std::move(trends)},
                        {"mean_edit_distance_by_step", s.mean_edit_distance_by_step},
                        {"token_scheme", s.token_scheme}};
}

// Aligned plain-text rendering of the stats report.
inline std::string stats_table(const DatasetStats& s) {
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return std::string(buf);
  };
  std::string out;
  out += "samples              " + std::to_string(s.sample_count) + "\n";
  out += "token scheme         " + s.token_scheme + "\n";
  out += "mean query tokens    " + num(s.mean_query_tokens) + "\n";
  out += "mean thought tokens  " + num(s.mean_thought_tokens) + "\n";
  out += "mean output tokens   " + num(s.mean_output_tokens) + "\n";
  out += "refinement steps (n) histogram:\n";
  for (const auto& [n, c] : s.step_histogram) {
    out += "  n=" + std::to_string(n) + "  " + std::to_string(c) + "\n";
  }
  out += "score trends by n (position 0 = preliminary translation):\n";
  for (const auto& [n, means] : s.score_trends) {
    out += "  n=" + std::to_string(n) + " ";
    for (double m : means) out += " " + num(m);
    out += "\n";
  }
  out += "mean edit distance by refinement step:\n";
  for (std::size_t k = 0; k < s.mean_edit_distance_by_step.size(); ++k) {
    out += "  step " + std::to_string(k + 1) + "  " +
           num(s.mean_edit_distance_by_step[k]) + "\n";
  }
  return out;
}

}  // namespace longmt::datastore
