#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "longmt/agents.hpp"
#include "longmt/corpus.hpp"
#include "longmt/errors.hpp"
#include "longmt/gateway.hpp"
#include "longmt/prompts.hpp"
#include "longmt/text.hpp"

namespace longmt::miner {

enum class VerdictKind { no_figurative, literal_suitable, literal_unsuitable };

inline const char* to_string(VerdictKind k) {
  switch (k) {
    case VerdictKind::no_figurative: return "no_figurative";
    case VerdictKind::literal_suitable: return "literal_suitable";
    case VerdictKind::literal_unsuitable: return "literal_unsuitable";
  }
  return "no_figurative";
}

inline VerdictKind verdict_kind_from_string(const std::string& s) {
  if (s == "no_figurative") return VerdictKind::no_figurative;
  if (s == "literal_suitable") return VerdictKind::literal_suitable;
  if (s == "literal_unsuitable") return VerdictKind::literal_unsuitable;
  throw IoError("unknown verdict kind: " + s);
}

// Outcome of the two-question figurative-language judgment. A sentence is
// worth long-thought translation only when it has figurative language AND
// its literal translation was judged unsuitable.
struct MiningVerdict {
  VerdictKind kind = VerdictKind::no_figurative;
  std::optional<std::string> literal_translation;
  std::optional<std::string> unsuitability_reason;
  std::string raw_response;
};

namespace detail {

// Strips one layer of surrounding quotes (ASCII or curly).
inline std::string strip_quotes(const std::string& line) {
  auto cps = text::to_codepoints(line);
  auto is_quote = [](char32_t c) {
    return c == U'"' || c == U'\'' || c == 0x201C || c == 0x201D ||
           c == 0x2018 || c == 0x2019;
  };
  std::size_t b = 0;
  std::size_t e = cps.size();
  if (e >= 2 && is_quote(cps[b]) && is_quote(cps[e - 1])) {
    ++b;
    --e;
  }
  std::string out;
  for (std::size_t i = b; i < e; ++i) text::append_utf8(out, cps[i]);
  return text::trim(out);
}

// Lowercased, quote-stripped, trailing-period-stripped form used to match
// the fixed phrases ("suitable", "unsuitable", "no metaphors and no similes").
inline std::string canonical(const std::string& line) {
  std::string s = text::lowercase_ascii(strip_quotes(text::trim(line)));
  while (!s.empty() && (s.back() == '.' || s.back() == ' ')) s.pop_back();
  return s;
}

// Meaningful payload lines: trimmed, with blank lines and code fences
// dropped, one layer of quotes removed.
inline std::vector<std::string> payload_lines(const std::string& raw) {
  std::vector<std::string> out;
  for (const auto& line : text::split_lines(raw)) {
    const std::string t = text::trim(line);
    if (t.empty()) continue;
    if (t.rfind("```", 0) == 0) continue;
    out.push_back(strip_quotes(t));
  }
  return out;
}

}  // namespace detail

// Parses the three declared response shapes of the mining prompt:
//   1 line  "no metaphors and no similes"            -> no_figurative
//   2 lines <literal translation> / "suitable"       -> literal_suitable
//   3 lines <literal> / "unsuitable" / <reason>      -> literal_unsuitable
// Anything else — including responses that mix the shapes — raises, so a
// polarity is never guessed.
inline MiningVerdict parse_verdict(const std::string& raw) {
  const auto lines = detail::payload_lines(raw);

  int suitable_lines = 0;
  int unsuitable_lines = 0;
  int none_lines = 0;
  for (const auto& line : lines) {
    const std::string c = detail::canonical(line);
    if (c == "suitable") ++suitable_lines;
    if (c == "unsuitable") ++unsuitable_lines;
    if (c == "no metaphors and no similes") ++none_lines;
  }
  if (suitable_lines + unsuitable_lines + none_lines != 1) {
    throw ParseError("mining response mixes verdict shapes or has no verdict line", raw);
  }

  MiningVerdict v;
  v.raw_response = raw;

  if (lines.size() == 1 && none_lines == 1) {
    v.kind = VerdictKind::no_figurative;
    return v;
  }
  if (lines.size() == 2 && detail::canonical(lines[1]) == "suitable" &&
      !lines[0].empty()) {
    v.kind = VerdictKind::literal_suitable;
    v.literal_translation = lines[0];
    return v;
  }
  if (lines.size() == 3 && detail::canonical(lines[1]) == "unsuitable" &&
      !lines[0].empty() && !lines[2].empty()) {
    v.kind = VerdictKind::literal_unsuitable;
    v.literal_translation = lines[0];
    v.unsuitability_reason = lines[2];
    return v;
  }
  throw ParseError("mining response does not match any declared shape", raw);
}

// Issues the mining prompt for one sentence and parses the reply, with the
// gateway's corrective-retry contract for unparseable output.
inline MiningVerdict judge_sentence(gateway::Gateway& gw,
                                    const gateway::CompletionParams& params,
                                    const corpus::RawSentence& s,
                                    int structured_retries = 3) {
  gateway::Conversation conv{gateway::system_msg(std::string(prompts::kMiningSystem)),
                             gateway::user_msg(prompts::mining_user(s.text))};
  return agents::complete_structured(
      gw, "mine", std::move(conv), params,
      [](const std::string& response) { return parse_verdict(response); },
      structured_retries);
}

struct MiningFailure {
  std::string sentence_id;
  std::string error;
};

struct MiningResult {
  // Every sentence that was judged, in input order (kept for audit).
  std::vector<std::pair<corpus::RawSentence, MiningVerdict>> judged;
  // The pre-collected subset: verdicts with kind == literal_unsuitable.
  std::vector<std::pair<corpus::RawSentence, MiningVerdict>> retained;
  std::vector<MiningFailure> failures;
};

// Judges a batch of sentences. Per-sentence judgment errors become skips,
// never batch aborts.
inline MiningResult mine_corpus(gateway::Gateway& gw,
                                const gateway::CompletionParams& params,
                                const std::vector<corpus::RawSentence>& sentences) {
  MiningResult result;
  for (const auto& s : sentences) {
    try {
      MiningVerdict v = judge_sentence(gw, params, s);
      if (v.kind == VerdictKind::literal_unsuitable) result.retained.emplace_back(s, v);
      result.judged.emplace_back(s, std::move(v));
    } catch (const Error& e) {
      result.failures.push_back({s.id, e.what()});
    }
  }
  return result;
}

inline nlohmann::json verdict_to_json(const std::string& sentence_id,
                                      const MiningVerdict& v) {
  nlohmann::json j{{"sentence_id", sentence_id},
                   {"kind", to_string(v.kind)},
                   {"raw_response", v.raw_response}};
  if (v.literal_translation) j["literal_translation"] = *v.literal_translation;
  if (v.unsuitability_reason) j["unsuitability_reason"] = *v.unsuitability_reason;
  return j;
}

inline std::pair<std::string, MiningVerdict> verdict_from_json(const nlohmann::json& j) {
  MiningVerdict v;
  std::string id;
  try {
    id = j.at("sentence_id").get<std::string>();
    v.kind = verdict_kind_from_string(j.at("kind").get<std::string>());
    v.raw_response = j.at("raw_response").get<std::string>();
    if (j.contains("literal_translation")) {
      v.literal_translation = j["literal_translation"].get<std::string>();
    }
    if (j.contains("unsuitability_reason")) {
      v.unsuitability_reason = j["unsuitability_reason"].get<std::string>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("bad verdict record: ") + e.what());
  }
  return {std::move(id), std::move(v)};
}

}  // namespace longmt::miner
