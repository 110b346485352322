#pragma once

#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "longmt/errors.hpp"
#include "longmt/gateway.hpp"
#include "longmt/prompts.hpp"
#include "longmt/text.hpp"

namespace longmt::agents {

// Evaluator score on the 0..100 rubric scale.
struct Score {
  int value = 0;

  bool operator==(const Score&) const = default;
};

inline Score make_score(int value) {
  if (value < 0 || value > 100) {
    throw ValidationError("score out of range [0, 100]: " + std::to_string(value));
  }
  return Score{value};
}

// Source keywords with one or more candidate renderings each, ordered by
// source term (the serialized JSON object is key-sorted, and that sorted
// form is what the preliminary prompt embeds).
struct KeywordTable {
  std::vector<std::pair<std::string, std::vector<std::string>>> entries;

  bool empty() const { return entries.empty(); }
};

inline KeywordTable keyword_table_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ValidationError("keyword payload is not a JSON object");
  if (j.empty()) throw ValidationError("keyword payload is empty");
  KeywordTable table;
  for (const auto& [term, value] : j.items()) {
    if (term.empty()) throw ValidationError("keyword payload has an empty source term");
    std::vector<std::string> renderings;
    if (value.is_string()) {
      renderings.push_back(value.get<std::string>());
    } else if (value.is_array()) {
      for (const auto& item : value) {
        if (!item.is_string()) {
          throw ValidationError("keyword '" + term + "' has a non-text rendering");
        }
        renderings.push_back(item.get<std::string>());
      }
    } else {
      throw ValidationError("keyword '" + term + "' has a non-text rendering");
    }
    if (renderings.empty()) {
      throw ValidationError("keyword '" + term + "' has no renderings");
    }
    for (const auto& r : renderings) {
      if (r.empty()) throw ValidationError("keyword '" + term + "' has an empty rendering");
    }
    table.entries.emplace_back(term, std::move(renderings));
  }
  return table;
}

inline nlohmann::json keyword_table_to_json(const KeywordTable& table) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [term, renderings] : table.entries) {
    if (renderings.size() == 1) {
      j[term] = renderings.front();
    } else {
      j[term] = renderings;
    }
  }
  return j;
}

// One completed point of the refine loop: translation t^k, the advisor
// feedback f^k on it, and the evaluator score s^k.
struct RefinementStep {
  int index = 0;
  std::string translation;
  std::string feedback;
  Score score;
};

// Per-trajectory conversation state. The translator keeps one dialogue from
// the preliminary translation through every refinement; the advisor keeps
// its own review dialogue.
struct TranslatorSession {
  gateway::Conversation dialogue;
};

struct AdvisorSession {
  gateway::Conversation dialogue;
};

// Calls the gateway and parses structured output, retrying up to
// `max_retries` times with the parse error appended as a corrective user
// message. The final failure propagates so the enclosing item can be marked
// failed without aborting the batch.
template <typename ParseFn>
auto complete_structured(gateway::Gateway& gw, const std::string& role_tag,
                         gateway::Conversation conversation,
                         const gateway::CompletionParams& params, ParseFn&& parse,
                         int max_retries = 3) {
  for (int attempt = 0;; ++attempt) {
    const std::string response = gw.complete(role_tag, conversation, params);
    try {
      return parse(response);
    } catch (const Error& e) {
      if (attempt >= max_retries) throw;
      conversation.push_back(gateway::assistant_msg(
          response.empty() ? std::string("(empty response)") : response));
      conversation.push_back(gateway::user_msg(
          std::string("Your previous reply could not be used: ") + e.what() +
          ". Please answer again, following the required format exactly."));
    }
  }
}

// Word-level translation: ask for the keyword table as a JSON object.
inline KeywordTable translate_keywords(gateway::Gateway& gw,
                                       const gateway::CompletionParams& params,
                                       const std::string& sentence) {
  gateway::Conversation conv{
      gateway::system_msg(std::string(prompts::kWordLevelSystem)),
      gateway::user_msg(prompts::word_level_user(sentence))};
  return complete_structured(gw, "keyword", std::move(conv), params,
                             [](const std::string& response) {
                               return keyword_table_from_json(
                                   gateway::extract_json_object(response));
                             });
}

// Preliminary translation t^0, conditioned on the sentence and its keyword
// pairs. Starts the translator dialogue that refinements will extend.
inline std::string preliminary_translate(gateway::Gateway& gw,
                                         const gateway::CompletionParams& params,
                                         const std::string& sentence,
                                         const KeywordTable& keywords,
                                         TranslatorSession& session) {
  if (keywords.empty()) throw ValidationError("keyword table is empty");
  const std::string keyword_json = keyword_table_to_json(keywords).dump();
  session.dialogue = {
      gateway::system_msg(std::string(prompts::kPreliminarySystem)),
      gateway::user_msg(prompts::preliminary_user(sentence, keyword_json))};
  const std::string t0 = text::trim(gw.complete("preliminary", session.dialogue, params));
  if (t0.empty()) throw AgentError("preliminary translation is empty");
  session.dialogue.push_back(gateway::assistant_msg(t0));
  return t0;
}

// Advisor feedback on the current translation. The first call carries the
// source text; later calls only carry the updated translation, since the
// dialogue already has the context.
inline std::string advise(gateway::Gateway& gw,
                          const gateway::CompletionParams& params,
                          const std::string& sentence, const std::string& translation,
                          AdvisorSession& session) {
  if (translation.empty()) throw ValidationError("advise: translation is empty");
  if (session.dialogue.empty()) {
    session.dialogue.push_back(gateway::system_msg(std::string(prompts::kAdvisorSystem)));
    session.dialogue.push_back(
        gateway::user_msg(prompts::advisor_user_first(sentence, translation)));
  } else {
    session.dialogue.push_back(
        gateway::user_msg(prompts::advisor_user_update(translation)));
  }
  const std::string feedback = text::trim(gw.complete("advise", session.dialogue, params));
  if (feedback.empty()) throw AgentError("advisor feedback is empty");
  session.dialogue.push_back(gateway::assistant_msg(feedback));
  return feedback;
}

// Parses the evaluator's {"reason": ..., "score": int} payload. Scores must
// be integers (87.5 is rejected, not rounded) and in [0, 100].
inline Score parse_score_payload(const nlohmann::json& payload) {
  if (!payload.contains("score")) throw ValidationError("evaluation payload has no \"score\" key");
  const auto& score = payload["score"];
  if (!score.is_number_integer()) {
    throw ValidationError("evaluation \"score\" is not an integer: " + score.dump());
  }
  const auto v = score.get<std::int64_t>();
  if (v < 0 || v > 100) {
    throw ValidationError("evaluation \"score\" out of range [0, 100]: " + std::to_string(v));
  }
  if (!payload.contains("reason") || !payload["reason"].is_string() ||
      payload["reason"].get<std::string>().empty()) {
    throw ValidationError("evaluation payload has no usable \"reason\" key");
  }
  return Score{static_cast<int>(v)};
}

// Evaluator score for a translation, conditioned on the rubric and the
// advisor feedback. Each call is a fresh conversation.
inline Score evaluate(gateway::Gateway& gw, const gateway::CompletionParams& params,
                      const std::string& sentence, const std::string& translation,
                      const std::string& feedback) {
  if (translation.empty()) throw ValidationError("evaluate: translation is empty");
  gateway::Conversation conv{
      gateway::system_msg(std::string(prompts::kEvaluatorSystem)),
      gateway::user_msg(prompts::evaluator_user(sentence, translation, feedback))};
  return complete_structured(gw, "evaluate", std::move(conv), params,
                             [](const std::string& response) {
                               return parse_score_payload(
                                   gateway::extract_json_object(response));
                             });
}

// Asks the translator for a new translation given the last feedback and
// score. Extends the session dialogue by one user and one assistant turn.
inline std::string refine(gateway::Gateway& gw, const gateway::CompletionParams& params,
                          TranslatorSession& session, const std::string& feedback,
                          Score score) {
  if (session.dialogue.empty()) {
    throw ValidationError("refine: translator session has no preliminary dialogue");
  }
  session.dialogue.push_back(
      gateway::user_msg(prompts::refinement_user(feedback, score.value)));
  const std::string t = text::trim(gw.complete("refine", session.dialogue, params));
  if (t.empty()) throw AgentError("refined translation is empty");
  session.dialogue.push_back(gateway::assistant_msg(t));
  return t;
}

}  // namespace longmt::agents
