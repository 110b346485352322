#pragma once

#include <algorithm>
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

namespace longmt::synthesis {

enum class StopReason { threshold_reached, max_iterations, failed };

inline const char* to_string(StopReason r) {
  switch (r) {
    case StopReason::threshold_reached: return "threshold_reached";
    case StopReason::max_iterations: return "max_iterations";
    case StopReason::failed: return "failed";
  }
  return "failed";
}

inline StopReason stop_reason_from_string(const std::string& s) {
  if (s == "threshold_reached") return StopReason::threshold_reached;
  if (s == "max_iterations") return StopReason::max_iterations;
  if (s == "failed") return StopReason::failed;
  throw IoError("unknown stop reason: " + s);
}

// The complete multi-agent record for one sentence: keyword pairs plus the
// contiguous (translation, feedback, score) tuples t^0..t^m.
struct Trajectory {
  corpus::RawSentence source;
  agents::KeywordTable keywords;
  std::vector<agents::RefinementStep> steps;
  StopReason stop_reason = StopReason::failed;
  std::string failure;  // diagnostic, only set when stop_reason == failed
};

struct SynthesisParams {
  int threshold = 90;       // stop once a score reaches this
  int max_refinements = 8;  // refinements beyond t^0
  gateway::CompletionParams translator;
  gateway::CompletionParams advisor;
  gateway::CompletionParams evaluator;
};

inline void validate(const SynthesisParams& p) {
  if (p.threshold < 0 || p.threshold > 100) {
    throw ConfigError("threshold must be in [0, 100]");
  }
  if (p.max_refinements < 0) throw ConfigError("max_refinements must be nonnegative");
}

// Runs keyword translation, the preliminary translation, and the
// advise -> evaluate -> refine loop until the score reaches the threshold
// or the refinement budget is spent. Every translation in the returned
// trajectory carries its feedback and score. An unrecoverable agent error
// yields stop_reason == failed with the completed steps preserved.
inline Trajectory run_refine_loop(gateway::Gateway& gw, const SynthesisParams& params,
                                  const corpus::RawSentence& sentence) {
  validate(params);
  Trajectory traj;
  traj.source = sentence;
  try {
    traj.keywords = agents::translate_keywords(gw, params.translator, sentence.text);
    agents::TranslatorSession translator;
    agents::AdvisorSession advisor;
    std::string t = agents::preliminary_translate(gw, params.translator, sentence.text,
                                                  traj.keywords, translator);
    for (int k = 0;; ++k) {
      const std::string f = agents::advise(gw, params.advisor, sentence.text, t, advisor);
      const agents::Score s = agents::evaluate(gw, params.evaluator, sentence.text, t, f);
      traj.steps.push_back({k, t, f, s});
      if (s.value >= params.threshold) {
        traj.stop_reason = StopReason::threshold_reached;
        break;
      }
      if (k == params.max_refinements) {
        traj.stop_reason = StopReason::max_iterations;
        break;
      }
      t = agents::refine(gw, params.translator, translator, f, s);
    }
  } catch (const Error& e) {
    traj.stop_reason = StopReason::failed;
    traj.failure = e.what();
  }
  return traj;
}

// A trajectory after score-stagnation pruning. `retained` keeps original
// step indices; `n` counts the surviving refinement steps (index >= 1);
// `final_index` is the original index of the selected final translation.
struct PrunedTrajectory {
  corpus::RawSentence source;
  agents::KeywordTable keywords;
  std::vector<agents::RefinementStep> retained;
  int n = 0;
  int final_index = 0;

  const agents::RefinementStep& final_step() const {
    for (const auto& step : retained) {
      if (step.index == final_index) return step;
    }
    throw ValidationError("pruned trajectory lost its final step");
  }
};

// Drops step i (i >= 1) whenever s^i equals s^{i-1} — the comparison is
// always against the original predecessor, so retained non-adjacent equal
// scores are legal. Rejects the sample when fewer than 3 refinement steps
// survive. The final translation is the earliest retained step achieving
// the maximum retained score.
inline std::optional<PrunedTrajectory> prune_trajectory(const Trajectory& traj) {
  if (traj.stop_reason == StopReason::failed) {
    throw ValidationError("cannot prune a failed trajectory");
  }
  if (traj.steps.empty()) throw ValidationError("trajectory has no steps");
  for (std::size_t i = 0; i < traj.steps.size(); ++i) {
    if (traj.steps[i].index != static_cast<int>(i)) {
      throw ValidationError("trajectory step indices are not contiguous from 0");
    }
  }

  PrunedTrajectory pruned;
  pruned.source = traj.source;
  pruned.keywords = traj.keywords;
  pruned.retained.push_back(traj.steps[0]);
  for (std::size_t i = 1; i < traj.steps.size(); ++i) {
    if (traj.steps[i].score.value != traj.steps[i - 1].score.value) {
      pruned.retained.push_back(traj.steps[i]);
    }
  }
  pruned.n = static_cast<int>(pruned.retained.size()) - 1;
  if (pruned.n < 3) return std::nullopt;

  int best_score = -1;
  for (const auto& step : pruned.retained) {
    if (step.score.value > best_score) {
      best_score = step.score.value;
      pruned.final_index = step.index;
    }
  }
  return pruned;
}

// Deterministic plain-text rendering of a pruned trajectory, used as the
// {translation process} block of the reformulation prompt.
inline std::string render_process(const PrunedTrajectory& pruned) {
  std::string out = "Keywords:\n";
  for (const auto& [term, renderings] : pruned.keywords.entries) {
    out += term;
    out += " -> ";
    for (std::size_t i = 0; i < renderings.size(); ++i) {
      if (i > 0) out += " / ";
      out += renderings[i];
    }
    out += "\n";
  }
  for (const auto& step : pruned.retained) {
    out += "\nAttempt " + std::to_string(step.index) + ": " + step.translation + "\n";
    out += "Advisor feedback: " + step.feedback + "\n";
    out += "Score: " + std::to_string(step.score.value) + "\n";
  }
  out += "\nFinal translation (highest score): " + pruned.final_step().translation + "\n";
  return out;
}

// Final training record: {source, thought, translation} plus bookkeeping.
struct SampleMeta {
  int n = 0;
  std::vector<int> retained_scores;
  StopReason stop_reason = StopReason::threshold_reached;
  std::string book_id;
};

struct LongThoughtSample {
  std::string id;
  std::string source_text;
  std::string thought;
  std::string translation;
  SampleMeta meta;
};

// Rewrites the pruned trajectory into a first-person self-reflection via
// the reformulation prompt. The sample's translation is the highest-scored
// retained translation regardless of what the reflection says.
inline LongThoughtSample reformulate(gateway::Gateway& gw,
                                     const gateway::CompletionParams& params,
                                     const PrunedTrajectory& pruned,
                                     StopReason stop_reason) {
  gateway::Conversation conv{gateway::user_msg(
      prompts::reformulation_user(pruned.source.text, render_process(pruned)))};
  const std::string thought = text::trim(gw.complete("reformulate", conv, params));
  if (thought.empty()) throw AgentError("reformulation returned an empty reflection");

  LongThoughtSample sample;
  sample.id = pruned.source.id;
  sample.source_text = pruned.source.text;
  sample.thought = thought;
  sample.translation = pruned.final_step().translation;
  sample.meta.n = pruned.n;
  for (const auto& step : pruned.retained) {
    sample.meta.retained_scores.push_back(step.score.value);
  }
  sample.meta.stop_reason = stop_reason;
  sample.meta.book_id = pruned.source.book_id;
  return sample;
}

// --- JSONL (de)serialization -------------------------------------------

inline nlohmann::json trajectory_to_json(const Trajectory& traj) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& step : traj.steps) {
    steps.push_back({{"k", step.index},
                     {"t", step.translation},
                     {"f", step.feedback},
                     {"s", step.score.value}});
  }
  nlohmann::json j{{"sentence_id", traj.source.id},
                   {"source", corpus::to_json(traj.source)},
                   {"keywords", agents::keyword_table_to_json(traj.keywords)},
                   {"steps", std::move(steps)},
                   {"stop_reason", to_string(traj.stop_reason)}};
  if (!traj.failure.empty()) j["failure"] = traj.failure;
  return j;
}

inline Trajectory trajectory_from_json(const nlohmann::json& j) {
  Trajectory traj;
  try {
    traj.source = corpus::sentence_from_json(j.at("source"));
    if (!j.at("keywords").empty()) {
      traj.keywords = agents::keyword_table_from_json(j.at("keywords"));
    }
    for (const auto& step : j.at("steps")) {
      traj.steps.push_back({step.at("k").get<int>(), step.at("t").get<std::string>(),
                            step.at("f").get<std::string>(),
                            agents::make_score(step.at("s").get<int>())});
    }
    traj.stop_reason = stop_reason_from_string(j.at("stop_reason").get<std::string>());
    if (j.contains("failure")) traj.failure = j["failure"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("bad trajectory record: ") + e.what());
  }
  return traj;
}

inline nlohmann::json sample_to_json(const LongThoughtSample& s) {
  return nlohmann::json{{"id", s.id},
                        {"source", s.source_text},
                        {"thought", s.thought},
                        {"translation", s.translation},
                        {"meta",
                         {{"n", s.meta.n},
                          {"retained_scores", s.meta.retained_scores},
                          {"stop_reason", to_string(s.meta.stop_reason)},
                          {"book_id", s.meta.book_id}}}};
}

inline LongThoughtSample sample_from_json(const nlohmann::json& j) {
  LongThoughtSample s;
  try {
    s.id = j.at("id").get<std::string>();
    s.source_text = j.at("source").get<std::string>();
    s.thought = j.at("thought").get<std::string>();
    s.translation = j.at("translation").get<std::string>();
    const auto& meta = j.at("meta");
    s.meta.n = meta.at("n").get<int>();
    s.meta.retained_scores = meta.at("retained_scores").get<std::vector<int>>();
    s.meta.stop_reason = stop_reason_from_string(meta.at("stop_reason").get<std::string>());
    s.meta.book_id = meta.at("book_id").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("bad sample record: ") + e.what());
  }
  return s;
}

}  // namespace longmt::synthesis
