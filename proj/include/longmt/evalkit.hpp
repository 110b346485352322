#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "longmt/agents.hpp"
#include "longmt/datastore.hpp"
#include "longmt/errors.hpp"
#include "longmt/gateway.hpp"
#include "longmt/prompts.hpp"

namespace longmt::evalkit {

enum class BleuTokenization { cjk_char, whitespace };

inline BleuTokenization bleu_tokenization_from_string(const std::string& s) {
  if (s == "cjk_char") return BleuTokenization::cjk_char;
  if (s == "whitespace") return BleuTokenization::whitespace;
  throw ConfigError("unknown BLEU tokenization: " + s);
}

namespace detail {

inline std::vector<std::string> bleu_tokens(std::string_view text_in,
                                            BleuTokenization tok) {
  if (tok == BleuTokenization::whitespace) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : text_in) {
      if (text::is_ascii_space(c)) {
        if (!cur.empty()) {
          out.push_back(cur);
          cur.clear();
        }
      } else {
        cur.push_back(c);
      }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
  }
  return datastore::tokenize(text_in, datastore::TokenScheme::whitespace_cjk);
}

inline std::map<std::vector<std::string>, std::size_t> ngram_counts(
    const std::vector<std::string>& tokens, std::size_t order) {
  std::map<std::vector<std::string>, std::size_t> counts;
  if (tokens.size() < order) return counts;
  for (std::size_t i = 0; i + order <= tokens.size(); ++i) {
    counts[std::vector<std::string>(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                    tokens.begin() + static_cast<std::ptrdiff_t>(i + order))]++;
  }
  return counts;
}

}  // namespace detail

// Corpus-level BLEU with modified n-gram precision for n = 1..4, clipped
// per segment against the aligned reference, geometric mean over orders,
// and brevity penalty exp(1 - r/c) when c <= r. Orders for which the
// hypothesis corpus has no n-grams at all are excluded from the mean, so
// an identical corpus scores 100 even when segments are short. Returned on
// the 0..100 scale.
inline double corpus_bleu(const std::vector<std::string>& hypotheses,
                          const std::vector<std::string>& references,
                          BleuTokenization tokenization) {
  if (hypotheses.empty()) throw ValidationError("corpus_bleu: empty corpus");
  if (hypotheses.size() != references.size()) {
    throw ValidationError("corpus_bleu: " + std::to_string(hypotheses.size()) +
                          " hypotheses vs " + std::to_string(references.size()) +
                          " references");
  }

  constexpr std::size_t kMaxOrder = 4;
  std::size_t matched[kMaxOrder] = {0, 0, 0, 0};
  std::size_t total[kMaxOrder] = {0, 0, 0, 0};
  std::size_t hyp_len = 0;
  std::size_t ref_len = 0;

  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    const auto hyp = detail::bleu_tokens(hypotheses[i], tokenization);
    const auto ref = detail::bleu_tokens(references[i], tokenization);
    hyp_len += hyp.size();
    ref_len += ref.size();
    for (std::size_t n = 1; n <= kMaxOrder; ++n) {
      const auto hyp_counts = detail::ngram_counts(hyp, n);
      const auto ref_counts = detail::ngram_counts(ref, n);
      for (const auto& [gram, count] : hyp_counts) {
        total[n - 1] += count;
        const auto it = ref_counts.find(gram);
        if (it != ref_counts.end()) matched[n - 1] += std::min(count, it->second);
      }
    }
  }

  double log_precision_sum = 0.0;
  std::size_t orders_used = 0;
  for (std::size_t n = 0; n < kMaxOrder; ++n) {
    if (total[n] == 0) continue;
    ++orders_used;
    if (matched[n] == 0) return 0.0;
    log_precision_sum += std::log(static_cast<double>(matched[n]) /
                                  static_cast<double>(total[n]));
  }
  if (orders_used == 0) throw ValidationError("corpus_bleu: corpus has no tokens");

  const double geo_mean = std::exp(log_precision_sum / static_cast<double>(orders_used));
  double brevity = 1.0;
  if (hyp_len <= ref_len) {
    brevity = std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(hyp_len));
  }
  return 100.0 * brevity * geo_mean;
}

// Parses a judge reply: the first integer (token-wise) whose value lies in
// [0, 100]; decimal answers are truncated toward zero. The prompts end with
// "Score:", so models lead with the number.
inline int parse_judge_score(const std::string& response) {
  const auto cps = text::to_codepoints(response);
  std::size_t i = 0;
  while (i < cps.size()) {
    const bool neg = cps[i] == U'-' && i + 1 < cps.size() && cps[i + 1] >= U'0' &&
                     cps[i + 1] <= U'9';
    if (neg || (cps[i] >= U'0' && cps[i] <= U'9')) {
      std::size_t j = i + (neg ? 1 : 0);
      long long value = 0;
      bool overflow = false;
      while (j < cps.size() && cps[j] >= U'0' && cps[j] <= U'9') {
        value = value * 10 + (cps[j] - U'0');
        if (value > 1000000) overflow = true;
        ++j;
      }
      // Truncate a decimal part toward zero by ignoring it.
      if (j < cps.size() && cps[j] == U'.') {
        while (++j < cps.size() && cps[j] >= U'0' && cps[j] <= U'9') {
        }
      }
      if (!overflow && !neg && value >= 0 && value <= 100) {
        return static_cast<int>(value);
      }
      i = j;
    } else {
      ++i;
    }
  }
  throw ParseError("no in-range integer score in judge response", response);
}

// Reference-free GPT-judge score (GRF prompt).
inline double judge_grf(gateway::Gateway& gw, const gateway::CompletionParams& params,
                        const std::string& source, const std::string& hypothesis) {
  gateway::Conversation conv{gateway::user_msg(prompts::grf(source, hypothesis))};
  return static_cast<double>(parse_judge_score(gw.complete("grf", conv, params)));
}

// Reference-based GPT-judge score (GRB prompt).
inline double judge_grb(gateway::Gateway& gw, const gateway::CompletionParams& params,
                        const std::string& source, const std::string& reference,
                        const std::string& hypothesis) {
  gateway::Conversation conv{
      gateway::user_msg(prompts::grb(source, reference, hypothesis))};
  return static_cast<double>(parse_judge_score(gw.complete("grb", conv, params)));
}

// Evaluator-agent metric. By default the rubric prompt sees only source and
// hypothesis; with_advisor = true first runs an advisor pass and feeds its
// comments to the evaluator, mirroring the synthesis-time pairing (two
// gateway calls).
inline agents::Score judge_gea(gateway::Gateway& gw,
                               const gateway::CompletionParams& params,
                               const std::string& source, const std::string& hypothesis,
                               bool with_advisor = false) {
  if (with_advisor) {
    agents::AdvisorSession session;
    const std::string feedback = agents::advise(gw, params, source, hypothesis, session);
    return agents::evaluate(gw, params, source, hypothesis, feedback);
  }
  gateway::Conversation conv{
      gateway::system_msg(std::string(prompts::kEvaluatorSystem)),
      gateway::user_msg(prompts::evaluator_user(source, hypothesis))};
  return agents::complete_structured(gw, "gea", std::move(conv), params,
                                     [](const std::string& response) {
                                       return agents::parse_score_payload(
                                           gateway::extract_json_object(response));
                                     });
}

// --- Evaluator-accuracy protocol ----------------------------------------

enum class PairwiseLabel { first_better, second_better, tie };

inline const char* to_string(PairwiseLabel l) {
  switch (l) {
    case PairwiseLabel::first_better: return "first_better";
    case PairwiseLabel::second_better: return "second_better";
    case PairwiseLabel::tie: return "tie";
  }
  return "tie";
}

inline PairwiseLabel pairwise_label_from_string(const std::string& s) {
  if (s == "first_better") return PairwiseLabel::first_better;
  if (s == "second_better") return PairwiseLabel::second_better;
  if (s == "tie") return PairwiseLabel::tie;
  throw IoError("unknown pairwise label: " + s);
}

struct PairwiseJudgment {
  std::string item_id;
  PairwiseLabel human_label = PairwiseLabel::tie;
  double score_first = 0.0;
  double score_second = 0.0;
};

// Fraction of items where the score comparison predicts the human label.
// Ties require |score_first - score_second| <= tie_epsilon (default: exact
// equality).
inline double pairwise_accuracy(const std::vector<PairwiseJudgment>& judgments,
                                double tie_epsilon = 0.0) {
  if (judgments.empty()) throw ValidationError("pairwise_accuracy: no judgments");
  std::size_t correct = 0;
  for (const auto& j : judgments) {
    PairwiseLabel predicted = PairwiseLabel::tie;
    if (std::abs(j.score_first - j.score_second) > tie_epsilon) {
      predicted = j.score_first > j.score_second ? PairwiseLabel::first_better
                                                 : PairwiseLabel::second_better;
    }
    if (predicted == j.human_label) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(judgments.size());
}

// --- Best-Worst Scaling ---------------------------------------------------

struct BwsBallot {
  std::string item_id;
  std::string evaluator_id;
  std::string best;
  std::string worst;
  std::set<std::string> candidates;
};

// score(m) = (times m was best - times m was worst) / times m appeared,
// in [-1, 1].
inline std::map<std::string, double> bws_scores(const std::vector<BwsBallot>& ballots) {
  if (ballots.empty()) throw ValidationError("bws_scores: no ballots");
  std::map<std::string, std::int64_t> best_count;
  std::map<std::string, std::int64_t> worst_count;
  std::map<std::string, std::int64_t> appearances;
  for (const auto& b : ballots) {
    if (b.best == b.worst) {
      throw ValidationError("ballot for item " + b.item_id + " has best == worst");
    }
    if (b.candidates.count(b.best) == 0 || b.candidates.count(b.worst) == 0) {
      throw ValidationError("ballot for item " + b.item_id +
                            " names a model outside its candidate set");
    }
    for (const auto& m : b.candidates) ++appearances[m];
    ++best_count[b.best];
    ++worst_count[b.worst];
  }
  std::map<std::string, double> scores;
  for (const auto& [model, appeared] : appearances) {
    if (appeared == 0) throw ValidationError("model " + model + " never appeared");
    scores[model] = static_cast<double>(best_count[model] - worst_count[model]) /
                    static_cast<double>(appeared);
  }
  return scores;
}

// --- Fleiss' kappa ---------------------------------------------------------

// ratings[i][j] = number of raters assigning item i to category j. Every
// item must have the same rater total n >= 2. The degenerate case where
// all mass sits in one category (chance agreement 1) is defined as 1.0
// when observed agreement is also 1.
inline double fleiss_kappa(const std::vector<std::vector<int>>& ratings) {
  if (ratings.empty()) throw ValidationError("fleiss_kappa: no items");
  const std::size_t categories = ratings.front().size();
  if (categories == 0) throw ValidationError("fleiss_kappa: no categories");

  long long raters = 0;
  for (int c : ratings.front()) {
    if (c < 0) throw ValidationError("fleiss_kappa: negative count");
    raters += c;
  }
  if (raters < 2) throw ValidationError("fleiss_kappa: needs at least 2 raters per item");

  const double n = static_cast<double>(raters);
  const double items = static_cast<double>(ratings.size());
  std::vector<double> category_mass(categories, 0.0);
  double p_bar = 0.0;
  for (const auto& row : ratings) {
    if (row.size() != categories) {
      throw ValidationError("fleiss_kappa: ragged category counts");
    }
    long long row_total = 0;
    double sq = 0.0;
    for (std::size_t j = 0; j < categories; ++j) {
      if (row[j] < 0) throw ValidationError("fleiss_kappa: negative count");
      row_total += row[j];
      sq += static_cast<double>(row[j]) * static_cast<double>(row[j]);
      category_mass[j] += static_cast<double>(row[j]);
    }
    if (row_total != raters) {
      throw ValidationError("fleiss_kappa: ragged rater counts (" +
                            std::to_string(row_total) + " vs " +
                            std::to_string(raters) + ")");
    }
    p_bar += (sq - n) / (n * (n - 1.0));
  }
  p_bar /= items;

  double pe_bar = 0.0;
  for (double mass : category_mass) {
    const double p = mass / (items * n);
    pe_bar += p * p;
  }
  if (pe_bar >= 1.0) {
    if (p_bar >= 1.0) return 1.0;
    throw ValidationError("fleiss_kappa: chance agreement is 1 but observed is not");
  }
  return (p_bar - pe_bar) / (1.0 - pe_bar);
}

// --- Eval records -----------------------------------------------------------

struct EvalRecord {
  std::string sample_id;
  std::string source;
  std::optional<std::string> reference;
  std::string hypothesis;
  std::map<std::string, double> scores;
};

inline EvalRecord eval_record_from_json(const nlohmann::json& j) {
  EvalRecord r;
  try {
    r.sample_id = j.at("sample_id").get<std::string>();
    r.source = j.at("source").get<std::string>();
    r.hypothesis = j.at("hypothesis").get<std::string>();
    if (j.contains("reference") && !j["reference"].is_null()) {
      r.reference = j["reference"].get<std::string>();
    }
    if (j.contains("scores")) {
      r.scores = j["scores"].get<std::map<std::string, double>>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(std::string("bad eval record: ") + e.what());
  }
  return r;
}

inline nlohmann::json eval_record_to_json(const EvalRecord& r) {
  nlohmann::json j{{"sample_id", r.sample_id},
                   {"source", r.source},
                   {"hypothesis", r.hypothesis}};
  if (r.reference) j["reference"] = *r.reference;
  if (!r.scores.empty()) j["scores"] = r.scores;
  return j;
}

}  // namespace longmt::evalkit
