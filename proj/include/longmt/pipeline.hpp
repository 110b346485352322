#pragma once

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"
#include "longmt/config.hpp"
#include "longmt/corpus.hpp"
#include "longmt/datastore.hpp"
#include "longmt/errors.hpp"
#include "longmt/evalkit.hpp"
#include "longmt/gateway.hpp"
#include "longmt/jsonl.hpp"
#include "longmt/miner.hpp"
#include "longmt/synthesis.hpp"

namespace longmt::pipeline {

struct StageReport {
  std::string stage;
  std::size_t in = 0;
  std::size_t out = 0;
  std::size_t failed = 0;
  std::size_t skipped = 0;

  std::string summary() const {
    return stage + ": in=" + std::to_string(in) + " out=" + std::to_string(out) +
           " failed=" + std::to_string(failed) + " skipped=" + std::to_string(skipped);
  }
};

namespace detail {

// Runs fn(0..n-1) on up to `workers` threads. fn must not throw; items
// capture their own failures.
template <typename Fn>
void parallel_for(std::size_t n, int workers, Fn&& fn) {
  if (workers <= 1 || n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  const std::size_t thread_count =
      std::min<std::size_t>(static_cast<std::size_t>(workers), n);
  std::vector<std::thread> pool;
  pool.reserve(thread_count);
  for (std::size_t t = 0; t < thread_count; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

// Existing output lines keyed by their id field, byte-preserved so resumed
// runs leave finished work untouched.
inline std::map<std::string, std::string> existing_lines(
    const std::filesystem::path& path, const std::string& id_field) {
  std::map<std::string, std::string> out;
  if (!std::filesystem::exists(path)) return out;
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file for reading: " + path.string());
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains(id_field)) {
      throw IoError("unreadable resume line in " + path.string());
    }
    out[j[id_field].get<std::string>()] = line;
  }
  return out;
}

inline int effective_workers(const config::PipelineConfig& cfg,
                             const gateway::Gateway& gw) {
  // Scripted replay must be sequential: fixture turns are ordered.
  return gw.scripted() ? 1 : cfg.concurrency;
}

}  // namespace detail

inline std::unique_ptr<gateway::Gateway> make_gateway(const config::PipelineConfig& cfg);

// --- ingest -----------------------------------------------------------------

// Reads every .txt book under books_dir (file stem = book_id), extracts and
// deduplicates sentences, applies the length filter, and writes the
// sentence corpus. Pure recomputation, so rerunning is idempotent.
inline StageReport run_ingest(const config::PipelineConfig& cfg) {
  StageReport report{"ingest"};
  if (!std::filesystem::is_directory(cfg.books_dir)) {
    throw IoError("books_dir does not exist: " + cfg.books_dir.string());
  }
  std::vector<std::filesystem::path> books;
  for (const auto& entry : std::filesystem::directory_iterator(cfg.books_dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") {
      books.push_back(entry.path());
    }
  }
  std::sort(books.begin(), books.end());

  std::vector<std::string> lines;
  for (const auto& book : books) {
    ++report.in;
    const std::string text_content = jsonl::read_text_file(book);
    auto sentences = corpus::filter_by_length(
        corpus::dedup_exact(corpus::extract_sentences(book.stem().string(), text_content)),
        cfg.min_words, cfg.max_words);
    for (const auto& s : sentences) {
      lines.push_back(jsonl::dump_line(corpus::to_json(s)));
      ++report.out;
    }
  }
  jsonl::atomic_write_lines(cfg.sentences, lines);
  return report;
}

// --- mine -------------------------------------------------------------------

inline StageReport run_mine(const config::PipelineConfig& cfg, gateway::Gateway& gw) {
  StageReport report{"mine"};
  std::vector<corpus::RawSentence> sentences;
  for (const auto& j : jsonl::read_file(cfg.sentences)) {
    sentences.push_back(corpus::sentence_from_json(j));
  }
  report.in = sentences.size();

  auto existing = cfg.resume
                      ? detail::existing_lines(cfg.verdicts, "sentence_id")
                      : std::map<std::string, std::string>{};

  const auto params = cfg.params_for(cfg.models.miner);
  std::vector<std::optional<std::string>> fresh(sentences.size());
  std::vector<std::string> errors(sentences.size());
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    if (existing.count(sentences[i].id) == 0) todo.push_back(i);
  }

  detail::parallel_for(todo.size(), detail::effective_workers(cfg, gw), [&](std::size_t t) {
    const std::size_t i = todo[t];
    try {
      const miner::MiningVerdict v = miner::judge_sentence(gw, params, sentences[i]);
      fresh[i] = jsonl::dump_line(miner::verdict_to_json(sentences[i].id, v));
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });

  std::vector<std::string> lines;
  for (std::size_t i = 0; i < sentences.size(); ++i) {
    const auto it = existing.find(sentences[i].id);
    if (it != existing.end()) {
      lines.push_back(it->second + "\n");
      ++report.skipped;
      ++report.out;
    } else if (fresh[i]) {
      lines.push_back(*fresh[i]);
      ++report.out;
    } else {
      ++report.failed;
    }
  }
  jsonl::atomic_write_lines(cfg.verdicts, lines);
  return report;
}

// --- synth -------------------------------------------------------------------

inline StageReport run_synth(const config::PipelineConfig& cfg, gateway::Gateway& gw) {
  StageReport report{"synth"};

  std::map<std::string, corpus::RawSentence> sentence_by_id;
  for (const auto& j : jsonl::read_file(cfg.sentences)) {
    auto s = corpus::sentence_from_json(j);
    sentence_by_id[s.id] = std::move(s);
  }

  // Only the pre-collected set is synthesized.
  std::vector<corpus::RawSentence> targets;
  for (const auto& j : jsonl::read_file(cfg.verdicts)) {
    auto [id, verdict] = miner::verdict_from_json(j);
    if (verdict.kind != miner::VerdictKind::literal_unsuitable) continue;
    const auto it = sentence_by_id.find(id);
    if (it == sentence_by_id.end()) {
      throw ValidationError("verdict references unknown sentence id " + id);
    }
    targets.push_back(it->second);
  }
  report.in = targets.size();

  auto existing = cfg.resume
                      ? detail::existing_lines(cfg.trajectories, "sentence_id")
                      : std::map<std::string, std::string>{};
  // Failed trajectories are kept on disk for audit but retried on resume.
  for (auto it = existing.begin(); it != existing.end();) {
    const nlohmann::json j = nlohmann::json::parse(it->second);
    if (j.value("stop_reason", "") == "failed") {
      it = existing.erase(it);
    } else {
      ++it;
    }
  }

  synthesis::SynthesisParams params;
  params.threshold = cfg.threshold;
  params.max_refinements = cfg.max_refinements;
  params.translator = cfg.params_for(cfg.models.translator);
  params.advisor = cfg.params_for(cfg.models.advisor);
  params.evaluator = cfg.params_for(cfg.models.evaluator);

  std::vector<std::optional<std::string>> fresh(targets.size());
  std::vector<bool> failed(targets.size(), false);
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    if (existing.count(targets[i].id) == 0) todo.push_back(i);
  }

  detail::parallel_for(todo.size(), detail::effective_workers(cfg, gw), [&](std::size_t t) {
    const std::size_t i = todo[t];
    const synthesis::Trajectory traj = run_refine_loop(gw, params, targets[i]);
    fresh[i] = jsonl::dump_line(synthesis::trajectory_to_json(traj));
    failed[i] = traj.stop_reason == synthesis::StopReason::failed;
  });

  std::vector<std::string> lines;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const auto it = existing.find(targets[i].id);
    if (it != existing.end()) {
      lines.push_back(it->second + "\n");
      ++report.skipped;
      ++report.out;
    } else if (fresh[i]) {
      lines.push_back(*fresh[i]);
      if (failed[i]) {
        ++report.failed;
      } else {
        ++report.out;
      }
    }
  }
  jsonl::atomic_write_lines(cfg.trajectories, lines);
  return report;
}

// --- reformulate --------------------------------------------------------------

inline StageReport run_reformulate(const config::PipelineConfig& cfg,
                                   gateway::Gateway& gw) {
  StageReport report{"reformulate"};
  std::vector<synthesis::Trajectory> trajectories;
  for (const auto& j : jsonl::read_file(cfg.trajectories)) {
    trajectories.push_back(synthesis::trajectory_from_json(j));
  }
  report.in = trajectories.size();

  auto existing = cfg.resume ? detail::existing_lines(cfg.samples, "id")
                             : std::map<std::string, std::string>{};
  const auto params = cfg.params_for(cfg.models.reformulator);

  std::vector<std::optional<std::string>> fresh(trajectories.size());
  std::vector<std::string> errors(trajectories.size());
  std::vector<bool> pruned_out(trajectories.size(), false);
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    if (trajectories[i].stop_reason == synthesis::StopReason::failed) {
      pruned_out[i] = true;  // failed trajectories are not reformulated
      continue;
    }
    if (existing.count(trajectories[i].source.id) == 0) todo.push_back(i);
  }

  detail::parallel_for(todo.size(), detail::effective_workers(cfg, gw), [&](std::size_t t) {
    const std::size_t i = todo[t];
    try {
      const auto pruned = synthesis::prune_trajectory(trajectories[i]);
      if (!pruned) {
        pruned_out[i] = true;
        return;
      }
      const auto sample =
          synthesis::reformulate(gw, params, *pruned, trajectories[i].stop_reason);
      fresh[i] = jsonl::dump_line(synthesis::sample_to_json(sample));
    } catch (const Error& e) {
      errors[i] = e.what();
    }
  });

  std::vector<std::string> lines;
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    const auto it = existing.find(trajectories[i].source.id);
    if (it != existing.end()) {
      lines.push_back(it->second + "\n");
      ++report.skipped;
      ++report.out;
    } else if (fresh[i]) {
      lines.push_back(*fresh[i]);
      ++report.out;
    } else if (!pruned_out[i] && !errors[i].empty()) {
      ++report.failed;
    }
  }
  jsonl::atomic_write_lines(cfg.samples, lines);
  return report;
}

// --- split ---------------------------------------------------------------------

enum class ExportFormat { thought, plain };

inline ExportFormat export_format_from_string(const std::string& s) {
  if (s == "thought") return ExportFormat::thought;
  if (s == "plain") return ExportFormat::plain;
  throw ConfigError("unknown export format: " + s);
}

inline nlohmann::json export_sample(const synthesis::LongThoughtSample& s,
                                    ExportFormat format) {
  if (format == ExportFormat::thought) {
    return nlohmann::json{
        {"source", s.source_text}, {"thought", s.thought}, {"translation", s.translation}};
  }
  return nlohmann::json{{"source", s.source_text}, {"translation", s.translation}};
}

inline StageReport run_split(const config::PipelineConfig& cfg,
                             ExportFormat format = ExportFormat::thought) {
  StageReport report{"split"};
  std::vector<synthesis::LongThoughtSample> samples;
  for (const auto& j : jsonl::read_file(cfg.samples)) {
    samples.push_back(synthesis::sample_from_json(j));
  }
  report.in = samples.size();

  const auto parts = datastore::split(samples, cfg.split_counts, cfg.split_seed);

  auto write_part = [&](const std::string& name,
                        const std::vector<synthesis::LongThoughtSample>& part) {
    std::vector<std::string> lines;
    lines.reserve(part.size());
    for (const auto& s : part) {
      lines.push_back(jsonl::dump_line(export_sample(s, format)));
    }
    jsonl::atomic_write_lines(cfg.split_dir / (name + ".jsonl"), lines);
    report.out += part.size();
  };
  write_part("train", parts.train);
  write_part("validation", parts.validation);
  write_part("test", parts.test);

  auto ids_of = [](const std::vector<synthesis::LongThoughtSample>& part) {
    std::vector<std::string> ids;
    ids.reserve(part.size());
    for (const auto& s : part) ids.push_back(s.id);
    return ids;
  };
  nlohmann::json manifest{
      {"seed", cfg.split_seed},
      {"counts",
       {{"train", cfg.split_counts.train},
        {"validation", cfg.split_counts.validation},
        {"test", cfg.split_counts.test}}},
      {"format", format == ExportFormat::thought ? "thought" : "plain"},
      {"ids",
       {{"train", ids_of(parts.train)},
        {"validation", ids_of(parts.validation)},
        {"test", ids_of(parts.test)}}}};
  jsonl::atomic_write_text(cfg.split_dir / "manifest.json", manifest.dump(2) + "\n");
  return report;
}

// --- stats ----------------------------------------------------------------------

inline StageReport run_stats(const config::PipelineConfig& cfg) {
  StageReport report{"stats"};
  std::vector<synthesis::Trajectory> trajectories;
  for (const auto& j : jsonl::read_file(cfg.trajectories)) {
    trajectories.push_back(synthesis::trajectory_from_json(j));
  }
  std::vector<synthesis::LongThoughtSample> samples;
  for (const auto& j : jsonl::read_file(cfg.samples)) {
    samples.push_back(synthesis::sample_from_json(j));
  }
  report.in = samples.size();
  const auto stats = datastore::compute_stats(trajectories, samples, cfg.token_scheme);
  jsonl::atomic_write_text(cfg.stats_json, datastore::stats_to_json(stats).dump(2) + "\n");
  jsonl::atomic_write_text(cfg.stats_table, datastore::stats_table(stats));
  report.out = 2;
  return report;
}

// --- eval -----------------------------------------------------------------------

inline StageReport run_eval(const config::PipelineConfig& cfg, gateway::Gateway& gw,
                            bool gea_with_advisor = false) {
  StageReport report{"eval"};
  std::vector<evalkit::EvalRecord> records;
  for (const auto& j : jsonl::read_file(cfg.eval_input)) {
    records.push_back(evalkit::eval_record_from_json(j));
  }
  report.in = records.size();
  if (records.empty()) throw ValidationError("eval input is empty");

  const std::set<std::string> metrics(cfg.metrics.begin(), cfg.metrics.end());
  for (const auto& m : metrics) {
    if (m != "bleu" && m != "grf" && m != "grb" && m != "gea") {
      throw ConfigError("unknown metric: " + m);
    }
  }
  const auto judge_params = cfg.params_for(cfg.models.judge);

  // Corpus-level BLEU over the aligned (hypothesis, reference) pairs.
  std::map<std::string, double> corpus_scores;
  if (metrics.count("bleu") > 0) {
    std::vector<std::string> hyps;
    std::vector<std::string> refs;
    for (const auto& r : records) {
      if (!r.reference) {
        throw ValidationError("record " + r.sample_id +
                              " has no reference; BLEU needs aligned references");
      }
      hyps.push_back(r.hypothesis);
      refs.push_back(*r.reference);
    }
    corpus_scores["bleu"] = evalkit::corpus_bleu(
        hyps, refs, evalkit::bleu_tokenization_from_string(cfg.bleu_tokenization));
  }

  std::vector<std::string> errors(records.size());
  const bool need_judges =
      metrics.count("grf") + metrics.count("grb") + metrics.count("gea") > 0;
  if (need_judges) {
    detail::parallel_for(
        records.size(), detail::effective_workers(cfg, gw), [&](std::size_t i) {
          auto& r = records[i];
          try {
            if (metrics.count("grf") > 0) {
              r.scores["grf"] = evalkit::judge_grf(gw, judge_params, r.source, r.hypothesis);
            }
            if (metrics.count("grb") > 0) {
              if (!r.reference) throw ValidationError("record has no reference for GRB");
              r.scores["grb"] =
                  evalkit::judge_grb(gw, judge_params, r.source, *r.reference, r.hypothesis);
            }
            if (metrics.count("gea") > 0) {
              r.scores["gea"] = static_cast<double>(
                  evalkit::judge_gea(gw, judge_params, r.source, r.hypothesis,
                                     gea_with_advisor)
                      .value);
            }
          } catch (const Error& e) {
            errors[i] = e.what();
          }
        });
  }

  // External neural-metric scores (CometKiwi / CometScore) can be merged
  // from a JSONL of {sample_id, metric, score}.
  if (cfg.external_scores) {
    std::map<std::string, evalkit::EvalRecord*> by_id;
    for (auto& r : records) by_id[r.sample_id] = &r;
    for (const auto& j : jsonl::read_file(*cfg.external_scores)) {
      const auto id = j.at("sample_id").get<std::string>();
      const auto it = by_id.find(id);
      if (it == by_id.end()) {
        throw ValidationError("external score references unknown sample " + id);
      }
      it->second->scores[j.at("metric").get<std::string>()] = j.at("score").get<double>();
    }
  }

  // Corpus means for per-sample metrics.
  std::map<std::string, std::pair<double, std::size_t>> sums;
  for (const auto& r : records) {
    for (const auto& [metric, score] : r.scores) {
      sums[metric].first += score;
      sums[metric].second += 1;
    }
  }
  for (const auto& [metric, acc] : sums) {
    corpus_scores[metric] = acc.first / static_cast<double>(acc.second);
  }

  nlohmann::json sample_json = nlohmann::json::array();
  for (std::size_t i = 0; i < records.size(); ++i) {
    nlohmann::json j = evalkit::eval_record_to_json(records[i]);
    if (!errors[i].empty()) {
      j["error"] = errors[i];
      ++report.failed;
    }
    sample_json.push_back(std::move(j));
  }
  report.out = records.size() - report.failed;

  nlohmann::json report_json{{"corpus", corpus_scores}, {"samples", std::move(sample_json)}};
  jsonl::atomic_write_text(cfg.eval_report_json, report_json.dump(2) + "\n");

  std::string table = "metric            corpus mean\n";
  for (const auto& [metric, score] : corpus_scores) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%-17s %10.4f\n", metric.c_str(), score);
    table += buf;
  }
  jsonl::atomic_write_text(cfg.eval_report_table, table);
  return report;
}

// --- replay ----------------------------------------------------------------------

// Deterministic end-to-end smoke run: mine -> synth -> reformulate against
// the scripted fixture. Zero network by construction.
inline std::vector<StageReport> run_replay(const config::PipelineConfig& cfg) {
  if (cfg.backend != config::BackendKind::scripted) {
    throw ConfigError("replay requires a scripted backend");
  }
  auto gw = make_gateway(cfg);
  std::vector<StageReport> reports;
  reports.push_back(run_mine(cfg, *gw));
  reports.push_back(run_synth(cfg, *gw));
  reports.push_back(run_reformulate(cfg, *gw));
  return reports;
}

}  // namespace longmt::pipeline

#include "longmt/gateway_http.hpp"

namespace longmt::pipeline {

inline std::unique_ptr<gateway::Gateway> make_gateway(const config::PipelineConfig& cfg) {
  std::unique_ptr<gateway::Backend> backend;
  if (cfg.backend == config::BackendKind::scripted) {
    backend = std::make_unique<gateway::ScriptedBackend>(
        gateway::ScriptedBackend::from_file(cfg.fixture));
  } else {
    gateway::LiveOptions options;
    options.url = cfg.endpoint;
    if (!cfg.credential_env.empty()) {
      if (const char* key = std::getenv(cfg.credential_env.c_str())) {
        options.api_key = key;
      }
    }
    backend = std::make_unique<gateway::LiveBackend>(std::move(options));
  }
  return std::make_unique<gateway::Gateway>(
      std::move(backend), static_cast<std::size_t>(cfg.concurrency), cfg.audit_log);
}

}  // namespace longmt::pipeline
