// longmt — stage-oriented pipeline driver.
//
// Stages: ingest, mine, synth, reformulate, split, stats, eval, replay.
// Each stage reads its input JSONL, skips ids already present in its output
// (resume), writes atomically, and prints an in/out/failed summary line.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "longmt/config.hpp"
#include "longmt/pipeline.hpp"

namespace {

using longmt::config::PipelineConfig;

struct CliOverrides {
  std::string config_path;
  std::string fixture;
  std::string audit_log;
  std::string books_dir;
  std::string sentences;
  std::string verdicts;
  std::string trajectories;
  std::string samples;
  std::string split_dir;
  std::string eval_input;
  std::string metrics;
  std::string judge_model;
  std::string external_scores;
  std::string format = "thought";
  int threshold = -1;
  int max_refinements = -1;
  int concurrency = -1;
  long long seed = -1;
  std::vector<long long> counts;
  bool no_resume = false;
  bool gea_with_advisor = false;
};

PipelineConfig assemble_config(const CliOverrides& o) {
  PipelineConfig cfg;
  if (!o.config_path.empty()) cfg = longmt::config::load_config(o.config_path);
  if (!o.fixture.empty()) cfg.fixture = o.fixture;
  if (!o.audit_log.empty()) cfg.audit_log = o.audit_log;
  if (!o.books_dir.empty()) cfg.books_dir = o.books_dir;
  if (!o.sentences.empty()) cfg.sentences = o.sentences;
  if (!o.verdicts.empty()) cfg.verdicts = o.verdicts;
  if (!o.trajectories.empty()) cfg.trajectories = o.trajectories;
  if (!o.samples.empty()) cfg.samples = o.samples;
  if (!o.split_dir.empty()) cfg.split_dir = o.split_dir;
  if (!o.eval_input.empty()) cfg.eval_input = o.eval_input;
  if (!o.judge_model.empty()) cfg.models.judge = o.judge_model;
  if (!o.external_scores.empty()) cfg.external_scores = o.external_scores;
  if (o.threshold >= 0) cfg.threshold = o.threshold;
  if (o.max_refinements >= 0) cfg.max_refinements = o.max_refinements;
  if (o.concurrency >= 1) cfg.concurrency = o.concurrency;
  if (o.seed >= 0) cfg.split_seed = static_cast<std::uint64_t>(o.seed);
  if (!o.counts.empty()) {
    if (o.counts.size() != 3) {
      throw longmt::ConfigError("--counts expects train,validation,test");
    }
    for (long long c : o.counts) {
      if (c < 0) throw longmt::ConfigError("--counts must be nonnegative");
    }
    cfg.split_counts = {static_cast<std::size_t>(o.counts[0]),
                        static_cast<std::size_t>(o.counts[1]),
                        static_cast<std::size_t>(o.counts[2])};
  }
  if (!o.metrics.empty()) {
    cfg.metrics.clear();
    std::string cur;
    for (char c : o.metrics + ",") {
      if (c == ',') {
        if (!cur.empty()) cfg.metrics.push_back(cur);
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
  }
  if (o.no_resume) cfg.resume = false;
  return cfg;
}

int run_stage(const std::string& stage, const CliOverrides& overrides) {
  namespace pl = longmt::pipeline;
  try {
    PipelineConfig cfg = assemble_config(overrides);
    longmt::config::validate(cfg);

    std::vector<pl::StageReport> reports;
    if (stage == "ingest") {
      reports.push_back(pl::run_ingest(cfg));
    } else if (stage == "split") {
      reports.push_back(pl::run_split(cfg, pl::export_format_from_string(overrides.format)));
    } else if (stage == "stats") {
      reports.push_back(pl::run_stats(cfg));
    } else if (stage == "replay") {
      reports = pl::run_replay(cfg);
    } else {
      auto gw = pl::make_gateway(cfg);
      if (stage == "mine") {
        reports.push_back(pl::run_mine(cfg, *gw));
      } else if (stage == "synth") {
        reports.push_back(pl::run_synth(cfg, *gw));
      } else if (stage == "reformulate") {
        reports.push_back(pl::run_reformulate(cfg, *gw));
      } else if (stage == "eval") {
        reports.push_back(pl::run_eval(cfg, *gw, overrides.gea_with_advisor));
      } else {
        std::cerr << "unknown stage: " << stage << "\n";
        return 1;
      }
    }

    bool over_rate = false;
    for (const auto& r : reports) {
      std::cout << r.summary() << "\n";
      if (r.failed > 0 && r.in > 0) {
        const double rate = static_cast<double>(r.failed) / static_cast<double>(r.in);
        if (rate > cfg.max_failure_rate) over_rate = true;
      }
    }
    return over_rate ? 2 : 0;
  } catch (const longmt::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"longmt: long-thought machine translation data synthesis and evaluation"};
  app.require_subcommand(1);
  app.fallthrough();

  CliOverrides o;
  app.add_option("--config", o.config_path, "TOML config file");
  app.add_option("--fixture", o.fixture, "scripted backend fixture JSONL");
  app.add_option("--audit-log", o.audit_log, "gateway audit log JSONL");
  app.add_option("--concurrency", o.concurrency, "worker / in-flight bound");
  app.add_flag("--no-resume", o.no_resume, "recompute finished items too");

  auto* ingest = app.add_subcommand("ingest", "books -> sentence corpus");
  ingest->add_option("--books", o.books_dir, "directory of .txt books");
  ingest->add_option("--out", o.sentences, "sentence corpus JSONL");

  auto* mine = app.add_subcommand("mine", "judge figurative language per sentence");
  mine->add_option("--in", o.sentences, "sentence corpus JSONL");
  mine->add_option("--out", o.verdicts, "verdict JSONL");

  auto* synth = app.add_subcommand("synth", "run the multi-agent refine loop");
  synth->add_option("--sentences", o.sentences, "sentence corpus JSONL");
  synth->add_option("--in", o.verdicts, "verdict JSONL");
  synth->add_option("--out", o.trajectories, "trajectory JSONL");
  synth->add_option("--threshold", o.threshold, "stop score (0-100)");
  synth->add_option("--max-refinements", o.max_refinements, "refinement cap");

  auto* reformulate = app.add_subcommand("reformulate", "prune + rewrite into samples");
  reformulate->add_option("--in", o.trajectories, "trajectory JSONL");
  reformulate->add_option("--out", o.samples, "sample JSONL");

  auto* split = app.add_subcommand("split", "partition samples into train/val/test");
  split->add_option("--in", o.samples, "sample JSONL");
  split->add_option("--out-dir", o.split_dir, "output directory");
  split->add_option("--seed", o.seed, "shuffle seed");
  split->add_option("--counts", o.counts, "train validation test")->expected(3);
  split->add_option("--format", o.format, "export format: thought | plain");

  auto* stats = app.add_subcommand("stats", "dataset statistics report");
  stats->add_option("--trajectories", o.trajectories, "trajectory JSONL");
  stats->add_option("--in", o.samples, "sample JSONL");

  auto* eval = app.add_subcommand("eval", "score translations with the metric suite");
  eval->add_option("--in", o.eval_input, "eval records JSONL");
  eval->add_option("--metrics", o.metrics, "comma list: bleu,grf,grb,gea");
  eval->add_option("--judge-model", o.judge_model, "judge model name");
  eval->add_option("--external-scores", o.external_scores,
                   "merge {sample_id, metric, score} JSONL");
  eval->add_flag("--gea-with-advisor", o.gea_with_advisor,
                 "run an advisor pass before the GEA evaluator");

  auto* replay = app.add_subcommand("replay", "deterministic mine->synth->reformulate");
  replay->add_option("--sentences", o.sentences, "sentence corpus JSONL");
  replay->add_option("--verdicts", o.verdicts, "verdict JSONL");
  replay->add_option("--trajectories", o.trajectories, "trajectory JSONL");
  replay->add_option("--samples", o.samples, "sample JSONL");

  CLI11_PARSE(app, argc, argv);

  for (auto* sub : {ingest, mine, synth, reformulate, split, stats, eval, replay}) {
    if (sub->parsed()) return run_stage(sub->get_name(), o);
  }
  return 1;
}
