#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

#include "longmt/datastore.hpp"
#include "longmt/errors.hpp"
#include "longmt/gateway.hpp"
#include "longmt/jsonl.hpp"
#include "longmt/text.hpp"

namespace longmt::config {

// --- Minimal TOML reader ----------------------------------------------------
//
// Supports what the pipeline config needs: [sections], key = value with
// strings, integers, floats and booleans, and # comments. "${VAR}" inside
// string values is replaced from the environment at load time.

using TomlValue = std::variant<std::string, std::int64_t, double, bool>;

struct TomlTable {
  std::map<std::string, std::map<std::string, TomlValue>> sections;

  const TomlValue* find(const std::string& section, const std::string& key) const {
    auto s = sections.find(section);
    if (s == sections.end()) return nullptr;
    auto k = s->second.find(key);
    if (k == s->second.end()) return nullptr;
    return &k->second;
  }
};

inline std::string interpolate_env(const std::string& value) {
  std::string out;
  std::size_t i = 0;
  while (i < value.size()) {
    if (value[i] == '$' && i + 1 < value.size() && value[i + 1] == '{') {
      const auto end = value.find('}', i + 2);
      if (end == std::string::npos) {
        throw ConfigError("unterminated ${...} in config value: " + value);
      }
      const std::string name = value.substr(i + 2, end - i - 2);
      const char* env = std::getenv(name.c_str());
      if (env) out += env;
      i = end + 1;
    } else {
      out.push_back(value[i]);
      ++i;
    }
  }
  return out;
}

namespace detail {

inline std::string strip_comment(const std::string& line) {
  bool in_str = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_str = !in_str;
    if (line[i] == '#' && !in_str) return line.substr(0, i);
  }
  return line;
}

inline TomlValue parse_value(const std::string& raw, int lineno) {
  const std::string v = text::trim(raw);
  if (v.empty()) throw ConfigError("line " + std::to_string(lineno) + ": missing value");
  if (v.front() == '"') {
    if (v.size() < 2 || v.back() != '"') {
      throw ConfigError("line " + std::to_string(lineno) + ": unterminated string");
    }
    std::string out;
    for (std::size_t i = 1; i + 1 < v.size(); ++i) {
      if (v[i] == '\\' && i + 2 < v.size()) {
        ++i;
        switch (v[i]) {
          case 'n': out.push_back('\n'); break;
          case 't': out.push_back('\t'); break;
          case '"': out.push_back('"'); break;
          case '\\': out.push_back('\\'); break;
          default:
            throw ConfigError("line " + std::to_string(lineno) + ": bad escape \\" +
                              std::string(1, v[i]));
        }
      } else {
        out.push_back(v[i]);
      }
    }
    return interpolate_env(out);
  }
  if (v == "true") return true;
  if (v == "false") return false;
  try {
    if (v.find('.') != std::string::npos || v.find('e') != std::string::npos ||
        v.find('E') != std::string::npos) {
      std::size_t used = 0;
      const double d = std::stod(v, &used);
      if (used != v.size()) throw std::invalid_argument(v);
      return d;
    }
    std::size_t used = 0;
    const std::int64_t n = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return n;
  } catch (const std::exception&) {
    throw ConfigError("line " + std::to_string(lineno) + ": cannot parse value: " + v);
  }
}

}  // namespace detail

inline TomlTable parse_toml(const std::string& content) {
  TomlTable table;
  std::string section;
  int lineno = 0;
  for (const auto& raw_line : text::split_lines(content)) {
    ++lineno;
    const std::string line = text::trim(detail::strip_comment(raw_line));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw ConfigError("line " + std::to_string(lineno) + ": malformed section header");
      }
      section = text::trim(line.substr(1, line.size() - 2));
      table.sections[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = text::trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("line " + std::to_string(lineno) + ": empty key");
    table.sections[section][key] = detail::parse_value(line.substr(eq + 1), lineno);
  }
  return table;
}

// --- Pipeline configuration ---------------------------------------------

enum class BackendKind { live, scripted };

struct ModelNames {
  std::string miner = "default-model";
  std::string translator = "default-model";
  std::string advisor = "default-model";
  std::string evaluator = "default-model";
  std::string reformulator = "default-model";
  std::string judge = "default-model";
};

struct PipelineConfig {
  BackendKind backend = BackendKind::scripted;
  std::string endpoint;            // live: full chat-completions URL
  std::string credential_env;      // live: env var holding the API key
  std::filesystem::path fixture;   // scripted: response fixture JSONL
  std::optional<std::filesystem::path> audit_log;
  int concurrency = 8;
  double temperature = 0.1;
  int max_output_tokens = 2048;
  int retry_limit = 3;

  ModelNames models;

  int threshold = 90;
  int max_refinements = 8;

  int min_words = 10;
  int max_words = 100;

  datastore::SplitCounts split_counts{19264, 1000, 2000};
  std::uint64_t split_seed = 17;

  datastore::TokenScheme token_scheme = datastore::TokenScheme::whitespace_cjk;

  std::vector<std::string> metrics{"bleu"};
  std::string bleu_tokenization = "cjk_char";
  double tie_epsilon = 0.0;
  double max_failure_rate = 0.5;

  bool resume = true;

  // Stage artifact paths.
  std::filesystem::path books_dir = "data/books";
  std::filesystem::path sentences = "out/sentences.jsonl";
  std::filesystem::path verdicts = "out/verdicts.jsonl";
  std::filesystem::path trajectories = "out/trajectories.jsonl";
  std::filesystem::path samples = "out/samples.jsonl";
  std::filesystem::path split_dir = "out/split";
  std::filesystem::path stats_json = "out/stats.json";
  std::filesystem::path stats_table = "out/stats.txt";
  std::filesystem::path eval_input = "data/eval.jsonl";
  std::filesystem::path eval_report_json = "out/eval_report.json";
  std::filesystem::path eval_report_table = "out/eval_report.txt";
  std::optional<std::filesystem::path> external_scores;

  gateway::CompletionParams params_for(const std::string& model) const {
    gateway::CompletionParams p;
    p.model_name = model;
    p.temperature = temperature;
    p.max_output_tokens = max_output_tokens;
    p.retry_limit = retry_limit;
    return p;
  }
};

inline void validate(const PipelineConfig& cfg) {
  if (cfg.threshold < 0 || cfg.threshold > 100) {
    throw ConfigError("threshold must be in [0, 100]");
  }
  if (cfg.max_refinements < 0) throw ConfigError("max_refinements must be nonnegative");
  if (cfg.concurrency < 1) throw ConfigError("concurrency must be at least 1");
  if (cfg.temperature < 0.0 || cfg.temperature > 2.0) {
    throw ConfigError("temperature must be in [0, 2]");
  }
  if (cfg.max_failure_rate < 0.0 || cfg.max_failure_rate > 1.0) {
    throw ConfigError("max_failure_rate must be in [0, 1]");
  }
  if (cfg.min_words < 0 || cfg.min_words > cfg.max_words) {
    throw ConfigError("invalid word-count bounds");
  }
  if (cfg.backend == BackendKind::live && cfg.endpoint.empty()) {
    throw ConfigError("live backend requires an endpoint URL");
  }
  if (cfg.backend == BackendKind::scripted && cfg.fixture.empty()) {
    throw ConfigError("scripted backend requires a fixture path");
  }
  // Stage outputs must not collide.
  const std::vector<std::filesystem::path> outputs{
      cfg.sentences,   cfg.verdicts,   cfg.trajectories,     cfg.samples,
      cfg.stats_json,  cfg.stats_table, cfg.eval_report_json, cfg.eval_report_table};
  std::set<std::string> seen;
  for (const auto& p : outputs) {
    if (!seen.insert(p.string()).second) {
      throw ConfigError("stage output paths must be distinct: " + p.string());
    }
  }
}

namespace detail {

inline std::string get_string(const TomlTable& t, const std::string& sec,
                              const std::string& key, const std::string& fallback) {
  const TomlValue* v = t.find(sec, key);
  if (!v) return fallback;
  if (const auto* s = std::get_if<std::string>(v)) return *s;
  throw ConfigError(sec + "." + key + " must be a string");
}

inline std::int64_t get_int(const TomlTable& t, const std::string& sec,
                            const std::string& key, std::int64_t fallback) {
  const TomlValue* v = t.find(sec, key);
  if (!v) return fallback;
  if (const auto* n = std::get_if<std::int64_t>(v)) return *n;
  throw ConfigError(sec + "." + key + " must be an integer");
}

inline double get_double(const TomlTable& t, const std::string& sec,
                         const std::string& key, double fallback) {
  const TomlValue* v = t.find(sec, key);
  if (!v) return fallback;
  if (const auto* d = std::get_if<double>(v)) return *d;
  if (const auto* n = std::get_if<std::int64_t>(v)) return static_cast<double>(*n);
  throw ConfigError(sec + "." + key + " must be a number");
}

inline bool get_bool(const TomlTable& t, const std::string& sec, const std::string& key,
                     bool fallback) {
  const TomlValue* v = t.find(sec, key);
  if (!v) return fallback;
  if (const auto* b = std::get_if<bool>(v)) return *b;
  throw ConfigError(sec + "." + key + " must be a boolean");
}

}  // namespace detail

inline PipelineConfig config_from_toml(const TomlTable& t) {
  PipelineConfig cfg;

  const std::string kind = detail::get_string(t, "backend", "kind", "scripted");
  if (kind == "live") {
    cfg.backend = BackendKind::live;
  } else if (kind == "scripted") {
    cfg.backend = BackendKind::scripted;
  } else {
    throw ConfigError("backend.kind must be \"live\" or \"scripted\"");
  }
  cfg.endpoint = detail::get_string(t, "backend", "endpoint", cfg.endpoint);
  cfg.credential_env = detail::get_string(t, "backend", "credential_env", cfg.credential_env);
  cfg.fixture = detail::get_string(t, "backend", "fixture", cfg.fixture.string());
  const std::string audit = detail::get_string(t, "backend", "audit_log", "");
  if (!audit.empty()) cfg.audit_log = audit;
  cfg.concurrency = static_cast<int>(detail::get_int(t, "backend", "concurrency", cfg.concurrency));
  cfg.temperature = detail::get_double(t, "backend", "temperature", cfg.temperature);
  cfg.max_output_tokens =
      static_cast<int>(detail::get_int(t, "backend", "max_output_tokens", cfg.max_output_tokens));
  cfg.retry_limit = static_cast<int>(detail::get_int(t, "backend", "retry_limit", cfg.retry_limit));

  cfg.models.miner = detail::get_string(t, "models", "miner", cfg.models.miner);
  cfg.models.translator = detail::get_string(t, "models", "translator", cfg.models.translator);
  cfg.models.advisor = detail::get_string(t, "models", "advisor", cfg.models.advisor);
  cfg.models.evaluator = detail::get_string(t, "models", "evaluator", cfg.models.evaluator);
  cfg.models.reformulator =
      detail::get_string(t, "models", "reformulator", cfg.models.reformulator);
  cfg.models.judge = detail::get_string(t, "models", "judge", cfg.models.judge);

  cfg.threshold = static_cast<int>(detail::get_int(t, "synthesis", "threshold", cfg.threshold));
  cfg.max_refinements =
      static_cast<int>(detail::get_int(t, "synthesis", "max_refinements", cfg.max_refinements));

  cfg.min_words = static_cast<int>(detail::get_int(t, "corpus", "min_words", cfg.min_words));
  cfg.max_words = static_cast<int>(detail::get_int(t, "corpus", "max_words", cfg.max_words));

  cfg.split_counts.train = static_cast<std::size_t>(
      detail::get_int(t, "split", "train", static_cast<std::int64_t>(cfg.split_counts.train)));
  cfg.split_counts.validation = static_cast<std::size_t>(detail::get_int(
      t, "split", "validation", static_cast<std::int64_t>(cfg.split_counts.validation)));
  cfg.split_counts.test = static_cast<std::size_t>(
      detail::get_int(t, "split", "test", static_cast<std::int64_t>(cfg.split_counts.test)));
  cfg.split_seed = static_cast<std::uint64_t>(
      detail::get_int(t, "split", "seed", static_cast<std::int64_t>(cfg.split_seed)));

  cfg.token_scheme = datastore::token_scheme_from_string(
      detail::get_string(t, "stats", "token_scheme", to_string(cfg.token_scheme)));

  const std::string metrics = detail::get_string(t, "eval", "metrics", "");
  if (!metrics.empty()) {
    cfg.metrics.clear();
    std::string cur;
    for (char c : metrics + ",") {
      if (c == ',') {
        const std::string m = text::trim(cur);
        if (!m.empty()) cfg.metrics.push_back(m);
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
  }
  cfg.bleu_tokenization =
      detail::get_string(t, "eval", "bleu_tokenization", cfg.bleu_tokenization);
  cfg.tie_epsilon = detail::get_double(t, "eval", "tie_epsilon", cfg.tie_epsilon);
  cfg.max_failure_rate =
      detail::get_double(t, "pipeline", "max_failure_rate", cfg.max_failure_rate);
  cfg.resume = detail::get_bool(t, "pipeline", "resume", cfg.resume);

  auto path_of = [&](const std::string& key, const std::filesystem::path& fallback) {
    return std::filesystem::path(detail::get_string(t, "paths", key, fallback.string()));
  };
  cfg.books_dir = path_of("books_dir", cfg.books_dir);
  cfg.sentences = path_of("sentences", cfg.sentences);
  cfg.verdicts = path_of("verdicts", cfg.verdicts);
  cfg.trajectories = path_of("trajectories", cfg.trajectories);
  cfg.samples = path_of("samples", cfg.samples);
  cfg.split_dir = path_of("split_dir", cfg.split_dir);
  cfg.stats_json = path_of("stats_json", cfg.stats_json);
  cfg.stats_table = path_of("stats_table", cfg.stats_table);
  cfg.eval_input = path_of("eval_input", cfg.eval_input);
  cfg.eval_report_json = path_of("eval_report_json", cfg.eval_report_json);
  cfg.eval_report_table = path_of("eval_report_table", cfg.eval_report_table);
  const std::string ext = detail::get_string(t, "paths", "external_scores", "");
  if (!ext.empty()) cfg.external_scores = ext;

  return cfg;
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
  return config_from_toml(parse_toml(jsonl::read_text_file(path)));
}

}  // namespace longmt::config
