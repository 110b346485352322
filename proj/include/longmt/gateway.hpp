#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"
#include "longmt/errors.hpp"
#include "longmt/jsonl.hpp"
#include "longmt/text.hpp"

namespace longmt::gateway {

enum class MsgRole { system, user, assistant };

inline const char* to_string(MsgRole r) {
  switch (r) {
    case MsgRole::system: return "system";
    case MsgRole::user: return "user";
    case MsgRole::assistant: return "assistant";
  }
  return "user";
}

struct ChatMessage {
  MsgRole role = MsgRole::user;
  std::string content;
};

using Conversation = std::vector<ChatMessage>;

inline ChatMessage system_msg(std::string content) {
  return {MsgRole::system, std::move(content)};
}
inline ChatMessage user_msg(std::string content) {
  return {MsgRole::user, std::move(content)};
}
inline ChatMessage assistant_msg(std::string content) {
  return {MsgRole::assistant, std::move(content)};
}

struct CompletionParams {
  std::string model_name;
  double temperature = 0.1;
  int max_output_tokens = 2048;
  int retry_limit = 3;
};

inline void validate(const CompletionParams& p) {
  if (p.temperature < 0.0 || p.temperature > 2.0) {
    throw ConfigError("temperature must be in [0, 2]");
  }
  if (p.max_output_tokens <= 0) throw ConfigError("max_output_tokens must be positive");
  if (p.retry_limit < 0) throw ConfigError("retry_limit must be nonnegative");
}

inline void validate(const Conversation& conversation) {
  if (conversation.empty()) throw ValidationError("conversation is empty");
  for (std::size_t i = 0; i < conversation.size(); ++i) {
    if (conversation[i].content.empty()) {
      throw ValidationError("message " + std::to_string(i) + " has empty content");
    }
    if (conversation[i].role == MsgRole::system && i != 0) {
      throw ValidationError("system message allowed only at the start of a conversation");
    }
  }
}

// ---------------------------------------------------------------------------
// Robust JSON extraction from free-form model text.
// ---------------------------------------------------------------------------

namespace detail {

// Balanced {...} spans, string-literal aware, starting at or after `from`.
inline std::optional<std::pair<std::size_t, std::size_t>> find_balanced_object(
    std::string_view s, std::size_t from) {
  bool in_str = false;
  bool escape = false;
  int depth = 0;
  std::size_t start = std::string::npos;
  for (std::size_t i = from; i < s.size(); ++i) {
    const char c = s[i];
    if (in_str) {
      if (escape) {
        escape = false;
      } else if (c == '\\') {
        escape = true;
      } else if (c == '"') {
        in_str = false;
      }
      continue;
    }
    if (depth > 0 && c == '"') {
      in_str = true;
      continue;
    }
    if (c == '{') {
      if (depth == 0) start = i;
      ++depth;
    } else if (c == '}' && depth > 0) {
      --depth;
      if (depth == 0) return std::make_pair(start, i + 1);
    }
  }
  return std::nullopt;
}

}  // namespace detail

// Returns the first syntactically complete JSON object embedded in `text`,
// skipping code fences and surrounding prose. Brace spans that fail to
// parse (prose braces) are skipped in favor of later candidates.
inline nlohmann::json extract_json_object(const std::string& text) {
  std::size_t from = 0;
  while (true) {
    auto span = detail::find_balanced_object(text, from);
    if (!span) break;
    const std::string candidate = text.substr(span->first, span->second - span->first);
    nlohmann::json parsed = nlohmann::json::parse(candidate, nullptr, false);
    if (parsed.is_object()) return parsed;
    from = span->first + 1;
  }
  throw ParseError("no complete JSON object found in model output", text);
}

// ---------------------------------------------------------------------------
// Backends
// ---------------------------------------------------------------------------

class Backend {
 public:
  virtual ~Backend() = default;

  // `role_tag` identifies the calling agent operation ("mine", "keyword",
  // "preliminary", "advise", "evaluate", "refine", "reformulate", ...).
  virtual std::string complete(const std::string& role_tag,
                               const Conversation& conversation,
                               const CompletionParams& params) = 0;

  virtual bool is_scripted() const { return false; }
};

// Deterministic replay backend. Fixture entries are keyed by
// (role_tag, turn); each tag replays its entries in turn order, so an
// identical call sequence yields an identical transcript.
class ScriptedBackend : public Backend {
 public:
  ScriptedBackend() = default;

  // Movable so fixtures can be staged and handed to a Gateway; the mutex
  // itself is never moved.
  ScriptedBackend(ScriptedBackend&& other) noexcept
      : entries_(std::move(other.entries_)), next_turn_(std::move(other.next_turn_)) {}

  static ScriptedBackend from_file(const std::filesystem::path& path) {
    ScriptedBackend b;
    for (const auto& j : jsonl::read_file(path)) {
      try {
        b.add(j.at("role_tag").get<std::string>(), j.at("turn").get<int>(),
              j.at("response").get<std::string>());
      } catch (const nlohmann::json::exception& e) {
        throw IoError("bad fixture entry in " + path.string() + ": " + e.what());
      }
    }
    return b;
  }

  void add(const std::string& role_tag, int turn, std::string response) {
    entries_[role_tag][turn] = std::move(response);
  }

  std::string complete(const std::string& role_tag, const Conversation&,
                       const CompletionParams&) override {
    std::lock_guard<std::mutex> lock(mu_);
    const int turn = next_turn_[role_tag]++;
    auto tag_it = entries_.find(role_tag);
    if (tag_it != entries_.end()) {
      auto turn_it = tag_it->second.find(turn);
      if (turn_it != tag_it->second.end()) return turn_it->second;
    }
    throw FixtureMissError("no fixture entry for role_tag='" + role_tag +
                           "' turn=" + std::to_string(turn));
  }

  bool is_scripted() const override { return true; }

 private:
  std::mutex mu_;
  std::map<std::string, std::map<int, std::string>> entries_;
  std::map<std::string, int> next_turn_;
};

// OpenAI-style chat-completions client. Declared here, defined in
// gateway_http.hpp so that tests without a network path don't pay for the
// httplib include.
class LiveBackend;

struct CallStats {
  std::map<std::string, int> per_tag;
  int total = 0;

  int count(const std::string& tag) const {
    auto it = per_tag.find(tag);
    return it == per_tag.end() ? 0 : it->second;
  }
};

// ---------------------------------------------------------------------------
// Gateway: shared front door with a global in-flight bound, per-tag call
// accounting, and an optional audit log of every request/response pair.
// ---------------------------------------------------------------------------

class Gateway {
 public:
  explicit Gateway(std::unique_ptr<Backend> backend, std::size_t max_in_flight = 8,
                   std::optional<std::filesystem::path> audit_log = std::nullopt)
      : backend_(std::move(backend)),
        max_in_flight_(max_in_flight == 0 ? 1 : max_in_flight) {
    if (audit_log) audit_ = std::make_unique<jsonl::AppendWriter>(*audit_log);
  }

  std::string complete(const std::string& role_tag, const Conversation& conversation,
                       const CompletionParams& params) {
    validate(params);
    validate(conversation);

    {
      std::unique_lock<std::mutex> lock(flight_mu_);
      flight_cv_.wait(lock, [&] { return in_flight_ < max_in_flight_; });
      ++in_flight_;
    }
    std::string response;
    try {
      response = backend_->complete(role_tag, conversation, params);
    } catch (...) {
      release_slot();
      record(role_tag);  // failed calls still count as issued
      throw;
    }
    release_slot();
    record(role_tag);
    audit(role_tag, conversation, params, response);
    return response;
  }

  CallStats stats() const {
    std::lock_guard<std::mutex> lock(stats_mu_);
    return stats_;
  }

  void reset_stats() {
    std::lock_guard<std::mutex> lock(stats_mu_);
    stats_ = CallStats{};
  }

  bool scripted() const { return backend_->is_scripted(); }

 private:
  void release_slot() {
    std::lock_guard<std::mutex> lock(flight_mu_);
    --in_flight_;
    flight_cv_.notify_one();
  }

  void record(const std::string& tag) {
    std::lock_guard<std::mutex> lock(stats_mu_);
    ++stats_.per_tag[tag];
    ++stats_.total;
  }

  void audit(const std::string& tag, const Conversation& conversation,
             const CompletionParams& params, const std::string& response) {
    if (!audit_) return;
    nlohmann::json msgs = nlohmann::json::array();
    for (const auto& m : conversation) {
      msgs.push_back({{"role", to_string(m.role)}, {"content", m.content}});
    }
    nlohmann::json rec{{"role_tag", tag},
                       {"model", params.model_name},
                       {"temperature", params.temperature},
                       {"messages", std::move(msgs)},
                       {"response", response}};
    std::lock_guard<std::mutex> lock(audit_mu_);
    audit_->write_line(rec.dump());
  }

  std::unique_ptr<Backend> backend_;
  std::size_t max_in_flight_;
  std::size_t in_flight_ = 0;
  std::mutex flight_mu_;
  std::condition_variable flight_cv_;
  mutable std::mutex stats_mu_;
  CallStats stats_;
  std::unique_ptr<jsonl::AppendWriter> audit_;
  std::mutex audit_mu_;
};

}  // namespace longmt::gateway
