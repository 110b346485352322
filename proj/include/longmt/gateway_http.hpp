#pragma once

// Live chat-completions backend on top of cpp-httplib. Split from
// gateway.hpp so pure-logic consumers don't drag in the HTTP stack.

#include <chrono>
#include <string>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "longmt/gateway.hpp"

namespace longmt::gateway {

struct LiveOptions {
  std::string url;      // full URL; path defaults to /v1/chat/completions
  std::string api_key;  // sent as "Authorization: Bearer <key>" when non-empty
  std::chrono::milliseconds backoff_base{250};
  std::chrono::milliseconds backoff_cap{8000};
  std::chrono::seconds read_timeout{120};
};

class LiveBackend : public Backend {
 public:
  explicit LiveBackend(LiveOptions options) : options_(std::move(options)) {
    split_url(options_.url, base_, path_);
  }

  std::string complete(const std::string&, const Conversation& conversation,
                       const CompletionParams& params) override {
    const std::string body = make_payload(conversation, params).dump();

    std::string last_error;
    for (int attempt = 0; attempt <= params.retry_limit; ++attempt) {
      if (attempt > 0) {
        auto delay = options_.backoff_base * (1LL << (attempt - 1));
        if (delay > options_.backoff_cap) delay = options_.backoff_cap;
        std::this_thread::sleep_for(delay);
      }

      httplib::Client client(base_);
      client.set_read_timeout(options_.read_timeout);
      client.set_connection_timeout(options_.read_timeout);
      httplib::Headers headers;
      if (!options_.api_key.empty()) {
        headers.emplace("Authorization", "Bearer " + options_.api_key);
      }
      auto res = client.Post(path_, headers, body, "application/json");

      if (!res) {
        // Transport-level failure (refused, reset, timeout): transient.
        last_error = "transport error: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status == 200) return parse_response(res->body);
      if (is_transient_status(res->status)) {
        last_error = "HTTP " + std::to_string(res->status);
        continue;
      }
      // Authentication / validation failures must not be retried.
      throw BackendError("backend rejected request with HTTP " +
                         std::to_string(res->status) + ": " + res->body);
    }
    throw BackendError("retries exhausted (" + std::to_string(params.retry_limit) +
                       "): " + last_error);
  }

  static bool is_transient_status(int status) {
    return status == 408 || status == 429 || (status >= 500 && status < 600);
  }

 private:
  static void split_url(const std::string& url, std::string& base, std::string& path) {
    const auto scheme_end = url.find("://");
    const std::size_t authority_begin =
        scheme_end == std::string::npos ? 0 : scheme_end + 3;
    const auto path_begin = url.find('/', authority_begin);
    if (path_begin == std::string::npos) {
      base = url;
      path = "/v1/chat/completions";
    } else {
      base = url.substr(0, path_begin);
      path = url.substr(path_begin);
    }
    if (base.empty()) throw ConfigError("live backend URL is empty");
  }

  static nlohmann::json make_payload(const Conversation& conversation,
                                     const CompletionParams& params) {
    nlohmann::json msgs = nlohmann::json::array();
    for (const auto& m : conversation) {
      msgs.push_back({{"role", to_string(m.role)}, {"content", m.content}});
    }
    return nlohmann::json{{"model", params.model_name},
                          {"messages", std::move(msgs)},
                          {"temperature", params.temperature},
                          {"max_tokens", params.max_output_tokens}};
  }

  static std::string parse_response(const std::string& body) {
    nlohmann::json j = nlohmann::json::parse(body, nullptr, false);
    if (j.is_object() && j.contains("choices") && j["choices"].is_array() &&
        !j["choices"].empty()) {
      const auto& first = j["choices"][0];
      if (first.contains("message") && first["message"].contains("content") &&
          first["message"]["content"].is_string()) {
        return first["message"]["content"].get<std::string>();
      }
    }
    throw BackendError("malformed chat-completions response: " + body);
  }

  LiveOptions options_;
  std::string base_;
  std::string path_;
};

}  // namespace longmt::gateway
