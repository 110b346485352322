#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace longmt {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration value or invalid operation bounds.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Live backend gave up (retries exhausted or a non-retryable HTTP failure).
class BackendError : public Error {
 public:
  using Error::Error;
};

// Scripted backend had no entry for the requested (role_tag, turn) key.
class FixtureMissError : public BackendError {
 public:
  using BackendError::BackendError;
};

// Model output could not be parsed into the required structure.
// Carries the raw model text so callers can log or retry with it.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what, std::string raw = {})
      : Error(what), raw_(std::move(raw)) {}

  const std::string& raw() const noexcept { return raw_; }

 private:
  std::string raw_;
};

// Structured payload parsed fine but violated a contract (range, type, key).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// An agent returned something unusable (e.g. an empty translation).
class AgentError : public Error {
 public:
  using Error::Error;
};

// Filesystem trouble: unreadable input, failed rename, malformed JSONL line.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace longmt
