#pragma once

#include <stdexcept>
#include <string>

namespace vmark {

// Error categories map onto CLI exit codes: config 2, data 3, backend 4.

class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an HTTP backend cannot be reached or answers with a
/// non-success status. `retriable()` is false for 4xx replies.
class TransportError : public std::runtime_error {
 public:
  TransportError(const std::string& what, bool retriable = true)
      : std::runtime_error(what), retriable_(retriable) {}
  bool retriable() const noexcept { return retriable_; }

 private:
  bool retriable_;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::string raw)
      : std::runtime_error(what), raw_(std::move(raw)) {}
  const std::string& raw() const noexcept { return raw_; }

 private:
  std::string raw_;
};

}  // namespace vmark
