#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "vmark/subject_tagger.hpp"

namespace vmark {

/// Environment variable holding the bearer token sent to every endpoint.
inline constexpr const char* kApiKeyEnv = "VMARK_API_KEY";

struct HttpOptions {
  double timeout_seconds = 120.0;
  int retries = 2;  // extra attempts after the first, transport failures only
  int retry_backoff_ms = 250;
  std::string bearer_token;  // empty: taken from kApiKeyEnv if set
};

struct Url {
  std::string scheme;  // "http" or "https"
  std::string host;
  int port = 80;
  std::string path;  // always starts with '/'

  std::string origin() const;
};

/// Throws ConfigError on anything but http(s)://host[:port][/path].
Url parse_url(std::string_view url);

/// POSTs `body` as JSON and returns the parsed JSON reply. Connection
/// failures and 5xx replies are retried; 4xx replies and unparsable bodies
/// throw immediately. Throws TransportError.
nlohmann::json post_json(const Url& url, const nlohmann::json& body, const HttpOptions& options);

std::string base64_encode(std::span<const std::uint8_t> bytes);

/// Reads a JSON value at `pointer` (RFC 6901) and requires it to be a string.
std::string string_at(const nlohmann::json& reply, const std::string& pointer);

/// OpenAI-style chat completion endpoint used for tag extraction. Sends
/// temperature 0 and returns the text at `reply_pointer`.
class HttpChatModel : public LanguageModel {
 public:
  HttpChatModel(std::string url, std::string model, HttpOptions options = {},
                std::string reply_pointer = "/choices/0/message/content");

  std::string complete(std::string_view system_message, std::string_view user_message) override;

  /// Request body for the given messages; exposed for wire-format tests.
  nlohmann::json request_body(std::string_view system_message, std::string_view user_message) const;

 private:
  Url url_;
  std::string model_;
  HttpOptions options_;
  std::string reply_pointer_;
};

}  // namespace vmark
