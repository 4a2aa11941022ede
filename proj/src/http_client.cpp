#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "vmark/http_client.hpp"

#include <httplib.h>

#include <chrono>
#include <cstdlib>
#include <thread>

#include "vmark/errors.hpp"

namespace vmark {

std::string Url::origin() const { return scheme + "://" + host + ":" + std::to_string(port); }

Url parse_url(std::string_view url) {
  Url u;
  const size_t sep = url.find("://");
  if (sep == std::string_view::npos) throw ConfigError("endpoint URL lacks a scheme: " + std::string(url));
  u.scheme = std::string(url.substr(0, sep));
  if (u.scheme != "http" && u.scheme != "https") {
    throw ConfigError("unsupported URL scheme: " + u.scheme);
  }
  std::string_view rest = url.substr(sep + 3);
  const size_t slash = rest.find('/');
  std::string_view authority = rest.substr(0, slash);
  u.path = slash == std::string_view::npos ? "/" : std::string(rest.substr(slash));
  u.port = u.scheme == "https" ? 443 : 80;
  if (const size_t colon = authority.rfind(':'); colon != std::string_view::npos) {
    const std::string port(authority.substr(colon + 1));
    try {
      size_t used = 0;
      u.port = std::stoi(port, &used);
      if (used != port.size() || u.port <= 0 || u.port > 65535) throw std::out_of_range(port);
    } catch (const std::exception&) {
      throw ConfigError("bad port in URL: " + std::string(url));
    }
    authority = authority.substr(0, colon);
  }
  if (authority.empty()) throw ConfigError("URL has no host: " + std::string(url));
  u.host = std::string(authority);
  return u;
}

namespace {

std::string resolve_token(const HttpOptions& options) {
  if (!options.bearer_token.empty()) return options.bearer_token;
  if (const char* env = std::getenv(kApiKeyEnv)) return env;
  return {};
}

}  // namespace

nlohmann::json post_json(const Url& url, const nlohmann::json& body, const HttpOptions& options) {
  httplib::Client client(url.origin());
  const auto timeout = std::chrono::duration<double>(options.timeout_seconds);
  client.set_connection_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_read_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  client.set_write_timeout(std::chrono::duration_cast<std::chrono::microseconds>(timeout));
  httplib::Headers headers;
  if (const std::string token = resolve_token(options); !token.empty()) {
    headers.emplace("Authorization", "Bearer " + token);
  }
  const std::string payload = body.dump();

  std::string last_error;
  for (int attempt = 0; attempt <= options.retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(options.retry_backoff_ms * attempt));
    auto res = client.Post(url.path, headers, payload, "application/json");
    if (!res) {
      last_error = "POST " + url.origin() + url.path + " failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "POST " + url.path + " returned HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status >= 400) {
      throw TransportError("POST " + url.path + " returned HTTP " + std::to_string(res->status) + ": " +
                               res->body.substr(0, 200),
                           false);
    }
    auto parsed = nlohmann::json::parse(res->body, nullptr, false);
    if (parsed.is_discarded()) {
      throw TransportError("POST " + url.path + " returned a non-JSON body", false);
    }
    return parsed;
  }
  throw TransportError(last_error);
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  static constexpr char kAlphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  size_t i = 0;
  for (; i + 2 < bytes.size(); i += 3) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += kAlphabet[v & 63];
  }
  if (i + 1 == bytes.size()) {
    const std::uint32_t v = bytes[i] << 16;
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += "==";
  } else if (i + 2 == bytes.size()) {
    const std::uint32_t v = (bytes[i] << 16) | (bytes[i + 1] << 8);
    out += kAlphabet[(v >> 18) & 63];
    out += kAlphabet[(v >> 12) & 63];
    out += kAlphabet[(v >> 6) & 63];
    out += '=';
  }
  return out;
}

std::string string_at(const nlohmann::json& reply, const std::string& pointer) {
  try {
    const auto& v = reply.at(nlohmann::json::json_pointer(pointer));
    if (!v.is_string()) throw TransportError("reply field " + pointer + " is not a string", false);
    return v.get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw TransportError("reply lacks field " + pointer, false);
  }
}

HttpChatModel::HttpChatModel(std::string url, std::string model, HttpOptions options, std::string reply_pointer)
    : url_(parse_url(url)),
      model_(std::move(model)),
      options_(std::move(options)),
      reply_pointer_(std::move(reply_pointer)) {}

nlohmann::json HttpChatModel::request_body(std::string_view system_message, std::string_view user_message) const {
  return {
      {"model", model_},
      {"temperature", 0},
      {"messages",
       nlohmann::json::array({{{"role", "system"}, {"content", std::string(system_message)}},
                              {{"role", "user"}, {"content", std::string(user_message)}}})},
  };
}

std::string HttpChatModel::complete(std::string_view system_message, std::string_view user_message) {
  return string_at(post_json(url_, request_body(system_message, user_message), options_), reply_pointer_);
}

}  // namespace vmark
