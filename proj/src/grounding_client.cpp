#include "vmark/grounding_client.hpp"

#include <algorithm>
#include <fstream>
#include <random>
#include <regex>
#include <set>
#include <thread>

#include "vmark/errors.hpp"

namespace vmark {

Task parse_task(std::string_view name) {
  if (name == "mr" || name == "moment_retrieval") return Task::moment_retrieval;
  if (name == "hd" || name == "highlight_detection") return Task::highlight_detection;
  throw ConfigError("unknown task: " + std::string(name));
}

std::string_view to_string(Task t) { return t == Task::moment_retrieval ? "mr" : "hd"; }

namespace {

std::string substitute(std::string_view tmpl, std::string_view query) {
  std::string out(tmpl);
  const size_t at = out.find("{query}");
  if (at == std::string::npos) throw ConfigError("prompt template lacks {query}");
  out.replace(at, 7, query);
  return out;
}

// Saturating parse of an unsigned decimal string.
long long to_number(const std::string& digits) {
  long long v = 0;
  for (char c : digits) {
    if (c < '0' || c > '9') continue;
    v = v * 10 + (c - '0');
    if (v > 1'000'000'000) return 1'000'000'000;
  }
  return v;
}

int clamp_id(long long v, int hi) { return static_cast<int>(std::clamp<long long>(v, 1, hi)); }

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

const std::regex& mr_pattern() {
  static const std::regex re(R"(from\s+(?:frames?\s*)?(-?\d+)\s*(?:to|-|until|through)\s*(?:frames?\s*)?(-?\d+))",
                             std::regex::icase);
  return re;
}

}  // namespace

std::string build_mr_prompt(std::string_view query) {
  return substitute(kMrTemplate, query) + "\n" + std::string(kMrFormatInstruction);
}

std::string build_hd_prompt(std::string_view query, std::string_view template_text) {
  return substitute(template_text, query);
}

TemporalSpan parse_mr_answer(std::string_view raw, int t_max) {
  if (t_max < 1) throw InputError("t_max must be positive");
  std::match_results<std::string_view::const_iterator> m;
  if (!std::regex_search(raw.begin(), raw.end(), m, mr_pattern())) {
    throw ParseError("no \"From x to y\" span in reply", std::string(raw));
  }
  auto value = [&](int g) {
    const std::string s = m[g].str();
    return s.starts_with('-') ? 1 : clamp_id(to_number(s), t_max);
  };
  int x = value(1), y = value(2);
  if (x > y) std::swap(x, y);
  return {static_cast<double>(x), static_cast<double>(y), SpanUnit::frame};
}

std::vector<std::pair<int, double>> parse_hd_pairs(std::string_view raw, int n_frames) {
  if (n_frames < 1) throw InputError("frame count must be positive");
  static const std::regex re(R"((\d+)\s*[:=]\s*(-?\d+(?:\.\d+)?))");
  std::vector<std::pair<int, double>> out;
  std::set<int> seen;
  for (std::regex_iterator<std::string_view::const_iterator> it(raw.begin(), raw.end(), re), end; it != end;
       ++it) {
    const int id = clamp_id(to_number((*it)[1].str()), n_frames);
    if (!seen.insert(id).second) continue;
    out.emplace_back(id, std::stod((*it)[2].str()));
  }
  return out;
}

HighlightPrediction parse_hd_answer(std::string_view raw, int n_frames,
                                    const std::function<int(int)>& frame_to_clip) {
  HighlightPrediction pred;
  std::set<int> seen;
  for (const auto& [frame, score] : parse_hd_pairs(raw, n_frames)) {
    const int clip = frame_to_clip ? frame_to_clip(frame) : frame - 1;
    if (seen.insert(clip).second) pred.entries.emplace_back(clip, score);
  }
  return pred;
}

std::string ground(const GroundingRequest& request, VideoLanguageModel& endpoint, int retries) {
  for (int attempt = 0;; ++attempt) {
    try {
      return endpoint.generate(request);
    } catch (const TransportError& e) {
      if (!e.retriable() || attempt >= retries) throw;
    }
  }
}

HttpVideoLanguageModel::HttpVideoLanguageModel(std::string url, std::string model, HttpOptions options,
                                               ImageMode mode, std::string reply_pointer)
    : url_(parse_url(url)),
      model_(std::move(model)),
      options_(std::move(options)),
      mode_(mode),
      reply_pointer_(std::move(reply_pointer)) {}

nlohmann::json HttpVideoLanguageModel::request_body(const GroundingRequest& request) const {
  nlohmann::json content = nlohmann::json::array();
  for (const auto& path : request.frames) {
    std::string url;
    if (mode_ == ImageMode::file_url) {
      url = "file://" + std::filesystem::absolute(path).string();
    } else {
      std::ifstream in(path, std::ios::binary);
      if (!in) throw DataError("cannot read frame " + path.string());
      const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), {});
      url = "data:image/x-portable-pixmap;base64," + base64_encode(bytes);
    }
    content.push_back({{"type", "image_url"}, {"image_url", {{"url", url}}}});
  }
  content.push_back({{"type", "text"}, {"text", request.prompt}});
  return {{"model", model_},
          {"temperature", 0},
          {"messages", nlohmann::json::array({{{"role", "user"}, {"content", content}}})}};
}

std::string HttpVideoLanguageModel::generate(const GroundingRequest& request) {
  return string_at(post_json(url_, request_body(request), options_), reply_pointer_);
}

MockVideoLanguageModel::MockVideoLanguageModel(std::map<std::string, std::string> replies, int jitter,
                                               std::uint64_t seed)
    : replies_(std::move(replies)), jitter_(jitter), seed_(seed) {
  if (jitter_ < 0) throw ConfigError("mock jitter must be non-negative");
}

MockVideoLanguageModel MockVideoLanguageModel::load(const std::filesystem::path& path, int jitter,
                                                    std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open mock replies " + path.string());
  std::map<std::string, std::string> replies;
  std::string line;
  for (int n = 1; std::getline(in, line); ++n) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      replies[j.at("item_id").get<std::string>()] = j.at("reply").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return MockVideoLanguageModel(std::move(replies), jitter, seed);
}

std::string MockVideoLanguageModel::generate(const GroundingRequest& request) {
  const auto it = replies_.find(request.item_id);
  if (it == replies_.end()) throw TransportError("mock has no reply for " + request.item_id, false);
  if (jitter_ == 0) return it->second;
  std::match_results<std::string::const_iterator> m;
  if (!std::regex_search(it->second, m, mr_pattern())) return it->second;
  std::mt19937_64 rng(seed_ ^ fnv1a(request.item_id));
  std::uniform_int_distribution<int> shift(-jitter_, jitter_);
  const long long x = std::stoll(m[1].str()) + shift(rng);
  const long long y = std::stoll(m[2].str()) + shift(rng);
  return m.prefix().str() + "From " + std::to_string(x) + " to " + std::to_string(y) + m.suffix().str();
}

}  // namespace vmark
