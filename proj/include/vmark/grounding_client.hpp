#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "vmark/http_client.hpp"

namespace vmark {

enum class SpanUnit { frame, second };

struct TemporalSpan {
  double start = 0.0;
  double end = 0.0;
  SpanUnit unit = SpanUnit::second;
  friend bool operator==(const TemporalSpan&, const TemporalSpan&) = default;
};

struct HighlightPrediction {
  std::vector<std::pair<int, double>> entries;  // (clip index >= 0, saliency), unique clips
  friend bool operator==(const HighlightPrediction&, const HighlightPrediction&) = default;
};

enum class Task { moment_retrieval, highlight_detection };

Task parse_task(std::string_view name);
std::string_view to_string(Task t);

struct GroundingRequest {
  std::string item_id;
  std::vector<std::filesystem::path> frames;  // marked frames, in temporal order
  std::string prompt;
  Task task = Task::moment_retrieval;
};

inline constexpr std::string_view kMrTemplate = "During which frames can we see {query}?";
inline constexpr std::string_view kMrFormatInstruction =
    "Answer with the frame span in the form \"From x to y\".";
inline constexpr std::string_view kHdTemplate =
    "Which frames are the highlights for {query}? Answer as 'frame: score' pairs, scores 0-4.";

/// Literal substitution of the query into the moment-retrieval template,
/// followed by the answer-format instruction on a new line.
std::string build_mr_prompt(std::string_view query);
std::string build_hd_prompt(std::string_view query, std::string_view template_text = kHdTemplate);

/// First "From x to y" in the reply (case-insensitive, optional "frame"
/// words), clamped into [1, t_max] and swapped if reversed. Throws
/// ParseError carrying the reply when no pair is found.
TemporalSpan parse_mr_answer(std::string_view raw, int t_max);

/// (frame id, score) pairs in reply order; ids clamped to [1, n_frames],
/// first occurrence wins.
std::vector<std::pair<int, double>> parse_hd_pairs(std::string_view raw, int n_frames);

/// parse_hd_pairs mapped to clips with `frame_to_clip` (default: frame k ->
/// clip k-1); clip collisions keep the first entry. Empty when nothing
/// parses.
HighlightPrediction parse_hd_answer(std::string_view raw, int n_frames,
                                    const std::function<int(int)>& frame_to_clip = {});

class VideoLanguageModel {
 public:
  virtual ~VideoLanguageModel() = default;
  virtual std::string generate(const GroundingRequest& request) = 0;
};

/// Raw reply for `request`. Retriable transport failures are retried up to
/// `retries` more times; the final failure propagates as TransportError.
std::string ground(const GroundingRequest& request, VideoLanguageModel& endpoint, int retries = 2);

/// Chat-completion style multimodal endpoint: one user message whose
/// content lists every frame as an image_url part followed by the prompt.
class HttpVideoLanguageModel : public VideoLanguageModel {
 public:
  enum class ImageMode { file_url, data_url };

  HttpVideoLanguageModel(std::string url, std::string model, HttpOptions options = {},
                         ImageMode mode = ImageMode::file_url,
                         std::string reply_pointer = "/choices/0/message/content");

  std::string generate(const GroundingRequest& request) override;
  nlohmann::json request_body(const GroundingRequest& request) const;

 private:
  Url url_;
  std::string model_;
  HttpOptions options_;
  ImageMode mode_;
  std::string reply_pointer_;
};

/// Scripted endpoint backed by a sidecar file of {"item_id", "reply"} lines.
/// With jitter > 0 every integer of a "From x to y" reply is shifted by a
/// uniform offset in [-jitter, jitter] drawn from (seed, item_id).
class MockVideoLanguageModel : public VideoLanguageModel {
 public:
  explicit MockVideoLanguageModel(std::map<std::string, std::string> replies, int jitter = 0,
                                  std::uint64_t seed = 0);
  static MockVideoLanguageModel load(const std::filesystem::path& path, int jitter = 0, std::uint64_t seed = 0);

  std::string generate(const GroundingRequest& request) override;

 private:
  std::map<std::string, std::string> replies_;
  int jitter_;
  std::uint64_t seed_;
};

}  // namespace vmark
