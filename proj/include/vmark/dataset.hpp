#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "vmark/grounding_client.hpp"

namespace vmark {

/// Moment-retrieval item: one query with its gold span in seconds.
struct MrRecord {
  std::string item_id;
  std::string video_id;
  std::string query;
  double span_start_s = 0.0;
  double span_end_s = 0.0;
  std::optional<double> duration_s;
};

/// Highlight-detection item: gold saliency per clip index.
struct HdRecord {
  std::string item_id;
  std::string video_id;
  std::string query;
  std::vector<std::pair<int, double>> clips;
  std::optional<double> duration_s;
};

struct ImportIssue {
  int line = 0;
  std::string message;
};

struct CharadesImport {
  std::vector<MrRecord> records;
  std::vector<ImportIssue> issues;  // malformed lines, skipped
};

/// Lines "video start end##sentence". Item ids are "<video>_<line index>"
/// with the 0-based line index zero-padded to six digits.
CharadesImport import_charades_sta(const std::filesystem::path& path);
CharadesImport parse_charades_sta(std::istream& in);

MrRecord mr_record_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MrRecord& r);
HdRecord hd_record_from_json(const nlohmann::json& j);
nlohmann::json to_json(const HdRecord& r);

/// Newline-delimited canonical records; DataError carries "file:line".
std::vector<MrRecord> load_mr_records(const std::filesystem::path& path);
std::vector<HdRecord> load_hd_records(const std::filesystem::path& path);
void write_mr_records(const std::filesystem::path& path, const std::vector<MrRecord>& records);
void write_hd_records(const std::filesystem::path& path, const std::vector<HdRecord>& records);

/// Lines "video_id fps"; '#' starts a comment.
std::map<std::string, double> load_fps_map(const std::filesystem::path& path);

struct SampledFrame {
  int index = 0;          // 1..N, the number drawn on the frame
  double timestamp_s = 0;  // (index - 0.5) * D / N
  int source_frame = 0;    // 1-based frame number in the source directory
};
using SamplingMap = std::vector<SampledFrame>;

/// Stratified-midpoint sampling of N frames from a video of `frame_count`
/// frames at `fps`. Source frame = floor(t * fps) + 1, computed exactly.
SamplingMap sample_frames(int frame_count, double fps, int n);

/// Frame-unit span to seconds via the sampled timestamps; indices are
/// clamped into [1, N].
TemporalSpan frames_to_seconds(const TemporalSpan& span, const SamplingMap& map);

}  // namespace vmark
