#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "vmark/http_client.hpp"
#include "vmark/mask_codec.hpp"
#include "vmark/subject_tagger.hpp"

namespace vmark {

/// One line of the mask wire format: a single instance of `tag` on one frame.
struct MaskRecord {
  std::string video_id;
  int frame_index = 0;  // 1-based source frame number
  Tag tag;
  InstanceMask mask;
};

/// Throws DataError naming the offending field.
MaskRecord mask_record_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MaskRecord& r);

struct Marker {
  InstanceMask region;
  Tag tag;
  int ordinal = 0;  // 1..n in listing order; keys the palette
};

struct FrameMarkers {
  int frame_index = 0;
  std::vector<Marker> semantic;
};

/// Frame handed to a segmentation backend: identity plus where the pixels live.
struct FrameRef {
  std::string video_id;
  int frame_index = 0;
  int height = 0;
  int width = 0;
  std::filesystem::path path;
};

class SegmentationBackend {
 public:
  virtual ~SegmentationBackend() = default;
  /// All instances the backend reports for `tag`, in emission order.
  virtual std::vector<InstanceMask> segment(const FrameRef& frame, const Tag& tag) = 0;
};

using MasksByTag = std::vector<std::pair<Tag, std::vector<InstanceMask>>>;

/// Every mask the backend returns for `tag`; nothing is pruned. Throws
/// DataError when a mask does not match the frame dimensions.
std::vector<InstanceMask> ground_tag(const FrameRef& frame, const Tag& tag, SegmentationBackend& backend);

/// Grounds each tag in order and assembles the frame's semantic markers.
FrameMarkers ground_frame(const FrameRef& frame, const TagList& tags, SegmentationBackend& backend);

/// Grounds many frames with at most `max_in_flight` concurrent backend
/// calls. Output order follows `frames`.
std::vector<FrameMarkers> ground_frames(const std::vector<FrameRef>& frames, const TagList& tags,
                                        SegmentationBackend& backend, int max_in_flight);

/// Union over tags in the given order, masks in backend order within a tag;
/// ordinals 1..n. Throws DataError on mixed dimensions.
FrameMarkers assemble_semantic_markers(int frame_index, const MasksByTag& masks_by_tag);

/// In-memory index over a newline-delimited mask file.
class MaskStore : public SegmentationBackend {
 public:
  /// Parses and validates every line; DataError carries "file:line".
  static MaskStore load(const std::filesystem::path& path);
  static MaskStore from_records(std::vector<MaskRecord> records);

  std::vector<InstanceMask> masks(const std::string& video_id, int frame_index, const Tag& tag) const;
  /// Tags of a video in order of first appearance in the file.
  TagList tags_of(const std::string& video_id) const;
  std::vector<int> frames_of(const std::string& video_id) const;
  size_t size() const { return records_.size(); }

  std::vector<InstanceMask> segment(const FrameRef& frame, const Tag& tag) override;

 private:
  std::vector<MaskRecord> records_;
  std::map<std::tuple<std::string, int, Tag>, std::vector<size_t>> index_;
  std::map<std::string, TagList> tag_order_;
};

/// Per-frame marker sets for one video, as a live backend would have
/// produced them. Tags follow `tag_order` when given (others are skipped),
/// else their first appearance in the file.
std::map<int, FrameMarkers> load_precomputed_masks(const std::filesystem::path& path, const std::string& video_id,
                                                   const std::optional<TagList>& tag_order = std::nullopt);

/// HTTP segmentation endpoint. Request body:
///   {"video_id", "frame_index", "tag", "height", "width", "image_path"
///    [, "image_b64" (binary PPM, base64)]}
/// Reply: a JSON array of mask records, or {"masks": [...]}.
class HttpSegmentationBackend : public SegmentationBackend {
 public:
  HttpSegmentationBackend(std::string url, HttpOptions options = {}, bool inline_images = false);

  std::vector<InstanceMask> segment(const FrameRef& frame, const Tag& tag) override;
  nlohmann::json request_body(const FrameRef& frame, const Tag& tag) const;

 private:
  Url url_;
  HttpOptions options_;
  bool inline_images_;
};

}  // namespace vmark
