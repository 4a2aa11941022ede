#include "vmark/mask_bridge.hpp"

#include <fstream>

#include "vmark/errors.hpp"
#include "vmark/frame.hpp"
#include "vmark/parallel.hpp"

namespace vmark {

namespace {

template <typename T>
T required(const nlohmann::json& j, const char* field) {
  if (!j.contains(field)) throw DataError(std::string("missing field '") + field + "'");
  try {
    return j.at(field).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw DataError(std::string("field '") + field + "' has the wrong type");
  }
}

}  // namespace

MaskRecord mask_record_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DataError("mask record is not a JSON object");
  MaskRecord r;
  r.video_id = required<std::string>(j, "video_id");
  r.frame_index = required<int>(j, "frame_index");
  if (r.frame_index < 1) throw DataError("frame_index must be >= 1");
  r.tag = required<std::string>(j, "tag");
  if (r.tag.empty()) throw DataError("tag must be non-empty");
  r.mask.height = required<int>(j, "height");
  r.mask.width = required<int>(j, "width");
  const auto& counts = j.contains("rle_counts") ? j.at("rle_counts") : nlohmann::json();
  if (!counts.is_array()) throw DataError("field 'rle_counts' must be an array");
  r.mask.runs.reserve(counts.size());
  for (const auto& c : counts) {
    if (!c.is_number_unsigned() && !(c.is_number_integer() && c.get<long long>() >= 0)) {
      throw DataError("rle_counts entries must be non-negative integers");
    }
    r.mask.runs.push_back(c.get<std::uint32_t>());
  }
  if (j.contains("score") && !j.at("score").is_null()) {
    if (!j.at("score").is_number()) throw DataError("field 'score' must be a number or null");
    r.mask.score = j.at("score").get<double>();
  }
  r.mask.validate();
  return r;
}

nlohmann::json to_json(const MaskRecord& r) {
  nlohmann::json j = {
      {"video_id", r.video_id}, {"frame_index", r.frame_index}, {"tag", r.tag},
      {"height", r.mask.height}, {"width", r.mask.width},       {"rle_counts", r.mask.runs},
  };
  j["score"] = r.mask.score ? nlohmann::json(*r.mask.score) : nlohmann::json(nullptr);
  return j;
}

std::vector<InstanceMask> ground_tag(const FrameRef& frame, const Tag& tag, SegmentationBackend& backend) {
  std::vector<InstanceMask> masks = backend.segment(frame, tag);
  for (const InstanceMask& m : masks) {
    m.validate();
    if (frame.height > 0 && (m.height != frame.height || m.width != frame.width)) {
      throw DataError("mask " + std::to_string(m.height) + "x" + std::to_string(m.width) + " for tag '" + tag +
                      "' does not match frame " + std::to_string(frame.height) + "x" + std::to_string(frame.width) +
                      " (" + frame.video_id + " #" + std::to_string(frame.frame_index) + ")");
    }
  }
  return masks;
}

FrameMarkers assemble_semantic_markers(int frame_index, const MasksByTag& masks_by_tag) {
  FrameMarkers out;
  out.frame_index = frame_index;
  int ordinal = 0;
  const InstanceMask* first = nullptr;
  for (const auto& [tag, masks] : masks_by_tag) {
    for (const InstanceMask& m : masks) {
      if (first && (m.height != first->height || m.width != first->width)) {
        throw DataError("frame " + std::to_string(frame_index) + " mixes mask dimensions");
      }
      if (!first) first = &m;
      out.semantic.push_back({m, tag, ++ordinal});
    }
  }
  return out;
}

FrameMarkers ground_frame(const FrameRef& frame, const TagList& tags, SegmentationBackend& backend) {
  MasksByTag by_tag;
  by_tag.reserve(tags.size());
  for (const Tag& tag : tags) by_tag.emplace_back(tag, ground_tag(frame, tag, backend));
  return assemble_semantic_markers(frame.frame_index, by_tag);
}

std::vector<FrameMarkers> ground_frames(const std::vector<FrameRef>& frames, const TagList& tags,
                                        SegmentationBackend& backend, int max_in_flight) {
  // One slot per (frame, tag) request; assembly is a sequential fold per frame.
  const size_t per_frame = tags.size();
  std::vector<std::vector<InstanceMask>> slots(frames.size() * per_frame);
  parallel_for(slots.size(), max_in_flight, [&](size_t i) {
    slots[i] = ground_tag(frames[i / per_frame], tags[i % per_frame], backend);
  });
  std::vector<FrameMarkers> out;
  out.reserve(frames.size());
  for (size_t f = 0; f < frames.size(); ++f) {
    MasksByTag by_tag;
    for (size_t t = 0; t < per_frame; ++t) by_tag.emplace_back(tags[t], std::move(slots[f * per_frame + t]));
    out.push_back(assemble_semantic_markers(frames[f].frame_index, by_tag));
  }
  return out;
}

MaskStore MaskStore::from_records(std::vector<MaskRecord> records) {
  MaskStore store;
  store.records_ = std::move(records);
  for (size_t i = 0; i < store.records_.size(); ++i) {
    const MaskRecord& r = store.records_[i];
    store.index_[{r.video_id, r.frame_index, r.tag}].push_back(i);
    TagList& order = store.tag_order_[r.video_id];
    if (std::find(order.begin(), order.end(), r.tag) == order.end()) order.push_back(r.tag);
  }
  return store;
}

MaskStore MaskStore::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open mask file " + path.string());
  std::vector<MaskRecord> records;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = nlohmann::json::parse(line);
      records.push_back(mask_record_from_json(j));
    } catch (const nlohmann::json::parse_error& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": invalid JSON: " + e.what());
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return from_records(std::move(records));
}

std::vector<InstanceMask> MaskStore::masks(const std::string& video_id, int frame_index, const Tag& tag) const {
  std::vector<InstanceMask> out;
  if (auto it = index_.find({video_id, frame_index, tag}); it != index_.end()) {
    for (size_t i : it->second) out.push_back(records_[i].mask);
  }
  return out;
}

TagList MaskStore::tags_of(const std::string& video_id) const {
  auto it = tag_order_.find(video_id);
  return it == tag_order_.end() ? TagList{} : it->second;
}

std::vector<int> MaskStore::frames_of(const std::string& video_id) const {
  std::vector<int> frames;
  for (const auto& [key, _] : index_) {
    if (std::get<0>(key) == video_id) frames.push_back(std::get<1>(key));
  }
  std::sort(frames.begin(), frames.end());
  frames.erase(std::unique(frames.begin(), frames.end()), frames.end());
  return frames;
}

std::vector<InstanceMask> MaskStore::segment(const FrameRef& frame, const Tag& tag) {
  return masks(frame.video_id, frame.frame_index, tag);
}

std::map<int, FrameMarkers> load_precomputed_masks(const std::filesystem::path& path, const std::string& video_id,
                                                   const std::optional<TagList>& tag_order) {
  const MaskStore store = MaskStore::load(path);
  const TagList tags = tag_order ? *tag_order : store.tags_of(video_id);
  std::map<int, FrameMarkers> out;
  for (int frame : store.frames_of(video_id)) {
    MasksByTag by_tag;
    for (const Tag& tag : tags) by_tag.emplace_back(tag, store.masks(video_id, frame, tag));
    out.emplace(frame, assemble_semantic_markers(frame, by_tag));
  }
  return out;
}

HttpSegmentationBackend::HttpSegmentationBackend(std::string url, HttpOptions options, bool inline_images)
    : url_(parse_url(url)), options_(std::move(options)), inline_images_(inline_images) {}

nlohmann::json HttpSegmentationBackend::request_body(const FrameRef& frame, const Tag& tag) const {
  nlohmann::json body = {
      {"video_id", frame.video_id}, {"frame_index", frame.frame_index}, {"tag", tag},
      {"height", frame.height},     {"width", frame.width},             {"image_path", frame.path.string()},
  };
  if (inline_images_) {
    const std::string ppm = encode_ppm(read_ppm(frame.path));
    body["image_b64"] = base64_encode(
        std::span(reinterpret_cast<const std::uint8_t*>(ppm.data()), ppm.size()));
  }
  return body;
}

std::vector<InstanceMask> HttpSegmentationBackend::segment(const FrameRef& frame, const Tag& tag) {
  const nlohmann::json reply = post_json(url_, request_body(frame, tag), options_);
  const nlohmann::json* list = &reply;
  if (reply.is_object() && reply.contains("masks")) list = &reply.at("masks");
  if (!list->is_array()) throw DataError("segmentation reply is not a list of mask records");
  std::vector<InstanceMask> masks;
  size_t i = 0;
  for (const auto& item : *list) {
    try {
      masks.push_back(mask_record_from_json(item).mask);
    } catch (const DataError& e) {
      throw DataError("segmentation reply record " + std::to_string(i) + ": " + e.what());
    }
    ++i;
  }
  return masks;
}

}  // namespace vmark
