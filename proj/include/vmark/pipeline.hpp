#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vmark/dataset.hpp"
#include "vmark/grounding_client.hpp"
#include "vmark/marker_renderer.hpp"
#include "vmark/mask_bridge.hpp"
#include "vmark/subject_tagger.hpp"
#include "vmark/vtg_metrics.hpp"

namespace vmark {

enum class DatasetFormat { charades, canonical };
enum class TaggerMode { rules, lm };

DatasetFormat parse_dataset_format(std::string_view name);
TaggerMode parse_tagger_mode(std::string_view name);

struct RunConfig {
  Task task = Task::moment_retrieval;

  std::filesystem::path annotations;
  DatasetFormat format = DatasetFormat::canonical;
  std::filesystem::path frame_root;  // <frame_root>/<video_id>/000001.ppm ...
  std::optional<std::filesystem::path> fps_map;
  double default_fps = 30.0;
  int num_frames = 64;

  StyleConfig style;
  TaggerMode tagger = TaggerMode::rules;
  TagStrategy tag_strategy = TagStrategy::subject_nouns;
  int tag_budget = kDefaultTagBudget;
  std::string lm_url;
  std::string lm_model;

  // Exactly one mask source.
  std::optional<std::filesystem::path> mask_file;
  std::string seg_url;
  bool seg_inline_images = false;

  // Exactly one Vid-LLM source.
  std::optional<std::filesystem::path> mock_replies;
  int mock_jitter = 0;
  std::string vidllm_url;
  std::string vidllm_model;
  bool vidllm_inline_images = false;
  std::string hd_prompt_template = std::string(kHdTemplate);

  std::filesystem::path output_root = "vmark_out";
  int workers = 4;
  int max_in_flight = 4;
  int retries = 2;
  std::uint64_t seed = 0;
  double clip_seconds = 2.0;
  HdOptions hd;
  std::optional<int> limit;  // process at most this many pending items
  bool resume = true;
  HttpOptions http;

  /// Throws ConfigError.
  void validate() const;
};

struct Backends {
  std::shared_ptr<SegmentationBackend> segmentation;
  std::shared_ptr<VideoLanguageModel> vidllm;
  std::shared_ptr<CachingTagExtractor> lm_tagger;  // only in lm tagger mode
};

Backends make_backends(const RunConfig& config);

/// One dataset item in task-neutral form.
struct DatasetItem {
  std::string item_id;
  std::string video_id;
  std::string query;
  std::optional<MrRecord> mr;
  std::optional<HdRecord> hd;
};

/// Loads the annotation file for the configured task, sorted by item_id.
/// Malformed Charades lines are reported on `issues` when given.
std::vector<DatasetItem> load_dataset(const RunConfig& config, std::vector<ImportIssue>* issues = nullptr);

double video_fps(const RunConfig& config, const std::string& video_id);

struct MarkedItem {
  TagList tags;
  SamplingMap sampling;
  std::vector<FrameMarkers> markers;  // one per sampled frame
  std::vector<Frame> frames;          // rendered, one per sampled frame
  int n_markers = 0;          // semantic markers over all sampled frames
};

/// Tagging, grounding and rendering for one item.
MarkedItem markerize_item(const RunConfig& config, Backends& backends, const DatasetItem& item);

struct RunSummary {
  EvalReport report;
  int n_dataset_items = 0;
  int n_processed = 0;  // this invocation
  int n_resumed = 0;    // already present in the record file
  int n_failed = 0;     // this invocation, scored as parse errors
  int n_transport_failures = 0;
};

/// Runs every pending item and (re)writes records.ndjson, report.json and
/// report.txt under output_root. Never aborts on a single item.
RunSummary run_pipeline(const RunConfig& config, Backends& backends);
RunSummary run_pipeline(const RunConfig& config);

/// Scores a record file; shared by run_pipeline and the CLI.
EvalReport score_records(const std::vector<nlohmann::json>& records, const RunConfig& config);

/// Writes `k` evenly spaced marked frames of one item to `out_dir`.
std::vector<std::filesystem::path> emit_preview(const RunConfig& config, Backends& backends,
                                                const DatasetItem& item, int k,
                                                const std::filesystem::path& out_dir);

}  // namespace vmark
