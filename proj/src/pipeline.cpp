#include "vmark/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <set>

#include "vmark/errors.hpp"
#include "vmark/parallel.hpp"

namespace vmark {

namespace fs = std::filesystem;

DatasetFormat parse_dataset_format(std::string_view name) {
  if (name == "charades") return DatasetFormat::charades;
  if (name == "canonical") return DatasetFormat::canonical;
  throw ConfigError("unknown dataset format: " + std::string(name));
}

TaggerMode parse_tagger_mode(std::string_view name) {
  if (name == "rules") return TaggerMode::rules;
  if (name == "lm") return TaggerMode::lm;
  throw ConfigError("unknown tagger mode: " + std::string(name));
}

void RunConfig::validate() const {
  if (annotations.empty()) throw ConfigError("no annotation file configured");
  if (frame_root.empty()) throw ConfigError("no frame root configured");
  if (num_frames < 1) throw ConfigError("num_frames must be positive");
  if (!(default_fps > 0)) throw ConfigError("default fps must be positive");
  if (tag_budget < 1) throw ConfigError("tag budget must be positive");
  if (workers < 1 || max_in_flight < 1) throw ConfigError("worker counts must be positive");
  if (retries < 0) throw ConfigError("retries must be non-negative");
  if (!(clip_seconds > 0)) throw ConfigError("clip_seconds must be positive");
  if (limit && *limit < 0) throw ConfigError("limit must be non-negative");
  if (task == Task::highlight_detection && format == DatasetFormat::charades) {
    throw ConfigError("Charades annotations carry no highlight labels");
  }
  if (mask_file.has_value() == !seg_url.empty()) {
    throw ConfigError("configure exactly one mask source (mask file or segmentation URL)");
  }
  if (mock_replies.has_value() == !vidllm_url.empty()) {
    throw ConfigError("configure exactly one Vid-LLM source (mock replies or endpoint URL)");
  }
  if (tagger == TaggerMode::lm && lm_url.empty()) throw ConfigError("lm tagger needs an endpoint URL");
  style.validate();
}

Backends make_backends(const RunConfig& config) {
  Backends b;
  if (config.mask_file) {
    b.segmentation = std::make_shared<MaskStore>(MaskStore::load(*config.mask_file));
  } else {
    b.segmentation = std::make_shared<HttpSegmentationBackend>(config.seg_url, config.http, config.seg_inline_images);
  }
  if (config.mock_replies) {
    b.vidllm = std::make_shared<MockVideoLanguageModel>(
        MockVideoLanguageModel::load(*config.mock_replies, config.mock_jitter, config.seed));
  } else {
    HttpOptions http = config.http;
    http.retries = 0;  // ground() owns the retry loop
    b.vidllm = std::make_shared<HttpVideoLanguageModel>(
        config.vidllm_url, config.vidllm_model, http,
        config.vidllm_inline_images ? HttpVideoLanguageModel::ImageMode::data_url
                                    : HttpVideoLanguageModel::ImageMode::file_url);
  }
  if (config.tagger == TaggerMode::lm) {
    b.lm_tagger = std::make_shared<CachingTagExtractor>(
        std::make_shared<HttpChatModel>(config.lm_url, config.lm_model, config.http), true);
  }
  return b;
}

std::vector<DatasetItem> load_dataset(const RunConfig& config, std::vector<ImportIssue>* issues) {
  std::vector<DatasetItem> items;
  if (config.task == Task::moment_retrieval) {
    std::vector<MrRecord> records;
    if (config.format == DatasetFormat::charades) {
      auto imported = import_charades_sta(config.annotations);
      records = std::move(imported.records);
      if (issues) *issues = std::move(imported.issues);
    } else {
      records = load_mr_records(config.annotations);
    }
    for (auto& r : records) items.push_back({r.item_id, r.video_id, r.query, r, std::nullopt});
  } else {
    for (auto& r : load_hd_records(config.annotations)) {
      items.push_back({r.item_id, r.video_id, r.query, std::nullopt, r});
    }
  }
  std::sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.item_id < b.item_id; });
  for (size_t i = 1; i < items.size(); ++i) {
    if (items[i].item_id == items[i - 1].item_id) throw DataError("duplicate item_id " + items[i].item_id);
  }
  return items;
}

double video_fps(const RunConfig& config, const std::string& video_id) {
  if (config.fps_map) {
    static std::mutex mu;
    static std::map<fs::path, std::map<std::string, double>> cache;
    std::lock_guard lock(mu);
    auto it = cache.find(*config.fps_map);
    if (it == cache.end()) it = cache.emplace(*config.fps_map, load_fps_map(*config.fps_map)).first;
    if (const auto f = it->second.find(video_id); f != it->second.end()) return f->second;
  }
  return config.default_fps;
}

MarkedItem markerize_item(const RunConfig& config, Backends& backends, const DatasetItem& item) {
  MarkedItem out;
  if (config.tagger == TaggerMode::lm && config.tag_strategy != TagStrategy::none) {
    out.tags = backends.lm_tagger->extract(item.query, config.tag_budget);
  } else {
    out.tags = extract_tags(item.query, config.tag_budget, config.tag_strategy);
  }

  const fs::path dir = config.frame_root / item.video_id;
  const int count = count_frames(dir);
  if (count == 0) throw DataError("no frames found in " + dir.string());
  out.sampling = sample_frames(count, video_fps(config, item.video_id), config.num_frames);

  std::vector<Frame> source;
  std::vector<FrameRef> refs;
  for (const auto& s : out.sampling) {
    const fs::path path = dir / frame_file_name(s.source_frame);
    source.push_back(read_ppm(path));
    refs.push_back({item.video_id, s.source_frame, source.back().height(), source.back().width(), path});
  }

  auto& markers = out.markers;
  if (config.style.semantic_markers && !out.tags.empty()) {
    markers = ground_frames(refs, out.tags, *backends.segmentation, config.max_in_flight);
  } else {
    markers.resize(refs.size());
    for (size_t i = 0; i < refs.size(); ++i) markers[i].frame_index = refs[i].frame_index;
  }
  for (size_t i = 0; i < markers.size(); ++i) {
    out.n_markers += static_cast<int>(markers[i].semantic.size());
    out.frames.push_back(render_frame(source[i], markers[i], out.sampling[i].index, config.style));
  }
  return out;
}

namespace {

nlohmann::json style_to_json(const StyleConfig& s) {
  auto rgb = [](Rgb c) { return nlohmann::json::array({c.r, c.g, c.b}); };
  nlohmann::json palette = nlohmann::json::array(), contour = nlohmann::json::array();
  for (Rgb c : s.palette) palette.push_back(rgb(c));
  for (Rgb c : s.contour_palette) contour.push_back(rgb(c));
  return {{"semantic_markers", s.semantic_markers},
          {"alpha", s.alpha},
          {"beta", s.beta},
          {"contour_width", s.contour_width},
          {"palette", palette},
          {"contour_palette", contour},
          {"font_height", s.font_height},
          {"text_color", rgb(s.text_color)},
          {"draw_index", s.draw_index},
          {"index_position", std::string(to_string(s.index_position))},
          {"index_font_height", s.index_font_height},
          {"index_color", rgb(s.index_color)}};
}

nlohmann::json clips_json(const std::vector<std::pair<int, double>>& clips) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& [c, s] : clips) a.push_back({c, s});
  return a;
}

std::vector<std::pair<int, double>> clips_from(const nlohmann::json& a) {
  std::vector<std::pair<int, double>> out;
  for (const auto& c : a) out.emplace_back(c.at(0).get<int>(), c.at(1).get<double>());
  return out;
}

struct Outcome {
  nlohmann::json record;
  bool failed = false;
  bool transport = false;
};

Outcome process_item(const RunConfig& config, Backends& backends, const DatasetItem& item) {
  Outcome o;
  nlohmann::json& r = o.record;
  r["item_id"] = item.item_id;
  r["video_id"] = item.video_id;
  r["query"] = item.query;
  if (item.mr) {
    r["gold_s"] = {item.mr->span_start_s, item.mr->span_end_s};
  } else {
    r["gold_clips"] = clips_json(item.hd->clips);
  }
  r["tags"] = nlohmann::json::array();
  r["n_markers"] = 0;
  r["raw_reply"] = nullptr;
  r["error"] = nullptr;
  try {
    MarkedItem marked = markerize_item(config, backends, item);
    r["tags"] = marked.tags;
    r["n_markers"] = marked.n_markers;

    const fs::path out_dir = config.output_root / "marked" / item.item_id;
    fs::create_directories(out_dir);
    GroundingRequest request;
    request.item_id = item.item_id;
    request.task = config.task;
    for (size_t i = 0; i < marked.frames.size(); ++i) {
      request.frames.push_back(out_dir / frame_file_name(marked.sampling[i].index));
      write_ppm(request.frames.back(), marked.frames[i]);
    }
    request.prompt = config.task == Task::moment_retrieval
                         ? build_mr_prompt(item.query)
                         : build_hd_prompt(item.query, config.hd_prompt_template);

    const std::string raw = ground(request, *backends.vidllm, config.retries);
    r["raw_reply"] = raw;
    if (config.task == Task::moment_retrieval) {
      const TemporalSpan frames = parse_mr_answer(raw, config.num_frames);
      const TemporalSpan secs = frames_to_seconds(frames, marked.sampling);
      r["pred_frames"] = {frames.start, frames.end};
      r["pred_s"] = {secs.start, secs.end};
      r["iou"] = temporal_iou({item.mr->span_start_s, item.mr->span_end_s, SpanUnit::second}, secs);
    } else {
      const auto& sampling = marked.sampling;
      const double clip_s = config.clip_seconds;
      const auto pred = parse_hd_answer(raw, config.num_frames, [&](int k) {
        return static_cast<int>(std::floor(sampling[k - 1].timestamp_s / clip_s));
      });
      r["pred_clips"] = clips_json(pred.entries);
    }
  } catch (const std::exception& e) {
    o.failed = true;
    o.transport = dynamic_cast<const TransportError*>(&e) != nullptr;
    r["error"] = e.what();
  }
  return o;
}

std::map<std::string, nlohmann::json> read_existing(const fs::path& path) {
  std::map<std::string, nlohmann::json> out;
  std::ifstream in(path);
  std::string line;
  while (std::getline(in, line)) {
    try {
      auto j = nlohmann::json::parse(line);
      std::string id = j.at("item_id").get<std::string>();
      out[id] = std::move(j);
    } catch (const nlohmann::json::exception&) {
      // a torn final line from an interrupted run; that item is redone
    }
  }
  return out;
}

void write_text(const fs::path& path, const std::string& text) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw DataError("cannot write " + tmp.string());
    out << text;
  }
  fs::rename(tmp, path);
}

}  // namespace

EvalReport score_records(const std::vector<nlohmann::json>& records, const RunConfig& config) {
  if (config.task == Task::moment_retrieval) {
    std::vector<MrItem> items;
    for (const auto& r : records) {
      MrItem m;
      m.item_id = r.at("item_id").get<std::string>();
      m.gold = {r.at("gold_s").at(0).get<double>(), r.at("gold_s").at(1).get<double>(), SpanUnit::second};
      if (r.contains("pred_s") && !r["pred_s"].is_null()) {
        m.prediction = TemporalSpan{r["pred_s"].at(0).get<double>(), r["pred_s"].at(1).get<double>(),
                                    SpanUnit::second};
      }
      items.push_back(std::move(m));
    }
    return moment_retrieval_report(items);
  }
  std::vector<HdItem> items;
  for (const auto& r : records) {
    HdItem h;
    h.item_id = r.at("item_id").get<std::string>();
    h.gold = clips_from(r.at("gold_clips"));
    if (r.contains("pred_clips") && !r["pred_clips"].is_null()) {
      h.prediction = HighlightPrediction{clips_from(r["pred_clips"])};
    }
    items.push_back(std::move(h));
  }
  return highlight_report(items, config.hd);
}

RunSummary run_pipeline(const RunConfig& config, Backends& backends) {
  config.validate();
  const std::vector<DatasetItem> items = load_dataset(config);
  fs::create_directories(config.output_root);
  const fs::path records_path = config.output_root / "records.ndjson";

  std::map<std::string, nlohmann::json> done;
  if (config.resume) {
    done = read_existing(records_path);
  } else {
    fs::remove(records_path);
  }
  std::set<std::string> ids;
  for (const auto& item : items) ids.insert(item.item_id);
  for (auto it = done.begin(); it != done.end();) it = ids.count(it->first) ? std::next(it) : done.erase(it);

  std::vector<const DatasetItem*> pending;
  for (const auto& item : items) {
    if (!done.count(item.item_id)) pending.push_back(&item);
  }
  if (config.limit && static_cast<size_t>(*config.limit) < pending.size()) pending.resize(*config.limit);

  RunSummary summary;
  summary.n_dataset_items = static_cast<int>(items.size());
  summary.n_resumed = static_cast<int>(done.size());
  {
    std::string kept;
    for (const auto& [id, r] : done) kept += r.dump() + "\n";
    write_text(records_path, kept);
  }

  std::mutex mu;
  std::ofstream sink(records_path, std::ios::app | std::ios::binary);
  parallel_for(pending.size(), config.workers, [&](size_t i) {
    Outcome o = process_item(config, backends, *pending[i]);
    std::lock_guard lock(mu);
    sink << o.record.dump() << '\n' << std::flush;
    ++summary.n_processed;
    summary.n_failed += o.failed ? 1 : 0;
    summary.n_transport_failures += o.transport ? 1 : 0;
    done[pending[i]->item_id] = std::move(o.record);
  });
  sink.close();

  std::vector<nlohmann::json> records;
  std::string all;
  for (const auto& [id, r] : done) {
    records.push_back(r);
    all += r.dump() + "\n";
  }
  write_text(records_path, all);

  summary.report = score_records(records, config);
  nlohmann::json report = {{"task", std::string(to_string(config.task))},
                           {"num_frames", config.num_frames},
                           {"n_dataset_items", summary.n_dataset_items},
                           {"n_scored_items", records.size()},
                           {"tagger", config.tagger == TaggerMode::rules ? "rules" : "lm"},
                           {"tag_strategy", std::string(to_string(config.tag_strategy))},
                           {"tag_budget", config.tag_budget},
                           {"style", style_to_json(config.style)},
                           {"metrics", to_json(summary.report)}};
  if (config.task == Task::highlight_detection) {
    report["clip_seconds"] = config.clip_seconds;
    report["relevance_threshold"] = config.hd.relevance_threshold;
  }
  write_text(config.output_root / "report.json", report.dump(2) + "\n");
  write_text(config.output_root / "report.txt", format_table({{"run", summary.report}}));
  return summary;
}

RunSummary run_pipeline(const RunConfig& config) {
  config.validate();
  Backends backends = make_backends(config);
  return run_pipeline(config, backends);
}

std::vector<fs::path> emit_preview(const RunConfig& config, Backends& backends, const DatasetItem& item, int k,
                                   const fs::path& out_dir) {
  if (k < 1) throw InputError("preview count must be positive");
  MarkedItem marked = markerize_item(config, backends, item);
  const int n = static_cast<int>(marked.frames.size());
  fs::create_directories(out_dir);
  std::vector<fs::path> written;
  // Same midpoint rule as the sampler, applied to the N marked frames.
  for (const auto& pick : sample_frames(n, 1.0, std::min(k, n))) {
    const fs::path path = out_dir / (item.item_id + "_" + frame_file_name(pick.source_frame));
    write_ppm(path, marked.frames[pick.source_frame - 1]);
    written.push_back(path);
  }
  return written;
}

}  // namespace vmark
