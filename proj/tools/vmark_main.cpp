// vmark command-line front end.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "vmark/ablation.hpp"
#include "vmark/errors.hpp"
#include "vmark/pipeline.hpp"

namespace fs = std::filesystem;
using namespace vmark;

namespace {

Rgb parse_color(const std::string& s) {
  static const std::map<std::string, Rgb> named = {{"black", colors::kBlack}, {"white", colors::kWhite},
                                                   {"red", colors::kRed},     {"yellow", colors::kYellow},
                                                   {"blue", colors::kBlue},   {"green", colors::kGreen}};
  if (const auto it = named.find(s); it != named.end()) return it->second;
  if (s.size() == 7 && s[0] == '#') {
    try {
      const unsigned long v = std::stoul(s.substr(1), nullptr, 16);
      return {static_cast<std::uint8_t>(v >> 16), static_cast<std::uint8_t>(v >> 8), static_cast<std::uint8_t>(v)};
    } catch (const std::exception&) {
    }
  }
  throw ConfigError("bad colour '" + s + "' (use a name or #rrggbb)");
}

std::vector<Rgb> parse_palette(const std::string& s) {
  std::vector<Rgb> out;
  std::stringstream in(s);
  for (std::string part; std::getline(in, part, ',');) out.push_back(parse_color(part));
  return out;
}

// Flags shared by every subcommand that touches a dataset. Values stay as
// strings until to_config() so the config file and flags share one path.
struct PipelineFlags {
  std::string task = "mr";
  std::string annotations, format = "canonical", frame_root, fps_map;
  double default_fps = 30.0;
  int num_frames = 64;
  std::string masks, seg_url;
  bool seg_inline = false;
  std::string mock_replies, vidllm_url, vidllm_model;
  int mock_jitter = 0;
  bool vidllm_inline = false;
  std::string tagger = "rules", tag_strategy = "subject_nouns", lm_url, lm_model;
  int tag_budget = kDefaultTagBudget;
  double alpha = 0.3, beta = 1.0;
  int contour_width = 3, font_height = 16, index_size = 38;
  bool no_semantic = false, no_index = false;
  std::string palette = "red,yellow,blue,green", index_position = "bottom-right", index_color = "black",
              text_color = "white";
  std::string out = "vmark_out";
  int workers = 4, max_in_flight = 4, retries = 2, limit = -1;
  std::uint64_t seed = 0;
  double clip_seconds = 2.0, relevance = 3.0, timeout = 120.0;
  bool hit_counts_empty = false, no_resume = false;

  void add_to(CLI::App* app) {
    app->add_option("--task", task, "mr or hd")->capture_default_str();
    app->add_option("--annotations", annotations, "annotation file");
    app->add_option("--format", format, "charades or canonical")->capture_default_str();
    app->add_option("--frame-root", frame_root, "directory holding <video_id>/000001.ppm ...");
    app->add_option("--fps-map", fps_map, "file of 'video_id fps' lines");
    app->add_option("--default-fps", default_fps)->capture_default_str();
    app->add_option("--num-frames", num_frames, "frames sampled per video")->capture_default_str();
    app->add_option("--masks", masks, "precomputed mask file (NDJSON)");
    app->add_option("--seg-url", seg_url, "segmentation endpoint");
    app->add_flag("--seg-inline-images", seg_inline);
    app->add_option("--mock-replies", mock_replies, "scripted Vid-LLM replies (NDJSON)");
    app->add_option("--mock-jitter", mock_jitter)->capture_default_str();
    app->add_option("--vidllm-url", vidllm_url);
    app->add_option("--vidllm-model", vidllm_model);
    app->add_flag("--vidllm-inline-images", vidllm_inline);
    app->add_option("--tagger", tagger, "rules or lm")->capture_default_str();
    app->add_option("--tag-strategy", tag_strategy, "none, all_nouns, single_noun, subject_nouns")
        ->capture_default_str();
    app->add_option("--tag-budget", tag_budget)->capture_default_str();
    app->add_option("--lm-url", lm_url);
    app->add_option("--lm-model", lm_model);
    app->add_option("--alpha", alpha)->capture_default_str();
    app->add_option("--beta", beta)->capture_default_str();
    app->add_option("--contour-width", contour_width, "0 disables contours")->capture_default_str();
    app->add_option("--palette", palette, "comma-separated names or #rrggbb")->capture_default_str();
    app->add_option("--font-height", font_height)->capture_default_str();
    app->add_option("--text-color", text_color)->capture_default_str();
    app->add_flag("--no-semantic-markers", no_semantic);
    app->add_flag("--no-index", no_index);
    app->add_option("--index-position", index_position)->capture_default_str();
    app->add_option("--index-size", index_size)->capture_default_str();
    app->add_option("--index-color", index_color)->capture_default_str();
    app->add_option("--out", out, "output root")->capture_default_str();
    app->add_option("--workers", workers)->capture_default_str();
    app->add_option("--max-in-flight", max_in_flight)->capture_default_str();
    app->add_option("--retries", retries)->capture_default_str();
    app->add_option("--timeout", timeout, "HTTP timeout in seconds")->capture_default_str();
    app->add_option("--seed", seed)->capture_default_str();
    app->add_option("--clip-seconds", clip_seconds)->capture_default_str();
    app->add_option("--relevance-threshold", relevance)->capture_default_str();
    app->add_flag("--hit-counts-empty", hit_counts_empty, "score HIT@1 on items without relevant clips");
    app->add_option("--limit", limit, "stop after this many new items");
    app->add_flag("--no-resume", no_resume);
  }

  RunConfig to_config() const {
    RunConfig c;
    c.task = parse_task(task);
    c.annotations = annotations;
    c.format = parse_dataset_format(format);
    c.frame_root = frame_root;
    if (!fps_map.empty()) c.fps_map = fps_map;
    c.default_fps = default_fps;
    c.num_frames = num_frames;
    if (!masks.empty()) c.mask_file = masks;
    c.seg_url = seg_url;
    c.seg_inline_images = seg_inline;
    if (!mock_replies.empty()) c.mock_replies = mock_replies;
    c.mock_jitter = mock_jitter;
    c.vidllm_url = vidllm_url;
    c.vidllm_model = vidllm_model;
    c.vidllm_inline_images = vidllm_inline;
    c.tagger = parse_tagger_mode(tagger);
    c.tag_strategy = parse_tag_strategy(tag_strategy);
    c.tag_budget = tag_budget;
    c.lm_url = lm_url;
    c.lm_model = lm_model;
    c.style.semantic_markers = !no_semantic;
    c.style.alpha = alpha;
    c.style.beta = beta;
    c.style.contour_width = contour_width;
    c.style.palette = parse_palette(palette);
    c.style.font_height = font_height;
    c.style.text_color = parse_color(text_color);
    c.style.draw_index = !no_index;
    c.style.index_position = parse_index_position(index_position);
    c.style.index_font_height = index_size;
    c.style.index_color = parse_color(index_color);
    c.output_root = out;
    c.workers = workers;
    c.max_in_flight = max_in_flight;
    c.retries = retries;
    c.seed = seed;
    c.clip_seconds = clip_seconds;
    c.hd.relevance_threshold = relevance;
    c.hd.hit_counts_items_without_relevant = hit_counts_empty;
    if (limit >= 0) c.limit = limit;
    c.resume = !no_resume;
    c.http.timeout_seconds = timeout;
    c.http.retries = retries;
    c.validate();
    return c;
  }
};

DatasetItem find_item(const RunConfig& config, const std::string& id) {
  for (auto& item : load_dataset(config)) {
    if (item.item_id == id) return item;
  }
  throw DataError("no item " + id + " in " + config.annotations.string());
}

nlohmann::json markers_json(const MarkedItem& marked) {
  nlohmann::json frames = nlohmann::json::array();
  for (size_t i = 0; i < marked.markers.size(); ++i) {
    nlohmann::json ms = nlohmann::json::array();
    for (const auto& m : marked.markers[i].semantic) {
      ms.push_back({{"tag", m.tag}, {"ordinal", m.ordinal}, {"area", m.region.foreground_cells()}});
    }
    frames.push_back({{"index", marked.sampling[i].index},
                      {"source_frame", marked.sampling[i].source_frame},
                      {"timestamp_s", marked.sampling[i].timestamp_s},
                      {"markers", ms}});
  }
  return frames;
}

int cmd_tag(const std::vector<std::string>& queries, const std::string& queries_file, const PipelineFlags& f) {
  std::vector<std::string> all = queries;
  if (!queries_file.empty()) {
    std::ifstream in(queries_file);
    if (!in) throw DataError("cannot open " + queries_file);
    for (std::string line; std::getline(in, line);) {
      if (line.find_first_not_of(" \t\r") != std::string::npos) all.push_back(line);
    }
  }
  if (all.empty()) throw ConfigError("tag needs --query or --queries");
  std::shared_ptr<CachingTagExtractor> lm;
  if (parse_tagger_mode(f.tagger) == TaggerMode::lm) {
    if (f.lm_url.empty()) throw ConfigError("lm tagger needs --lm-url");
    HttpOptions http;
    http.timeout_seconds = f.timeout;
    http.retries = f.retries;
    lm = std::make_shared<CachingTagExtractor>(std::make_shared<HttpChatModel>(f.lm_url, f.lm_model, http), false);
  }
  const TagStrategy strategy = parse_tag_strategy(f.tag_strategy);
  for (const auto& q : all) {
    const TagList tags = lm ? lm->extract(q, f.tag_budget) : extract_tags(q, f.tag_budget, strategy);
    std::cout << nlohmann::json({{"query", q}, {"tags", tags}}).dump() << '\n';
  }
  return 0;
}

int cmd_infer(const std::string& frames_dir, const std::string& query, const std::string& item_id,
              const PipelineFlags& f) {
  const RunConfig base = [&] {
    RunConfig c;
    c.task = parse_task(f.task);
    if (!f.mock_replies.empty()) c.mock_replies = f.mock_replies;
    c.vidllm_url = f.vidllm_url;
    c.vidllm_model = f.vidllm_model;
    c.mock_jitter = f.mock_jitter;
    c.seed = f.seed;
    c.vidllm_inline_images = f.vidllm_inline;
    c.http.timeout_seconds = f.timeout;
    if (c.mock_replies.has_value() == !c.vidllm_url.empty()) {
      throw ConfigError("configure exactly one of --mock-replies and --vidllm-url");
    }
    return c;
  }();
  std::shared_ptr<VideoLanguageModel> model;
  if (base.mock_replies) {
    model = std::make_shared<MockVideoLanguageModel>(
        MockVideoLanguageModel::load(*base.mock_replies, base.mock_jitter, base.seed));
  } else {
    HttpOptions http = base.http;
    http.retries = 0;
    model = std::make_shared<HttpVideoLanguageModel>(base.vidllm_url, base.vidllm_model, http,
                                                     base.vidllm_inline_images
                                                         ? HttpVideoLanguageModel::ImageMode::data_url
                                                         : HttpVideoLanguageModel::ImageMode::file_url);
  }
  GroundingRequest request;
  request.item_id = item_id;
  request.task = base.task;
  const int n = count_frames(frames_dir);
  if (n == 0) throw DataError("no frames in " + frames_dir);
  for (int t = 1; t <= n; ++t) request.frames.push_back(fs::path(frames_dir) / frame_file_name(t));
  request.prompt = base.task == Task::moment_retrieval ? build_mr_prompt(query) : build_hd_prompt(query);
  const std::string raw = ground(request, *model, f.retries);
  nlohmann::json out = {{"item_id", item_id}, {"raw_reply", raw}};
  try {
    if (base.task == Task::moment_retrieval) {
      const TemporalSpan s = parse_mr_answer(raw, n);
      out["pred_frames"] = {s.start, s.end};
    } else {
      nlohmann::json clips = nlohmann::json::array();
      for (const auto& [c, v] : parse_hd_answer(raw, n).entries) clips.push_back({c, v});
      out["pred_clips"] = clips;
    }
  } catch (const ParseError& e) {
    out["error"] = e.what();
  }
  std::cout << out.dump() << '\n';
  return 0;
}

int cmd_eval(const std::string& gold_path, const std::string& pred_path, const std::string& report_path,
             const PipelineFlags& f) {
  RunConfig config;
  config.task = parse_task(f.task);
  config.hd.relevance_threshold = f.relevance;
  config.hd.hit_counts_items_without_relevant = f.hit_counts_empty;
  std::vector<nlohmann::json> records;
  if (config.task == Task::moment_retrieval) {
    std::map<std::string, MrRecord> pred;
    for (auto& r : load_mr_records(pred_path)) pred[r.item_id] = r;
    for (const auto& g : load_mr_records(gold_path)) {
      nlohmann::json r = {{"item_id", g.item_id}, {"gold_s", {g.span_start_s, g.span_end_s}}};
      if (const auto it = pred.find(g.item_id); it != pred.end()) {
        r["pred_s"] = {it->second.span_start_s, it->second.span_end_s};
      }
      records.push_back(r);
    }
  } else {
    std::map<std::string, HdRecord> pred;
    for (auto& r : load_hd_records(pred_path)) pred[r.item_id] = r;
    for (const auto& g : load_hd_records(gold_path)) {
      nlohmann::json r = {{"item_id", g.item_id}, {"gold_clips", to_json(g)["clips"]}};
      if (const auto it = pred.find(g.item_id); it != pred.end()) r["pred_clips"] = to_json(it->second)["clips"];
      records.push_back(r);
    }
  }
  const EvalReport report = score_records(records, config);
  std::cout << format_table({{"eval", report}});
  if (!report_path.empty()) {
    std::ofstream(report_path, std::ios::binary) << to_json(report).dump(2) << '\n';
  }
  return 0;
}

int cmd_run(const PipelineFlags& f) {
  const RunConfig config = f.to_config();
  std::vector<ImportIssue> issues;
  if (config.format == DatasetFormat::charades) {
    load_dataset(config, &issues);
    for (const auto& i : issues) {
      std::cerr << config.annotations.string() << ":" << i.line << ": skipped: " << i.message << '\n';
    }
  }
  Backends backends = make_backends(config);
  const RunSummary s = run_pipeline(config, backends);
  std::cout << format_table({{"run", s.report}});
  std::cerr << "items: " << s.n_dataset_items << ", processed: " << s.n_processed << ", resumed: " << s.n_resumed
            << ", failed: " << s.n_failed << '\n';
  if (s.n_processed > 0 && s.n_transport_failures == s.n_processed) {
    throw TransportError("every processed item failed to reach a backend");
  }
  return 0;
}

int cmd_ablate(const std::string& grid, const PipelineFlags& f) {
  const RunConfig config = f.to_config();
  Backends backends = make_backends(config);
  std::vector<std::string> names = grid == "all" ? ablation_grid_names() : std::vector<std::string>{grid};
  for (const auto& name : names) {
    const AblationResult r = run_ablation(config, ablation_grid(name), backends);
    std::cout << "[" << name << "]\n" << r.text << '\n';
  }
  return 0;
}

int cmd_render(const std::string& item_id, const std::string& out_dir, const std::string& stream_path,
               bool ground_only, const PipelineFlags& f) {
  const RunConfig config = f.to_config();
  Backends backends = make_backends(config);
  const DatasetItem item = find_item(config, item_id);
  const MarkedItem marked = markerize_item(config, backends, item);
  if (ground_only) {
    std::cout << nlohmann::json({{"item_id", item.item_id}, {"tags", marked.tags}, {"frames", markers_json(marked)}})
                     .dump()
              << '\n';
    return 0;
  }
  if (out_dir.empty() && stream_path.empty()) throw ConfigError("render needs --out-dir or --stream");
  if (!out_dir.empty()) {
    fs::create_directories(out_dir);
    for (size_t i = 0; i < marked.frames.size(); ++i) {
      write_ppm(fs::path(out_dir) / frame_file_name(marked.sampling[i].index), marked.frames[i]);
    }
  }
  if (!stream_path.empty()) {
    std::ofstream out(stream_path, std::ios::binary);
    if (!out) throw DataError("cannot write " + stream_path);
    write_stream(out, marked.frames);
  }
  std::cerr << "rendered " << marked.frames.size() << " frames, " << marked.n_markers << " semantic markers\n";
  return 0;
}

int cmd_preview(const std::string& item_id, int k, const std::string& out_dir, const PipelineFlags& f) {
  const RunConfig config = f.to_config();
  Backends backends = make_backends(config);
  const auto written = emit_preview(config, backends, find_item(config, item_id), k,
                                    out_dir.empty() ? config.output_root / "preview" : fs::path(out_dir));
  for (const auto& p : written) std::cout << p.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vmark: query-conditioned visual markers for video temporal grounding"};
  app.set_config("--config", "", "INI/TOML file of option values; flags override it");
  app.require_subcommand(1);
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  PipelineFlags flags;

  std::vector<std::string> queries;
  std::string queries_file;
  auto* tag = app.add_subcommand("tag", "extract subject tags from queries");
  tag->add_option("--query,-q", queries, "query text (repeatable)");
  tag->add_option("--queries", queries_file, "file with one query per line");
  tag->add_option("--tagger", flags.tagger)->capture_default_str();
  tag->add_option("--tag-strategy", flags.tag_strategy)->capture_default_str();
  tag->add_option("--tag-budget", flags.tag_budget)->capture_default_str();
  tag->add_option("--lm-url", flags.lm_url);
  tag->add_option("--lm-model", flags.lm_model);

  std::string item_id, out_dir, stream_path;
  int k = 4;
  auto* ground = app.add_subcommand("ground", "tag one item and list the grounded markers per sampled frame");
  auto* render = app.add_subcommand("render", "write the marked frames of one item");
  auto* preview = app.add_subcommand("preview", "write k evenly spaced marked frames of one item");
  for (auto* sub : {ground, render, preview}) {
    flags.add_to(sub);
    sub->add_option("--item", item_id, "item id")->required();
  }
  render->add_option("--out-dir", out_dir);
  render->add_option("--stream", stream_path, "raw RGB stream file");
  preview->add_option("--k", k)->capture_default_str();
  preview->add_option("--out-dir", out_dir);

  std::string frames_dir, query;
  auto* infer = app.add_subcommand("infer", "ask the Vid-LLM about a directory of marked frames");
  infer->add_option("--frames-dir", frames_dir)->required();
  infer->add_option("--query", query)->required();
  infer->add_option("--item-id", item_id, "id sent with the request (keys mock replies)");
  infer->add_option("--task", flags.task)->capture_default_str();
  infer->add_option("--mock-replies", flags.mock_replies);
  infer->add_option("--mock-jitter", flags.mock_jitter);
  infer->add_option("--seed", flags.seed);
  infer->add_option("--vidllm-url", flags.vidllm_url);
  infer->add_option("--vidllm-model", flags.vidllm_model);
  infer->add_flag("--vidllm-inline-images", flags.vidllm_inline);
  infer->add_option("--retries", flags.retries)->capture_default_str();
  infer->add_option("--timeout", flags.timeout)->capture_default_str();

  std::string gold, pred, report_path;
  auto* eval = app.add_subcommand("eval", "score a prediction file against gold records");
  eval->add_option("--gold", gold)->required();
  eval->add_option("--pred", pred)->required();
  eval->add_option("--report", report_path, "write the report as JSON");
  eval->add_option("--task", flags.task)->capture_default_str();
  eval->add_option("--relevance-threshold", flags.relevance)->capture_default_str();
  eval->add_flag("--hit-counts-empty", flags.hit_counts_empty);

  auto* run = app.add_subcommand("run", "markerize, query and score a whole dataset");
  flags.add_to(run);

  std::string grid = "all";
  auto* ablate = app.add_subcommand("ablate", "sweep rendering styles or tag strategies");
  flags.add_to(ablate);
  ablate->add_option("--grid", grid, "mask, index, color, tag or all")->capture_default_str();

  try {
    app.parse(argc, argv);
    if (*tag) return cmd_tag(queries, queries_file, flags);
    if (*ground) return cmd_render(item_id, "", "", true, flags);
    if (*render) return cmd_render(item_id, out_dir, stream_path, false, flags);
    if (*preview) return cmd_preview(item_id, k, out_dir, flags);
    if (*infer) return cmd_infer(frames_dir, query, item_id, flags);
    if (*eval) return cmd_eval(gold, pred, report_path, flags);
    if (*run) return cmd_run(flags);
    if (*ablate) return cmd_ablate(grid, flags);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const InputError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const ParseError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 3;
  } catch (const TransportError& e) {
    std::cerr << "backend error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
