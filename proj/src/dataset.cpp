#include "vmark/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "vmark/errors.hpp"

namespace vmark {

namespace {

std::string trim(std::string_view s) {
  const size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const size_t e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

bool parse_real(const std::string& s, double& out) {
  try {
    size_t used = 0;
    out = std::stod(s, &used);
    return used == s.size() && std::isfinite(out);
  } catch (const std::exception&) {
    return false;
  }
}

template <typename Record, typename Parse>
std::vector<Record> load_lines(const std::filesystem::path& path, Parse parse) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::vector<Record> out;
  std::string line;
  for (int n = 1; std::getline(in, line); ++n) {
    if (trim(line).empty()) continue;
    try {
      out.push_back(parse(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw DataError(path.string() + ":" + std::to_string(n) + ": " + e.what());
    } catch (const DataError& e) {
      throw DataError(path.string() + ":" + std::to_string(n) + ": " + e.what());
    }
  }
  return out;
}

template <typename Record>
void write_lines(const std::filesystem::path& path, const std::vector<Record>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& r : records) out << to_json(r).dump() << '\n';
}

}  // namespace

CharadesImport parse_charades_sta(std::istream& in) {
  CharadesImport result;
  std::string line;
  for (int n = 1; std::getline(in, line); ++n) {
    if (trim(line).empty()) continue;
    const size_t sep = line.find("##");
    if (sep == std::string::npos) {
      result.issues.push_back({n, "missing '##' separator"});
      continue;
    }
    std::istringstream head(line.substr(0, sep));
    std::string video, start_s, end_s, extra;
    MrRecord r;
    if (!(head >> video >> start_s >> end_s) || (head >> extra)) {
      result.issues.push_back({n, "expected 'video start end' before '##'"});
      continue;
    }
    if (!parse_real(start_s, r.span_start_s) || !parse_real(end_s, r.span_end_s)) {
      result.issues.push_back({n, "start/end are not numbers"});
      continue;
    }
    if (r.span_start_s < 0 || r.span_end_s < r.span_start_s) {
      result.issues.push_back({n, "span is negative or reversed"});
      continue;
    }
    r.query = trim(std::string_view(line).substr(sep + 2));
    if (r.query.empty()) {
      result.issues.push_back({n, "empty sentence"});
      continue;
    }
    char id[16];
    std::snprintf(id, sizeof id, "_%06d", n - 1);
    r.video_id = video;
    r.item_id = video + id;
    result.records.push_back(std::move(r));
  }
  return result;
}

CharadesImport import_charades_sta(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  return parse_charades_sta(in);
}

MrRecord mr_record_from_json(const nlohmann::json& j) {
  MrRecord r;
  r.item_id = j.at("item_id").get<std::string>();
  r.video_id = j.at("video_id").get<std::string>();
  r.query = j.at("query").get<std::string>();
  r.span_start_s = j.at("span_start_s").get<double>();
  r.span_end_s = j.at("span_end_s").get<double>();
  if (j.contains("duration_s")) r.duration_s = j["duration_s"].get<double>();
  if (r.span_start_s < 0 || r.span_end_s < r.span_start_s) throw DataError("bad gold span for " + r.item_id);
  return r;
}

nlohmann::json to_json(const MrRecord& r) {
  nlohmann::json j = {{"item_id", r.item_id},
                      {"video_id", r.video_id},
                      {"query", r.query},
                      {"span_start_s", r.span_start_s},
                      {"span_end_s", r.span_end_s}};
  if (r.duration_s) j["duration_s"] = *r.duration_s;
  return j;
}

HdRecord hd_record_from_json(const nlohmann::json& j) {
  HdRecord r;
  r.item_id = j.at("item_id").get<std::string>();
  r.video_id = j.value("video_id", std::string());
  r.query = j.value("query", std::string());
  for (const auto& c : j.at("clips")) {
    const int index = c.at(0).get<int>();
    if (index < 0) throw DataError("negative clip index for " + r.item_id);
    r.clips.emplace_back(index, c.at(1).get<double>());
  }
  if (j.contains("duration_s")) r.duration_s = j["duration_s"].get<double>();
  return r;
}

nlohmann::json to_json(const HdRecord& r) {
  nlohmann::json clips = nlohmann::json::array();
  for (const auto& [i, s] : r.clips) clips.push_back({i, s});
  nlohmann::json j = {{"item_id", r.item_id}, {"video_id", r.video_id}, {"query", r.query}, {"clips", clips}};
  if (r.duration_s) j["duration_s"] = *r.duration_s;
  return j;
}

std::vector<MrRecord> load_mr_records(const std::filesystem::path& path) {
  return load_lines<MrRecord>(path, mr_record_from_json);
}

std::vector<HdRecord> load_hd_records(const std::filesystem::path& path) {
  return load_lines<HdRecord>(path, hd_record_from_json);
}

void write_mr_records(const std::filesystem::path& path, const std::vector<MrRecord>& records) {
  write_lines(path, records);
}

void write_hd_records(const std::filesystem::path& path, const std::vector<HdRecord>& records) {
  write_lines(path, records);
}

std::map<std::string, double> load_fps_map(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  std::map<std::string, double> fps;
  std::string line;
  for (int n = 1; std::getline(in, line); ++n) {
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string video, value;
    double v = 0;
    if (!(fields >> video >> value) || !parse_real(value, v) || v <= 0) {
      throw DataError(path.string() + ":" + std::to_string(n) + ": expected 'video_id fps'");
    }
    fps[video] = v;
  }
  return fps;
}

SamplingMap sample_frames(int frame_count, double fps, int n) {
  if (frame_count < 1) throw DataError("video has no frames");
  if (!(fps > 0)) throw InputError("fps must be positive");
  if (n < 1) throw InputError("sample count must be positive");
  const double duration = frame_count / fps;
  SamplingMap map;
  map.reserve(n);
  for (int k = 1; k <= n; ++k) {
    SampledFrame f;
    f.index = k;
    f.timestamp_s = (k - 0.5) * duration / n;
    // floor(t * fps) with t * fps = (2k - 1) * frame_count / (2n), in integers.
    const long long src = (2LL * k - 1) * frame_count / (2LL * n);
    f.source_frame = static_cast<int>(std::min<long long>(src + 1, frame_count));
    map.push_back(f);
  }
  return map;
}

TemporalSpan frames_to_seconds(const TemporalSpan& span, const SamplingMap& map) {
  if (span.unit != SpanUnit::frame) throw InputError("frames_to_seconds needs a frame-unit span");
  if (map.empty()) throw InputError("empty sampling map");
  const int n = static_cast<int>(map.size());
  auto at = [&](double v) {
    const int i = std::clamp(static_cast<int>(std::lround(v)), 1, n);
    return map[i - 1].timestamp_s;
  };
  return {at(span.start), at(span.end), SpanUnit::second};
}

}  // namespace vmark
