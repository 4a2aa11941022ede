#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "vmark/dataset.hpp"
#include "vmark/frame.hpp"
#include "vmark/mask_bridge.hpp"
#include "vmark/mask_codec.hpp"

namespace vmark::testing {

namespace fs = std::filesystem;

/// Fresh, empty directory under the system temp dir.
inline fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("vmark_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

inline Region random_region(std::mt19937& rng, int h, int w, double density) {
  Region r(h, w);
  std::bernoulli_distribution on(density);
  for (auto& c : r.cells) c = on(rng) ? 1 : 0;
  return r;
}

/// Random blobby region: a few filled rectangles.
inline Region random_blobs(std::mt19937& rng, int h, int w) {
  Region r(h, w);
  std::uniform_int_distribution<int> count(0, 3);
  for (int n = count(rng); n > 0; --n) {
    const int x0 = std::uniform_int_distribution<int>(0, w - 1)(rng);
    const int y0 = std::uniform_int_distribution<int>(0, h - 1)(rng);
    const int x1 = std::uniform_int_distribution<int>(x0, w - 1)(rng);
    const int y1 = std::uniform_int_distribution<int>(y0, h - 1)(rng);
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) r.at(x, y) = 1;
  }
  return r;
}

inline Frame random_frame(std::mt19937& rng, int h, int w) {
  Frame f(h, w);
  std::uniform_int_distribution<int> byte(0, 255);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      f.set(x, y, {static_cast<std::uint8_t>(byte(rng)), static_cast<std::uint8_t>(byte(rng)),
                   static_cast<std::uint8_t>(byte(rng))});
    }
  return f;
}

/// Small moment-retrieval dataset on disk. Every video has `frames_per_video`
/// frames at `fps`; with N sampled frames the gold spans are chosen on
/// sample timestamps, so an oracle answering the gold frame numbers is
/// scored exactly.
struct SyntheticDataset {
  fs::path root;
  fs::path annotations;
  fs::path frame_root;
  fs::path fps_map;
  fs::path masks;
  fs::path gold_replies;
  fs::path shifted_replies;
  int num_frames = 16;
  int offset = 2;
  std::vector<MrRecord> records;
  std::vector<std::pair<int, int>> gold_frames;  // sampled frame numbers of gold start/end
};

inline SyntheticDataset make_synthetic_dataset(const fs::path& root, int items = 20, int num_frames = 16,
                                               int offset = 2) {
  SyntheticDataset d;
  d.root = root;
  fs::create_directories(root);
  d.num_frames = num_frames;
  d.offset = offset;
  d.annotations = root / "items.ndjson";
  d.frame_root = root / "frames";
  d.fps_map = root / "fps.txt";
  d.masks = root / "masks.ndjson";
  d.gold_replies = root / "replies_gold.ndjson";
  d.shifted_replies = root / "replies_shifted.ndjson";

  const int h = 48, w = 64;
  const int frames_per_video = 4 * num_frames;
  const double fps = 8.0;
  const char* queries[] = {"A person opens the door.", "The dog runs across the yard.",
                           "A man and a dog walk together.", "Someone closes the window.",
                           "Two cats sleep on the sofa."};
  std::mt19937 rng(1234);
  std::ofstream fps_out(d.fps_map), masks_out(d.masks), gold_out(d.gold_replies), shifted_out(d.shifted_replies);
  const SamplingMap sampling = sample_frames(frames_per_video, fps, num_frames);
  for (int i = 0; i < items; ++i) {
    char vid[16];
    std::snprintf(vid, sizeof vid, "vid%02d", i);
    const fs::path dir = d.frame_root / vid;
    fs::create_directories(dir);
    for (int t = 1; t <= frames_per_video; ++t) {
      Frame f(h, w, {static_cast<std::uint8_t>(20 + 9 * i), static_cast<std::uint8_t>(3 * t),
                     static_cast<std::uint8_t>(200 - 5 * i)});
      write_ppm(dir / frame_file_name(t), f);
      // A box for every tag the rule tagger can produce on these queries.
      int k = 0;
      for (const char* tag : {"person", "dog", "man", "cat"}) {
        Region r(h, w);
        const int x0 = (t + 7 * k + i) % (w - 12), y0 = (3 * k + t / 4) % (h - 10);
        for (int y = y0; y < y0 + 10; ++y)
          for (int x = x0; x < x0 + 12; ++x) r.at(x, y) = 1;
        masks_out << to_json(MaskRecord{vid, t, tag, InstanceMask::from_region(r, 0.5 + 0.1 * k)}).dump() << '\n';
        ++k;
      }
    }
    fps_out << vid << ' ' << fps << '\n';

    const int a = 1 + static_cast<int>(rng() % 5);
    const int b = a + 3 + static_cast<int>(rng() % (num_frames - a - 3 - offset));
    MrRecord r;
    char id[32];
    std::snprintf(id, sizeof id, "%s_%06d", vid, i);
    r.item_id = id;
    r.video_id = vid;
    r.query = queries[i % 5];
    r.span_start_s = sampling[a - 1].timestamp_s;
    r.span_end_s = sampling[b - 1].timestamp_s;
    d.records.push_back(r);
    d.gold_frames.emplace_back(a, b);
    gold_out << nlohmann::json({{"item_id", r.item_id}, {"reply", "From " + std::to_string(a) + " to " +
                                                                       std::to_string(b) + "."}})
                    .dump()
             << '\n';
    shifted_out << nlohmann::json({{"item_id", r.item_id},
                                   {"reply", "The event happens from frame " + std::to_string(a + offset) +
                                                 " to frame " + std::to_string(b + offset) + "."}})
                       .dump()
                << '\n';
  }
  write_mr_records(d.annotations, d.records);
  return d;
}

}  // namespace vmark::testing
