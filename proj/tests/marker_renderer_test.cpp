#include "vmark/marker_renderer.hpp"

#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "oracles.hpp"
#include "test_support.hpp"
#include "vmark/errors.hpp"

namespace vmark {
namespace {

using oracle::glyph_pixels;

TEST(Overlay, WorkedPixel) {
  Frame f(1, 1, {100, 100, 100});
  Region r(1, 1);
  r.at(0, 0) = 1;
  EXPECT_EQ(overlay_mask(f, r, colors::kRed, 0.3).at(0, 0), (Rgb{147, 70, 70}));
  EXPECT_EQ(overlay_mask(f, r, colors::kRed, 0.0).at(0, 0), (Rgb{100, 100, 100}));
  EXPECT_EQ(overlay_mask(f, r, colors::kRed, 1.0).at(0, 0), colors::kRed);
  // 0.5 * 101 + 0.5 * 0 = 50.5 rounds up.
  EXPECT_EQ(overlay_mask(Frame(1, 1, {101, 101, 101}), r, colors::kBlack, 0.5).at(0, 0), (Rgb{51, 51, 51}));
}

TEST(Overlay, MatchesArithmeticOracle) {
  std::mt19937 rng(5);
  const std::pair<double, int> alphas[] = {{0.0, 0}, {0.2, 2}, {0.3, 3}, {0.5, 5}, {1.0, 10}};
  for (int i = 0; i < 200; ++i) {
    const Frame src = testing::random_frame(rng, 32, 32);
    const Region mask = testing::random_region(rng, 32, 32, 0.5);
    const Rgb c{static_cast<std::uint8_t>(rng() % 256), static_cast<std::uint8_t>(rng() % 256),
                static_cast<std::uint8_t>(rng() % 256)};
    const auto [alpha, tenths] = alphas[i % 5];
    const Frame out = overlay_mask(src, mask, c, alpha);
    for (int y = 0; y < 32; ++y)
      for (int x = 0; x < 32; ++x) {
        const Rgb want = mask.at(x, y) ? oracle::blend(src.at(x, y), c, tenths) : src.at(x, y);
        ASSERT_EQ(out.at(x, y), want) << "alpha " << alpha << " at " << x << "," << y;
      }
  }
}

TEST(Overlay, RejectsShapeMismatch) {
  Frame f(4, 4);
  EXPECT_THROW(overlay_mask(f, Region(4, 5), colors::kRed, 0.3), DataError);
}

TEST(Contour, MatchesBruteForceMorphology) {
  std::mt19937 rng(9);
  for (int i = 0; i < 200; ++i) {
    const Region m = i % 2 ? testing::random_blobs(rng, 32, 32) : testing::random_region(rng, 32, 32, 0.6);
    for (int w : {1, 2, 3, 5}) ASSERT_EQ(contour_band(m, w), oracle::band(m, w)) << "w=" << w << " case " << i;
  }
  EXPECT_THROW(contour_band(Region(3, 3), 0), InputError);
}

TEST(Contour, BandAroundBoxAndFullFrame) {
  Region box(9, 9);
  for (int y = 3; y <= 5; ++y)
    for (int x = 3; x <= 5; ++x) box.at(x, y) = 1;
  const Region band = contour_band(box, 2);  // r = 1
  EXPECT_EQ(band.area(), 25u - 1u);          // 5x5 dilation minus the 1x1 erosion
  EXPECT_FALSE(band.at(4, 4));
  EXPECT_TRUE(band.at(2, 2));
  Region full(5, 5);
  for (auto& c : full.cells) c = 1;
  // Erosion treats the outside as background, so the frame border is a band.
  EXPECT_EQ(contour_band(full, 2).area(), 16u);
}

TEST(Text, AnchorClampingAndSuppression) {
  Region r(20, 30);
  EXPECT_FALSE(text_anchor(r, {2, 2}).has_value());
  r.at(29, 19) = 1;
  r.at(10, 15) = 1;
  EXPECT_EQ(text_anchor(r, {2, 2}), (Point{12, 17}));
  r.at(10, 15) = 0;
  EXPECT_EQ(text_anchor(r, {2, 2}), (Point{29, 19}));
}

TEST(Text, GlyphMetricsAndDrawing) {
  EXPECT_EQ(measure_text("", 16).width, 0);
  const TextBox one = measure_text("1", 14);
  EXPECT_EQ(one.height, 14);
  EXPECT_EQ(one.width, glyph_width(14));
  EXPECT_EQ(measure_text("12", 14).width, 2 * glyph_width(14) + glyph_spacing(14));
  Frame f(30, 40, {9, 9, 9});
  const Frame out = draw_text(f, "7", {3, 4}, 14, colors::kWhite);
  const auto lit = glyph_pixels("7", {3, 4}, 14, 30, 40);
  EXPECT_FALSE(lit.empty());
  for (int y = 0; y < 30; ++y)
    for (int x = 0; x < 40; ++x) {
      EXPECT_EQ(out.at(x, y), (lit.count({x, y}) ? colors::kWhite : Rgb{9, 9, 9}));
      if (lit.count({x, y})) {
        EXPECT_GE(x, 3);
        EXPECT_LT(x, 3 + one.width);
        EXPECT_GE(y, 4);
        EXPECT_LT(y, 4 + 14);
      }
    }
  // Off-frame glyph pixels are dropped, not wrapped.
  EXPECT_NO_THROW(draw_text(f, "88", {35, 25}, 14, colors::kWhite));
}

TEST(IndexAnchor, FixedPositionsKeepMargin) {
  const int h = 120, w = 200;
  const TextBox b = measure_text("17", 38);
  EXPECT_EQ(index_anchor(IndexPosition::top_left, h, w, "17", 38), (Point{4, 4}));
  EXPECT_EQ(index_anchor(IndexPosition::top_right, h, w, "17", 38), (Point{w - 4 - b.width, 4}));
  EXPECT_EQ(index_anchor(IndexPosition::bottom_left, h, w, "17", 38), (Point{4, h - 4 - b.height}));
  EXPECT_EQ(index_anchor(IndexPosition::bottom_right, h, w, "17", 38), (Point{w - 4 - b.width, h - 4 - b.height}));
  EXPECT_EQ(index_anchor(IndexPosition::center, h, w, "17", 38), (Point{(w - b.width) / 2, (h - b.height) / 2}));
  for (auto p : {"top-left", "top-right", "center", "bottom-left", "bottom-right", "find-region"}) {
    EXPECT_EQ(to_string(parse_index_position(p)), p);
  }
  EXPECT_THROW(parse_index_position("middle"), ConfigError);
}

TEST(IndexAnchor, FindRegionPrefersFlatFreeCell) {
  std::mt19937 rng(3);
  Frame src = testing::random_frame(rng, 90, 90);
  // Flatten cells (row 0, col 2) and (row 2, col 0); cover the first with a mask.
  for (int y = 0; y < 30; ++y)
    for (int x = 60; x < 90; ++x) src.set(x, y, {50, 50, 50});
  for (int y = 60; y < 90; ++y)
    for (int x = 0; x < 30; ++x) src.set(x, y, {80, 80, 80});
  Region covered(90, 90);
  covered.at(70, 10) = 1;
  const std::vector<Region> masks = {covered};
  const TextBox b = measure_text("5", 10);
  EXPECT_EQ(index_anchor(IndexPosition::find_region, 90, 90, "5", 10, &src, nullptr),
            (Point{60 + (30 - b.width) / 2, (30 - b.height) / 2}));
  EXPECT_EQ(index_anchor(IndexPosition::find_region, 90, 90, "5", 10, &src, &masks),
            (Point{(30 - b.width) / 2, 60 + (30 - b.height) / 2}));
}

struct Stack {
  Frame frame;
  FrameMarkers markers;
};

Stack random_stack(std::mt19937& rng, int h, int w) {
  static const char* tags[] = {"person", "dog", "man", "cat", "rope"};
  Stack s{testing::random_frame(rng, h, w), {}};
  const int n = static_cast<int>(rng() % 4);
  for (int k = 1; k <= n; ++k) {
    s.markers.semantic.push_back({InstanceMask::from_region(testing::random_blobs(rng, h, w)), tags[rng() % 5], k});
  }
  return s;
}

TEST(RenderFrame, MatchesReferenceComposition) {
  std::mt19937 rng(21);
  const std::pair<double, int> alphas[] = {{0.2, 2}, {0.3, 3}, {0.5, 5}};
  for (int i = 0; i < 60; ++i) {
    const int h = 48, w = 64;
    const Stack s = random_stack(rng, h, w);
    StyleConfig style;
    const auto [alpha, tenths] = alphas[i % 3];
    style.alpha = alpha;
    style.contour_width = i % 4 == 0 ? 0 : (i % 4 == 1 ? 2 : (i % 4 == 2 ? 3 : 5));
    style.index_font_height = 14;
    style.font_height = 7;
    style.index_position = static_cast<IndexPosition>(i % 5);
    const int t = 1 + i % 64;

    Frame want = s.frame;
    std::vector<Region> regions;
    for (const auto& m : s.markers.semantic) regions.push_back(m.region.decode());
    for (size_t k = 0; k < regions.size(); ++k) {
      const Rgb c = style.fill_color(s.markers.semantic[k].ordinal);
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
          if (regions[k].at(x, y)) want.set(x, y, oracle::blend(want.at(x, y), c, tenths));
    }
    if (style.contour_width > 0) {
      for (size_t k = 0; k < regions.size(); ++k) {
        const Region band = oracle::band(regions[k], style.contour_width);
        const Rgb c = style.contour_color(s.markers.semantic[k].ordinal);
        for (int y = 0; y < h; ++y)
          for (int x = 0; x < w; ++x)
            if (band.at(x, y)) want.set(x, y, c);
      }
    }
    for (size_t k = 0; k < regions.size(); ++k) {
      if (auto a = text_anchor(regions[k], style.text_offset)) {
        for (auto [x, y] : glyph_pixels(s.markers.semantic[k].tag, *a, style.font_height, h, w))
          want.set(x, y, style.text_color);
      }
    }
    const Point ia = index_anchor(style.index_position, h, w, std::to_string(t), 14);
    for (auto [x, y] : glyph_pixels(std::to_string(t), ia, 14, h, w)) want.set(x, y, style.index_color);

    ASSERT_EQ(render_frame(s.frame, s.markers, t, style), want) << "case " << i;
  }
}

TEST(RenderFrame, TextOnTopAndUntouchedPixelsPreserved) {
  std::mt19937 rng(77);
  for (int i = 0; i < 50; ++i) {
    const int h = 40, w = 56;
    const Stack s = random_stack(rng, h, w);
    StyleConfig style;
    style.font_height = 7 + i % 8;
    style.index_font_height = 10 + i % 20;
    style.text_color = {1, 2, 3};
    style.index_color = {250, 4, 200};
    style.contour_width = 1 + i % 5;
    const int t = 1 + i;
    const Frame out = render_frame(s.frame, s.markers, t, style);

    std::set<std::pair<int, int>> touched, tag_glyphs;
    for (const auto& m : s.markers.semantic) {
      const Region r = m.region.decode();
      const Region band = contour_band(r, style.contour_width);
      for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
          if (r.at(x, y) || band.at(x, y)) touched.insert({x, y});
      if (auto a = text_anchor(r, style.text_offset)) {
        for (const auto& p : glyph_pixels(m.tag, *a, style.font_height, h, w)) tag_glyphs.insert(p);
      }
    }
    const auto index_glyphs = glyph_pixels(std::to_string(t), index_anchor(style.index_position, h, w,
                                                                           std::to_string(t), style.index_font_height),
                                           style.index_font_height, h, w);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        if (index_glyphs.count({x, y})) {
          ASSERT_EQ(out.at(x, y), style.index_color);
        } else if (tag_glyphs.count({x, y})) {
          ASSERT_EQ(out.at(x, y), style.text_color);
        } else if (!touched.count({x, y})) {
          ASSERT_EQ(out.at(x, y), s.frame.at(x, y));
        }
      }
  }
}

TEST(RenderFrame, ZeroOpacityLeavesOnlyText) {
  std::mt19937 rng(8);
  const Stack s = random_stack(rng, 30, 30);
  StyleConfig style;
  style.alpha = 0.0;
  style.beta = 0.0;
  style.draw_index = false;
  style.text_color = {7, 7, 7};
  const Frame out = render_frame(s.frame, s.markers, 1, style);
  std::set<std::pair<int, int>> glyphs;
  for (const auto& m : s.markers.semantic) {
    if (auto a = text_anchor(m.region.decode(), style.text_offset)) {
      for (const auto& p : glyph_pixels(m.tag, *a, style.font_height, 30, 30)) glyphs.insert(p);
    }
  }
  for (int y = 0; y < 30; ++y)
    for (int x = 0; x < 30; ++x) EXPECT_EQ(out.at(x, y), (glyphs.count({x, y}) ? Rgb{7, 7, 7} : s.frame.at(x, y)));
}

TEST(RenderFrame, NoSemanticMarkersDrawsIndexOnly) {
  std::mt19937 rng(4);
  const Stack s = random_stack(rng, 30, 40);
  StyleConfig style;
  style.semantic_markers = false;
  style.index_font_height = 12;
  const Frame out = render_frame(s.frame, s.markers, 9, style);
  const auto glyphs = glyph_pixels("9", index_anchor(style.index_position, 30, 40, "9", 12), 12, 30, 40);
  for (int y = 0; y < 30; ++y)
    for (int x = 0; x < 40; ++x) EXPECT_EQ(out.at(x, y), glyphs.count({x, y}) ? colors::kBlack : s.frame.at(x, y));
}

TEST(Markerize, NumbersFramesFromOne) {
  std::mt19937 rng(6);
  std::vector<Frame> frames;
  std::vector<FrameMarkers> markers;
  for (int i = 0; i < 12; ++i) {
    const Stack s = random_stack(rng, 24, 32);
    frames.push_back(s.frame);
    markers.push_back(s.markers);
  }
  StyleConfig style;
  style.index_font_height = 10;
  const auto out = markerize_video(frames, markers, style, 4);
  ASSERT_EQ(out.size(), frames.size());
  for (size_t i = 0; i < frames.size(); ++i) {
    EXPECT_EQ(out[i], render_frame(frames[i], markers[i], static_cast<int>(i) + 1, style));
  }
  markers.pop_back();
  EXPECT_THROW(markerize_video(frames, markers, style), InputError);
}

TEST(StyleConfig, Validation) {
  StyleConfig s;
  EXPECT_NO_THROW(s.validate());
  s.alpha = 1.2;
  EXPECT_THROW(s.validate(), ConfigError);
  s = {};
  s.palette.clear();
  EXPECT_THROW(s.validate(), ConfigError);
  s = {};
  EXPECT_EQ(s.fill_color(5), colors::kRed);
  EXPECT_EQ(s.fill_color(2), colors::kYellow);
}

TEST(FrameIo, PpmAndStreamRoundTrip) {
  std::mt19937 rng(12);
  const auto dir = testing::scratch_dir("frame_io");
  std::vector<Frame> frames;
  for (int i = 0; i < 3; ++i) frames.push_back(testing::random_frame(rng, 7, 11));
  write_ppm(dir / frame_file_name(1), frames[0]);
  EXPECT_EQ(read_ppm(dir / "000001.ppm"), frames[0]);
  EXPECT_EQ(decode_ppm(encode_ppm(frames[1])), frames[1]);
  write_ppm(dir / frame_file_name(2), frames[1]);
  EXPECT_EQ(count_frames(dir), 2);
  EXPECT_THROW(decode_ppm("P3\n1 1\n255\n"), DataError);

  std::stringstream stream;
  write_stream(stream, frames);
  const std::string bytes = stream.str();
  EXPECT_EQ(bytes.substr(0, 4), "VMRK");
  EXPECT_EQ(bytes.size(), 16u + 3u * 7 * 11 * 3);
  EXPECT_EQ(read_stream(stream), frames);
}

}  // namespace
}  // namespace vmark
