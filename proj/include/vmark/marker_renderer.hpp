#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vmark/bitmap_font.hpp"
#include "vmark/frame.hpp"
#include "vmark/mask_bridge.hpp"
#include "vmark/mask_codec.hpp"

namespace vmark {

struct Point {
  int x = 0;
  int y = 0;
  friend bool operator==(const Point&, const Point&) = default;
};

enum class IndexPosition { top_left, top_right, center, bottom_left, bottom_right, find_region };

IndexPosition parse_index_position(std::string_view name);
std::string_view to_string(IndexPosition p);

/// Global rendering style. Defaults are the best settings of the rendering
/// ablations: fill 0.3, opaque 3 px contour, red/yellow/blue/green palette,
/// 38 px black frame index at the bottom-right.
struct StyleConfig {
  bool semantic_markers = true;  // false: no fills, contours or tag texts
  double alpha = 0.3;            // fill opacity
  double beta = 1.0;             // contour opacity
  int contour_width = 3;         // 0 disables contours
  std::vector<Rgb> palette = {colors::kRed, colors::kYellow, colors::kBlue, colors::kGreen};
  std::vector<Rgb> contour_palette;  // empty: same as palette
  int font_height = 16;
  Rgb text_color = colors::kWhite;
  Point text_offset{2, 2};
  bool draw_index = true;
  IndexPosition index_position = IndexPosition::bottom_right;
  int index_font_height = 38;
  Rgb index_color = colors::kBlack;

  /// Throws ConfigError when a field is out of range.
  void validate() const;
  Rgb fill_color(int ordinal) const;
  Rgb contour_color(int ordinal) const;
};

inline constexpr int kIndexMargin = 4;

/// Translucent fill: out = round_half_up((1 - alpha) * in + alpha * color)
/// on region cells, other cells untouched.
void overlay_mask_inplace(Frame& canvas, const Region& region, Rgb color, double alpha);
Frame overlay_mask(Frame canvas, const Region& region, Rgb color, double alpha);

/// dilate(R, r) AND NOT erode(R, r) with a (2r+1)^2 square, r = ceil(w/2).
/// Dilation ignores cells outside the frame; erosion treats them as
/// background.
Region contour_band(const Region& region, int w);

void overlay_contour_inplace(Frame& canvas, const Region& region, Rgb color, double beta, int w);
Frame overlay_contour(Frame canvas, const Region& region, Rgb color, double beta, int w);

/// Opaque glyphs with their top-left at `anchor`; pixels falling outside
/// the frame are dropped.
void draw_text_inplace(Frame& canvas, std::string_view text, Point anchor, int font_height, Rgb color);
Frame draw_text(Frame canvas, std::string_view text, Point anchor, int font_height, Rgb color);

/// Top-left of the region's bounding box plus `offset`, clamped into the
/// frame. nullopt for an empty region (its text is suppressed).
std::optional<Point> text_anchor(const Region& region, Point offset);

/// Top-left corner for the frame-index text. Fixed positions keep a
/// kIndexMargin gap to the frame edges. find_region picks, on a 3x3 grid,
/// the lowest-variance cell of `source` that no semantic mask touches and
/// centres the text in it.
Point index_anchor(IndexPosition position, int frame_height, int frame_width, std::string_view text,
                   int font_height, const Frame* source = nullptr, const std::vector<Region>* masks = nullptr);

/// Mask fills, then contours, then tag texts, then the frame index `t`.
Frame render_frame(const Frame& frame, const FrameMarkers& markers, int t, const StyleConfig& style);

/// render_frame per element; frame t (1-based) gets index text "t".
std::vector<Frame> markerize_video(const std::vector<Frame>& frames, const std::vector<FrameMarkers>& markers,
                                   const StyleConfig& style, int workers = 1);

}  // namespace vmark
