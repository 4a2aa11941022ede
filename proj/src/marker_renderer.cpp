#include "vmark/marker_renderer.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "vmark/errors.hpp"
#include "vmark/parallel.hpp"

namespace vmark {

IndexPosition parse_index_position(std::string_view name) {
  if (name == "top-left" || name == "top_left") return IndexPosition::top_left;
  if (name == "top-right" || name == "top_right") return IndexPosition::top_right;
  if (name == "center" || name == "centre") return IndexPosition::center;
  if (name == "bottom-left" || name == "bottom_left") return IndexPosition::bottom_left;
  if (name == "bottom-right" || name == "bottom_right") return IndexPosition::bottom_right;
  if (name == "find-region" || name == "find_region") return IndexPosition::find_region;
  throw ConfigError("unknown index position: " + std::string(name));
}

std::string_view to_string(IndexPosition p) {
  switch (p) {
    case IndexPosition::top_left: return "top-left";
    case IndexPosition::top_right: return "top-right";
    case IndexPosition::center: return "center";
    case IndexPosition::bottom_left: return "bottom-left";
    case IndexPosition::bottom_right: return "bottom-right";
    case IndexPosition::find_region: return "find-region";
  }
  return "bottom-right";
}

void StyleConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw ConfigError("alpha must lie in [0,1]");
  if (!(beta >= 0.0 && beta <= 1.0)) throw ConfigError("beta must lie in [0,1]");
  if (contour_width < 0) throw ConfigError("contour width must be >= 0");
  if (palette.empty()) throw ConfigError("palette must not be empty");
  if (font_height < 1 || index_font_height < 1) throw ConfigError("font heights must be >= 1");
}

Rgb StyleConfig::fill_color(int ordinal) const {
  const int n = static_cast<int>(palette.size());
  return palette[static_cast<size_t>(((ordinal - 1) % n + n) % n)];
}

Rgb StyleConfig::contour_color(int ordinal) const {
  const auto& p = contour_palette.empty() ? palette : contour_palette;
  const int n = static_cast<int>(p.size());
  return p[static_cast<size_t>(((ordinal - 1) % n + n) % n)];
}

namespace {

void require_same_shape(const Frame& canvas, const Region& region) {
  if (canvas.height() != region.height || canvas.width() != region.width) {
    throw DataError("region " + std::to_string(region.height) + "x" + std::to_string(region.width) +
                    " does not match frame " + std::to_string(canvas.height()) + "x" +
                    std::to_string(canvas.width()));
  }
}

// Values within this distance below a half step still round up, so decimal
// opacities such as 0.3 round as their exact decimal value would.
constexpr double kHalfUpGuard = 1e-7;

std::uint8_t blend_channel(std::uint8_t in, std::uint8_t color, double alpha) {
  const double v = (1.0 - alpha) * in + alpha * color;
  return static_cast<std::uint8_t>(std::clamp(std::floor(v + 0.5 + kHalfUpGuard), 0.0, 255.0));
}

// Per-channel lookup: 256 inputs for a fixed colour and opacity.
struct BlendTable {
  std::array<std::array<std::uint8_t, 256>, 3> lut;

  BlendTable(Rgb color, double alpha) {
    const std::uint8_t c[3] = {color.r, color.g, color.b};
    for (int ch = 0; ch < 3; ++ch) {
      for (int v = 0; v < 256; ++v) lut[ch][v] = blend_channel(static_cast<std::uint8_t>(v), c[ch], alpha);
    }
  }
};

void apply_blend(Frame& canvas, const Region& region, Rgb color, double alpha) {
  if (alpha <= 0.0) return;
  const BlendTable table(color, alpha);
  std::uint8_t* px = canvas.data();
  const size_t n = region.cells.size();
  for (size_t i = 0; i < n; ++i) {
    if (!region.cells[i]) continue;
    px[3 * i] = table.lut[0][px[3 * i]];
    px[3 * i + 1] = table.lut[1][px[3 * i + 1]];
    px[3 * i + 2] = table.lut[2][px[3 * i + 2]];
  }
}

// Sliding-window count of ones along one axis; `stride` walks the axis,
// `len` is its extent. dilate: any one in window; erode: window fully
// inside and all ones.
void window_pass(const std::vector<std::uint8_t>& src, std::vector<std::uint8_t>& dst, int lines, int len,
                 size_t line_stride, size_t step, int r, bool erode) {
  std::vector<int> prefix(static_cast<size_t>(len) + 1);
  for (int l = 0; l < lines; ++l) {
    const size_t base = static_cast<size_t>(l) * line_stride;
    prefix[0] = 0;
    for (int i = 0; i < len; ++i) prefix[i + 1] = prefix[i] + src[base + static_cast<size_t>(i) * step];
    for (int i = 0; i < len; ++i) {
      const int lo = i - r;
      const int hi = i + r;
      std::uint8_t v;
      if (erode) {
        v = (lo >= 0 && hi < len && prefix[hi + 1] - prefix[lo] == 2 * r + 1) ? 1 : 0;
      } else {
        v = prefix[std::min(hi, len - 1) + 1] - prefix[std::max(lo, 0)] > 0 ? 1 : 0;
      }
      dst[base + static_cast<size_t>(i) * step] = v;
    }
  }
}

std::vector<std::uint8_t> morph(const Region& region, int r, bool erode) {
  std::vector<std::uint8_t> tmp(region.cells.size()), out(region.cells.size());
  const size_t w = static_cast<size_t>(region.width);
  window_pass(region.cells, tmp, region.height, region.width, w, 1, r, erode);
  window_pass(tmp, out, region.width, region.height, 1, w, r, erode);
  return out;
}

}  // namespace

void overlay_mask_inplace(Frame& canvas, const Region& region, Rgb color, double alpha) {
  require_same_shape(canvas, region);
  apply_blend(canvas, region, color, alpha);
}

Frame overlay_mask(Frame canvas, const Region& region, Rgb color, double alpha) {
  overlay_mask_inplace(canvas, region, color, alpha);
  return canvas;
}

Region contour_band(const Region& region, int w) {
  if (w < 1) throw InputError("contour width must be >= 1");
  Region band(region.height, region.width);
  if (region.cells.empty()) return band;
  const int r = (w + 1) / 2;
  const auto dilated = morph(region, r, false);
  const auto eroded = morph(region, r, true);
  for (size_t i = 0; i < band.cells.size(); ++i) band.cells[i] = dilated[i] && !eroded[i] ? 1 : 0;
  return band;
}

void overlay_contour_inplace(Frame& canvas, const Region& region, Rgb color, double beta, int w) {
  require_same_shape(canvas, region);
  if (beta <= 0.0) return;
  apply_blend(canvas, contour_band(region, w), color, beta);
}

Frame overlay_contour(Frame canvas, const Region& region, Rgb color, double beta, int w) {
  overlay_contour_inplace(canvas, region, color, beta, w);
  return canvas;
}

void draw_text_inplace(Frame& canvas, std::string_view text, Point anchor, int font_height, Rgb color) {
  if (text.empty()) return;
  const int h = canvas.height();
  const int w = canvas.width();
  for_each_text_pixel(text, font_height, [&](int dx, int dy) {
    const int x = anchor.x + dx;
    const int y = anchor.y + dy;
    if (x >= 0 && y >= 0 && x < w && y < h) canvas.set(x, y, color);
  });
}

Frame draw_text(Frame canvas, std::string_view text, Point anchor, int font_height, Rgb color) {
  draw_text_inplace(canvas, text, anchor, font_height, color);
  return canvas;
}

std::optional<Point> text_anchor(const Region& region, Point offset) {
  int min_x = std::numeric_limits<int>::max();
  int min_y = std::numeric_limits<int>::max();
  for (int y = 0; y < region.height; ++y) {
    for (int x = 0; x < region.width; ++x) {
      if (region.at(x, y)) {
        min_x = std::min(min_x, x);
        min_y = std::min(min_y, y);
      }
    }
  }
  if (min_y == std::numeric_limits<int>::max()) return std::nullopt;
  return Point{std::clamp(min_x + offset.x, 0, region.width - 1), std::clamp(min_y + offset.y, 0, region.height - 1)};
}

namespace {

// Mean over channels of the per-channel pixel variance inside a rectangle.
double cell_variance(const Frame& f, int x0, int y0, int x1, int y1) {
  const double n = static_cast<double>(x1 - x0) * (y1 - y0);
  if (n <= 0) return 0.0;
  double total = 0.0;
  for (int ch = 0; ch < 3; ++ch) {
    double sum = 0.0, sq = 0.0;
    for (int y = y0; y < y1; ++y) {
      for (int x = x0; x < x1; ++x) {
        const double v = f.data()[(static_cast<size_t>(y) * f.width() + x) * 3 + ch];
        sum += v;
        sq += v * v;
      }
    }
    const double mean = sum / n;
    total += sq / n - mean * mean;
  }
  return total / 3.0;
}

bool cell_touches(const std::vector<Region>& masks, int x0, int y0, int x1, int y1) {
  for (const Region& m : masks) {
    for (int y = y0; y < y1; ++y) {
      for (int x = x0; x < x1; ++x) {
        if (m.at(x, y)) return true;
      }
    }
  }
  return false;
}

}  // namespace

Point index_anchor(IndexPosition position, int frame_height, int frame_width, std::string_view text, int font_height,
                   const Frame* source, const std::vector<Region>* masks) {
  const TextBox box = measure_text(text, font_height);
  const int m = kIndexMargin;
  switch (position) {
    case IndexPosition::top_left: return {m, m};
    case IndexPosition::top_right: return {frame_width - m - box.width, m};
    case IndexPosition::bottom_left: return {m, frame_height - m - box.height};
    case IndexPosition::bottom_right: return {frame_width - m - box.width, frame_height - m - box.height};
    case IndexPosition::center: return {(frame_width - box.width) / 2, (frame_height - box.height) / 2};
    case IndexPosition::find_region: break;
  }
  struct Cell {
    int x0, y0, x1, y1;
    double variance;
    bool free;
  };
  std::vector<Cell> cells;
  for (int gy = 0; gy < 3; ++gy) {
    for (int gx = 0; gx < 3; ++gx) {
      Cell c{gx * frame_width / 3, gy * frame_height / 3, (gx + 1) * frame_width / 3, (gy + 1) * frame_height / 3,
             0.0, true};
      if (source) c.variance = cell_variance(*source, c.x0, c.y0, c.x1, c.y1);
      if (masks) c.free = !cell_touches(*masks, c.x0, c.y0, c.x1, c.y1);
      cells.push_back(c);
    }
  }
  const bool any_free = std::any_of(cells.begin(), cells.end(), [](const Cell& c) { return c.free; });
  const Cell* best = nullptr;
  for (const Cell& c : cells) {
    if (any_free && !c.free) continue;
    if (!best || c.variance < best->variance) best = &c;
  }
  return {best->x0 + (best->x1 - best->x0 - box.width) / 2, best->y0 + (best->y1 - best->y0 - box.height) / 2};
}

Frame render_frame(const Frame& frame, const FrameMarkers& markers, int t, const StyleConfig& style) {
  Frame canvas = frame;
  std::vector<Region> regions;
  if (style.semantic_markers || style.index_position == IndexPosition::find_region) {
    regions.reserve(markers.semantic.size());
    for (const Marker& m : markers.semantic) {
      regions.push_back(m.region.decode());
      require_same_shape(canvas, regions.back());
    }
  }

  if (style.semantic_markers) {
    for (size_t i = 0; i < regions.size(); ++i) {
      apply_blend(canvas, regions[i], style.fill_color(markers.semantic[i].ordinal), style.alpha);
    }
    if (style.contour_width > 0 && style.beta > 0.0) {
      for (size_t i = 0; i < regions.size(); ++i) {
        apply_blend(canvas, contour_band(regions[i], style.contour_width),
                    style.contour_color(markers.semantic[i].ordinal), style.beta);
      }
    }
    for (size_t i = 0; i < regions.size(); ++i) {
      if (auto anchor = text_anchor(regions[i], style.text_offset)) {
        draw_text_inplace(canvas, markers.semantic[i].tag, *anchor, style.font_height, style.text_color);
      }
    }
  }

  if (style.draw_index) {
    const std::string index_text = std::to_string(t);
    const Point anchor = index_anchor(style.index_position, frame.height(), frame.width(), index_text,
                                      style.index_font_height, &frame, &regions);
    draw_text_inplace(canvas, index_text, anchor, style.index_font_height, style.index_color);
  }
  return canvas;
}

std::vector<Frame> markerize_video(const std::vector<Frame>& frames, const std::vector<FrameMarkers>& markers,
                                   const StyleConfig& style, int workers) {
  if (frames.size() != markers.size()) throw InputError("one marker set per frame is required");
  std::vector<Frame> out(frames.size());
  parallel_for(frames.size(), workers,
               [&](size_t i) { out[i] = render_frame(frames[i], markers[i], static_cast<int>(i) + 1, style); });
  return out;
}

}  // namespace vmark
