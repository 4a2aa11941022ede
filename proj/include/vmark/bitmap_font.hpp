#pragma once

#include <functional>
#include <string_view>

namespace vmark {

/// Embedded 5x7 bitmap font, nearest-neighbour scaled so that a glyph is
/// exactly `font_height` pixels tall. Characters without a glyph render as
/// a hollow box.
struct TextBox {
  int width = 0;
  int height = 0;
};

int glyph_width(int font_height);
int glyph_spacing(int font_height);
TextBox measure_text(std::string_view text, int font_height);

/// Calls fn(x, y) for every lit pixel of `text`, relative to its top-left.
void for_each_text_pixel(std::string_view text, int font_height, const std::function<void(int, int)>& fn);

}  // namespace vmark
