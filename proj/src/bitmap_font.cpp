#include "vmark/bitmap_font.hpp"

#include <algorithm>
#include <array>
#include <cstdint>

namespace vmark {

namespace {

constexpr int kRows = 7;
constexpr int kCols = 5;

// Printable ASCII 0x20..0x7e, one byte per row, bit 4 = leftmost column.
constexpr std::array<std::array<std::uint8_t, kRows>, 95> kGlyphs = {{
    {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00},  // ' '
    {0x04, 0x04, 0x04, 0x04, 0x04, 0x00, 0x04},  // '!'
    {0x1f, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1f},  // '"'
    {0x0a, 0x0a, 0x1f, 0x0a, 0x1f, 0x0a, 0x0a},  // '#'
    {0x1f, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1f},  // '$'
    {0x1f, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1f},  // '%'
    {0x1f, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1f},  // '&'
    {0x0c, 0x04, 0x08, 0x00, 0x00, 0x00, 0x00},  // "'"
    {0x02, 0x04, 0x08, 0x08, 0x08, 0x04, 0x02},  // '('
    {0x08, 0x04, 0x02, 0x02, 0x02, 0x04, 0x08},  // ')'
    {0x1f, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1f},  // '*'
    {0x00, 0x04, 0x04, 0x1f, 0x04, 0x04, 0x00},  // '+'
    {0x00, 0x00, 0x00, 0x00, 0x0c, 0x04, 0x08},  // ','
    {0x00, 0x00, 0x00, 0x1f, 0x00, 0x00, 0x00},  // '-'
    {0x00, 0x00, 0x00, 0x00, 0x00, 0x0c, 0x0c},  // '.'
    {0x00, 0x01, 0x02, 0x04, 0x08, 0x10, 0x00},  // '/'
    {0x0e, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0e},  // '0'
    {0x04, 0x0c, 0x04, 0x04, 0x04, 0x04, 0x0e},  // '1'
    {0x0e, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1f},  // '2'
    {0x1f, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0e},  // '3'
    {0x02, 0x06, 0x0a, 0x12, 0x1f, 0x02, 0x02},  // '4'
    {0x1f, 0x10, 0x1e, 0x01, 0x01, 0x11, 0x0e},  // '5'
    {0x06, 0x08, 0x10, 0x1e, 0x11, 0x11, 0x0e},  // '6'
    {0x1f, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08},  // '7'
    {0x0e, 0x11, 0x11, 0x0e, 0x11, 0x11, 0x0e},  // '8'
    {0x0e, 0x11, 0x11, 0x0f, 0x01, 0x02, 0x0c},  // '9'
    {0x00, 0x0c, 0x0c, 0x00, 0x0c, 0x0c, 0x00},  // ':'
    {0x1f, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1f},  // ';'
    {0x1f, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1f},  // '<'
    {0x00, 0x00, 0x1f, 0x00, 0x1f, 0x00, 0x00},  // '='
    {0x1f, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1f},  // '>'
    {0x0e, 0x11, 0x01, 0x02, 0x04, 0x00, 0x04},  // '?'
    {0x1f, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1f},  // '@'
    {0x0e, 0x11, 0x11, 0x1f, 0x11, 0x11, 0x11},  // 'A'
    {0x1e, 0x11, 0x11, 0x1e, 0x11, 0x11, 0x1e},  // 'B'
    {0x0e, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0e},  // 'C'
    {0x1c, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1c},  // 'D'
    {0x1f, 0x10, 0x10, 0x1e, 0x10, 0x10, 0x1f},  // 'E'
    {0x1f, 0x10, 0x10, 0x1e, 0x10, 0x10, 0x10},  // 'F'
    {0x0e, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0f},  // 'G'
    {0x11, 0x11, 0x11, 0x1f, 0x11, 0x11, 0x11},  // 'H'
    {0x0e, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0e},  // 'I'
    {0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0c},  // 'J'
    {0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11},  // 'K'
    {0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1f},  // 'L'
    {0x11, 0x1b, 0x15, 0x15, 0x11, 0x11, 0x11},  // 'M'
    {0x11, 0x11, 0x19, 0x15, 0x13, 0x11, 0x11},  // 'N'
    {0x0e, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0e},  // 'O'
    {0x1e, 0x11, 0x11, 0x1e, 0x10, 0x10, 0x10},  // 'P'
    {0x0e, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0d},  // 'Q'
    {0x1e, 0x11, 0x11, 0x1e, 0x14, 0x12, 0x11},  // 'R'
    {0x0f, 0x10, 0x10, 0x0e, 0x01, 0x01, 0x1e},  // 'S'
    {0x1f, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04},  // 'T'
    {0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0e},  // 'U'
    {0x11, 0x11, 0x11, 0x11, 0x11, 0x0a, 0x04},  // 'V'
    {0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0a},  // 'W'
    {0x11, 0x11, 0x0a, 0x04, 0x0a, 0x11, 0x11},  // 'X'
    {0x11, 0x11, 0x0a, 0x04, 0x04, 0x04, 0x04},  // 'Y'
    {0x1f, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1f},  // 'Z'
    {0x1f, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1f},  // '['
    {0x1f, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1f},  // '\\'
    {0x1f, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1f},  // ']'
    {0x1f, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1f},  // '^'
    {0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x1f},  // '_'
    {0x1f, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1f},  // '`'
    {0x00, 0x00, 0x0e, 0x01, 0x0f, 0x11, 0x0f},  // 'a'
    {0x10, 0x10, 0x16, 0x19, 0x11, 0x11, 0x1e},  // 'b'
    {0x00, 0x00, 0x0e, 0x10, 0x10, 0x11, 0x0e},  // 'c'
    {0x01, 0x01, 0x0d, 0x13, 0x11, 0x11, 0x0f},  // 'd'
    {0x00, 0x00, 0x0e, 0x11, 0x1f, 0x10, 0x0e},  // 'e'
    {0x06, 0x09, 0x08, 0x1c, 0x08, 0x08, 0x08},  // 'f'
    {0x00, 0x0f, 0x11, 0x11, 0x0f, 0x01, 0x0e},  // 'g'
    {0x10, 0x10, 0x16, 0x19, 0x11, 0x11, 0x11},  // 'h'
    {0x04, 0x00, 0x0c, 0x04, 0x04, 0x04, 0x0e},  // 'i'
    {0x02, 0x00, 0x06, 0x02, 0x02, 0x12, 0x0c},  // 'j'
    {0x10, 0x10, 0x12, 0x14, 0x18, 0x14, 0x12},  // 'k'
    {0x0c, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0e},  // 'l'
    {0x00, 0x00, 0x1a, 0x15, 0x15, 0x11, 0x11},  // 'm'
    {0x00, 0x00, 0x16, 0x19, 0x11, 0x11, 0x11},  // 'n'
    {0x00, 0x00, 0x0e, 0x11, 0x11, 0x11, 0x0e},  // 'o'
    {0x00, 0x00, 0x1e, 0x11, 0x1e, 0x10, 0x10},  // 'p'
    {0x00, 0x00, 0x0d, 0x13, 0x0f, 0x01, 0x01},  // 'q'
    {0x00, 0x00, 0x16, 0x19, 0x10, 0x10, 0x10},  // 'r'
    {0x00, 0x00, 0x0e, 0x10, 0x0e, 0x01, 0x1e},  // 's'
    {0x08, 0x08, 0x1c, 0x08, 0x08, 0x09, 0x06},  // 't'
    {0x00, 0x00, 0x11, 0x11, 0x11, 0x13, 0x0d},  // 'u'
    {0x00, 0x00, 0x11, 0x11, 0x11, 0x0a, 0x04},  // 'v'
    {0x00, 0x00, 0x11, 0x11, 0x15, 0x15, 0x0a},  // 'w'
    {0x00, 0x00, 0x11, 0x0a, 0x04, 0x0a, 0x11},  // 'x'
    {0x00, 0x00, 0x11, 0x11, 0x0f, 0x01, 0x0e},  // 'y'
    {0x00, 0x00, 0x1f, 0x02, 0x04, 0x08, 0x1f},  // 'z'
    {0x1f, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1f},  // '{'
    {0x1f, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1f},  // '|'
    {0x1f, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1f},  // '}'
    {0x1f, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1f},  // '~'
}};

constexpr std::array<std::uint8_t, kRows> kMissing = {0x1f, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1f};

const std::array<std::uint8_t, kRows>& glyph_for(char ch) {
  const unsigned char c = static_cast<unsigned char>(ch);
  if (c < 0x20 || c > 0x7e) return kMissing;
  return kGlyphs[c - 0x20];
}

}  // namespace

int glyph_width(int font_height) { return std::max(1, (kCols * font_height + kRows / 2) / kRows); }

int glyph_spacing(int font_height) { return std::max(1, font_height / kRows); }

TextBox measure_text(std::string_view text, int font_height) {
  if (text.empty() || font_height < 1) return {};
  const int n = static_cast<int>(text.size());
  return {n * glyph_width(font_height) + (n - 1) * glyph_spacing(font_height), font_height};
}

void for_each_text_pixel(std::string_view text, int font_height, const std::function<void(int, int)>& fn) {
  if (font_height < 1) return;
  const int gw = glyph_width(font_height);
  const int advance = gw + glyph_spacing(font_height);
  for (size_t k = 0; k < text.size(); ++k) {
    const auto& rows = glyph_for(text[k]);
    const int x0 = static_cast<int>(k) * advance;
    for (int y = 0; y < font_height; ++y) {
      const std::uint8_t bits = rows[static_cast<size_t>(y * kRows / font_height)];
      if (!bits) continue;
      for (int x = 0; x < gw; ++x) {
        const int col = x * kCols / gw;
        if (bits & (1u << (kCols - 1 - col))) fn(x0 + x, y);
      }
    }
  }
}

}  // namespace vmark
