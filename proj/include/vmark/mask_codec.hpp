#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace vmark {

/// Dense binary region over an H x W grid, row-major, one byte per cell
/// (0 or 1).
struct Region {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> cells;

  Region() = default;
  Region(int h, int w) : height(h), width(w), cells(static_cast<size_t>(h) * w, 0) {}

  std::uint8_t at(int x, int y) const { return cells[static_cast<size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return cells[static_cast<size_t>(y) * width + x]; }
  size_t area() const;
  bool same_shape(const Region& o) const { return height == o.height && width == o.width; }
  friend bool operator==(const Region&, const Region&) = default;
};

/// Instance mask as carried on the wire: dimensions plus uncompressed
/// row-major run lengths that alternate background/foreground, starting with
/// background (a leading 0 when the first cell is foreground).
struct InstanceMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint32_t> runs;
  std::optional<double> score;

  static InstanceMask from_region(const Region& region, std::optional<double> score = {});
  Region decode() const;
  size_t foreground_cells() const;
  bool empty() const { return foreground_cells() == 0; }
  /// Throws DataError if dimensions or run totals are inconsistent.
  void validate() const;
  friend bool operator==(const InstanceMask&, const InstanceMask&) = default;
};

std::vector<std::uint32_t> rle_encode(std::span<const std::uint8_t> cells);

/// Expands runs into `cell_count` cells. Throws DataError when the runs do
/// not sum to `cell_count`.
std::vector<std::uint8_t> rle_decode(std::span<const std::uint32_t> runs, size_t cell_count);

}  // namespace vmark
