#include "vmark/mask_codec.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "vmark/errors.hpp"

namespace vmark {

size_t Region::area() const {
  return static_cast<size_t>(std::count(cells.begin(), cells.end(), std::uint8_t{1}));
}

std::vector<std::uint32_t> rle_encode(std::span<const std::uint8_t> cells) {
  std::vector<std::uint32_t> runs;
  std::uint8_t current = 0;
  std::uint32_t length = 0;
  for (std::uint8_t c : cells) {
    const std::uint8_t v = c ? 1 : 0;
    if (v != current) {
      runs.push_back(length);
      current = v;
      length = 0;
    }
    ++length;
  }
  runs.push_back(length);
  return runs;
}

std::vector<std::uint8_t> rle_decode(std::span<const std::uint32_t> runs, size_t cell_count) {
  const std::uint64_t total = std::accumulate(runs.begin(), runs.end(), std::uint64_t{0});
  if (total != cell_count) {
    throw DataError("rle counts sum to " + std::to_string(total) + ", expected " +
                    std::to_string(cell_count));
  }
  std::vector<std::uint8_t> cells(cell_count, 0);
  size_t pos = 0;
  std::uint8_t value = 0;
  for (std::uint32_t run : runs) {
    if (value) std::fill_n(cells.begin() + static_cast<std::ptrdiff_t>(pos), run, std::uint8_t{1});
    pos += run;
    value ^= 1;
  }
  return cells;
}

InstanceMask InstanceMask::from_region(const Region& region, std::optional<double> score) {
  InstanceMask m;
  m.height = region.height;
  m.width = region.width;
  m.runs = rle_encode(region.cells);
  m.score = score;
  return m;
}

Region InstanceMask::decode() const {
  validate();
  Region r;
  r.height = height;
  r.width = width;
  r.cells = rle_decode(runs, static_cast<size_t>(height) * width);
  return r;
}

size_t InstanceMask::foreground_cells() const {
  size_t n = 0;
  for (size_t i = 1; i < runs.size(); i += 2) n += runs[i];
  return n;
}

void InstanceMask::validate() const {
  if (height <= 0 || width <= 0) {
    throw DataError("mask dimensions must be positive, got " + std::to_string(height) + "x" +
                    std::to_string(width));
  }
  const std::uint64_t total = std::accumulate(runs.begin(), runs.end(), std::uint64_t{0});
  if (total != static_cast<std::uint64_t>(height) * width) {
    throw DataError("rle counts sum to " + std::to_string(total) + ", expected " +
                    std::to_string(static_cast<std::uint64_t>(height) * width));
  }
  if (score && (*score < 0.0 || *score > 1.0)) {
    throw DataError("mask score outside [0,1]: " + std::to_string(*score));
  }
}

}  // namespace vmark
