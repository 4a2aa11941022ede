#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace vmark {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

namespace colors {
inline constexpr Rgb kBlack{0, 0, 0};
inline constexpr Rgb kWhite{255, 255, 255};
inline constexpr Rgb kRed{255, 0, 0};
inline constexpr Rgb kYellow{255, 255, 0};
inline constexpr Rgb kBlue{0, 0, 255};
inline constexpr Rgb kGreen{0, 128, 0};
}  // namespace colors

/// 8-bit RGB image, row-major, interleaved.
class Frame {
 public:
  Frame() = default;
  Frame(int height, int width, Rgb fill = {});

  int height() const { return height_; }
  int width() const { return width_; }
  bool empty() const { return pixels_.empty(); }

  Rgb at(int x, int y) const {
    const size_t i = index(x, y);
    return {pixels_[i], pixels_[i + 1], pixels_[i + 2]};
  }
  void set(int x, int y, Rgb c) {
    const size_t i = index(x, y);
    pixels_[i] = c.r;
    pixels_[i + 1] = c.g;
    pixels_[i + 2] = c.b;
  }
  std::uint8_t* data() { return pixels_.data(); }
  const std::uint8_t* data() const { return pixels_.data(); }
  const std::vector<std::uint8_t>& bytes() const { return pixels_; }

  friend bool operator==(const Frame&, const Frame&) = default;

 private:
  size_t index(int x, int y) const { return (static_cast<size_t>(y) * width_ + x) * 3; }

  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> pixels_;
};

// Binary PPM (P6, maxval 255) is the lossless interchange format for frames.
Frame read_ppm(const std::filesystem::path& path);
void write_ppm(const std::filesystem::path& path, const Frame& frame);
std::string encode_ppm(const Frame& frame);
Frame decode_ppm(std::string_view bytes, const std::string& origin = "<memory>");

/// Numbered frame file name inside a frame directory: 000001.ppm for t=1.
std::string frame_file_name(int index);
/// Counts consecutively numbered frames (1, 2, ...) present in `dir`.
int count_frames(const std::filesystem::path& dir);

// Raw stream: 16-byte header ("VMRK", then little-endian uint32 width,
// height, frame count) followed by frame_count * height * width * 3 bytes.
inline constexpr char kStreamMagic[4] = {'V', 'M', 'R', 'K'};

void write_stream_header(std::ostream& out, int width, int height, std::uint32_t frame_count);
void write_stream_frame(std::ostream& out, const Frame& frame);
void write_stream(std::ostream& out, const std::vector<Frame>& frames);
std::vector<Frame> read_stream(std::istream& in);

}  // namespace vmark
