#include "vmark/frame.hpp"

#include <array>
#include <cctype>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "vmark/errors.hpp"

namespace vmark {

Frame::Frame(int height, int width, Rgb fill) : height_(height), width_(width) {
  if (height < 0 || width < 0) throw InputError("negative frame dimensions");
  pixels_.resize(static_cast<size_t>(height) * width * 3);
  for (size_t i = 0; i < pixels_.size(); i += 3) {
    pixels_[i] = fill.r;
    pixels_[i + 1] = fill.g;
    pixels_[i + 2] = fill.b;
  }
}

std::string encode_ppm(const Frame& frame) {
  std::string out = "P6\n" + std::to_string(frame.width()) + " " + std::to_string(frame.height()) + "\n255\n";
  out.append(reinterpret_cast<const char*>(frame.data()), frame.bytes().size());
  return out;
}

namespace {

// Reads one header integer, skipping whitespace and '#' comments.
int read_header_int(std::string_view bytes, size_t& pos, const std::string& origin) {
  while (pos < bytes.size()) {
    const unsigned char c = static_cast<unsigned char>(bytes[pos]);
    if (std::isspace(c)) {
      ++pos;
    } else if (c == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else {
      break;
    }
  }
  long value = 0;
  size_t start = pos;
  while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) {
    value = value * 10 + (bytes[pos] - '0');
    if (value > 1'000'000) throw DataError(origin + ": ppm header value too large");
    ++pos;
  }
  if (pos == start) throw DataError(origin + ": malformed ppm header");
  return static_cast<int>(value);
}

}  // namespace

Frame decode_ppm(std::string_view bytes, const std::string& origin) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') {
    throw DataError(origin + ": not a binary PPM (P6) image");
  }
  size_t pos = 2;
  const int width = read_header_int(bytes, pos, origin);
  const int height = read_header_int(bytes, pos, origin);
  const int maxval = read_header_int(bytes, pos, origin);
  if (maxval != 255) throw DataError(origin + ": only 8-bit PPM is supported");
  ++pos;  // single whitespace after maxval
  const size_t need = static_cast<size_t>(width) * height * 3;
  if (bytes.size() < pos + need) throw DataError(origin + ": truncated PPM pixel data");
  Frame frame(height, width);
  std::copy_n(bytes.data() + pos, need, reinterpret_cast<char*>(frame.data()));
  return frame;
}

Frame read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open frame " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return decode_ppm(ss.str(), path.string());
}

void write_ppm(const std::filesystem::path& path, const Frame& frame) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write frame " + path.string());
  const std::string bytes = encode_ppm(frame);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError("short write to " + path.string());
}

std::string frame_file_name(int index) {
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%06d.ppm", index);
  return buf.data();
}

int count_frames(const std::filesystem::path& dir) {
  int n = 0;
  while (std::filesystem::exists(dir / frame_file_name(n + 1))) ++n;
  return n;
}

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  const char b[4] = {static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                     static_cast<char>((v >> 16) & 0xff), static_cast<char>((v >> 24) & 0xff)};
  out.write(b, 4);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw DataError("truncated stream header");
  return b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace

void write_stream_header(std::ostream& out, int width, int height, std::uint32_t frame_count) {
  out.write(kStreamMagic, 4);
  put_u32(out, static_cast<std::uint32_t>(width));
  put_u32(out, static_cast<std::uint32_t>(height));
  put_u32(out, frame_count);
}

void write_stream_frame(std::ostream& out, const Frame& frame) {
  out.write(reinterpret_cast<const char*>(frame.data()), static_cast<std::streamsize>(frame.bytes().size()));
}

void write_stream(std::ostream& out, const std::vector<Frame>& frames) {
  const int w = frames.empty() ? 0 : frames.front().width();
  const int h = frames.empty() ? 0 : frames.front().height();
  write_stream_header(out, w, h, static_cast<std::uint32_t>(frames.size()));
  for (const Frame& f : frames) {
    if (f.width() != w || f.height() != h) throw DataError("stream frames must share dimensions");
    write_stream_frame(out, f);
  }
}

std::vector<Frame> read_stream(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || !std::equal(magic, magic + 4, kStreamMagic)) {
    throw DataError("bad raw stream magic");
  }
  const std::uint32_t width = get_u32(in);
  const std::uint32_t height = get_u32(in);
  const std::uint32_t count = get_u32(in);
  if (width > 1u << 15 || height > 1u << 15) throw DataError("raw stream dimensions too large");
  std::vector<Frame> frames;
  frames.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    Frame f(static_cast<int>(height), static_cast<int>(width));
    if (!in.read(reinterpret_cast<char*>(f.data()), static_cast<std::streamsize>(f.bytes().size()))) {
      throw DataError("truncated raw stream at frame " + std::to_string(i + 1));
    }
    frames.push_back(std::move(f));
  }
  return frames;
}

}  // namespace vmark
