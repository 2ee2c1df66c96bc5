#include "ssf/png.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace ssf {
namespace {

std::uint32_t crc32_update(std::uint32_t crc, const std::uint8_t* data, std::size_t size) {
  static std::uint32_t table[256];
  static bool init = false;
  if (!init) {
    for (std::uint32_t i = 0; i < 256; ++i) {
      std::uint32_t c = i;
      for (int k = 0; k < 8; ++k) c = (c & 1) ? 0xedb88320u ^ (c >> 1) : c >> 1;
      table[i] = c;
    }
    init = true;
  }
  for (std::size_t i = 0; i < size; ++i) crc = table[(crc ^ data[i]) & 0xff] ^ (crc >> 8);
  return crc;
}

void put_u32_be(std::vector<std::uint8_t>& out, std::uint32_t v) {
  out.push_back((v >> 24) & 0xff);
  out.push_back((v >> 16) & 0xff);
  out.push_back((v >> 8) & 0xff);
  out.push_back(v & 0xff);
}

void append_chunk(std::vector<std::uint8_t>& out, const char type[4],
                  const std::vector<std::uint8_t>& body) {
  put_u32_be(out, static_cast<std::uint32_t>(body.size()));
  const std::size_t crc_start = out.size();
  out.insert(out.end(), type, type + 4);
  out.insert(out.end(), body.begin(), body.end());
  std::uint32_t crc = crc32_update(0xffffffffu, out.data() + crc_start, out.size() - crc_start);
  put_u32_be(out, crc ^ 0xffffffffu);
}

// zlib stream with stored (uncompressed) deflate blocks.
std::vector<std::uint8_t> zlib_store(const std::vector<std::uint8_t>& raw) {
  std::vector<std::uint8_t> out;
  out.push_back(0x78);
  out.push_back(0x01);
  std::size_t pos = 0;
  while (pos < raw.size() || raw.empty()) {
    const std::size_t block = std::min<std::size_t>(raw.size() - pos, 65535);
    const bool final = pos + block >= raw.size();
    out.push_back(final ? 1 : 0);
    out.push_back(block & 0xff);
    out.push_back((block >> 8) & 0xff);
    out.push_back(~block & 0xff);
    out.push_back((~block >> 8) & 0xff);
    out.insert(out.end(), raw.begin() + static_cast<long>(pos),
               raw.begin() + static_cast<long>(pos + block));
    pos += block;
    if (final) break;
  }
  std::uint32_t s1 = 1, s2 = 0;
  for (std::uint8_t b : raw) {
    s1 = (s1 + b) % 65521;
    s2 = (s2 + s1) % 65521;
  }
  put_u32_be(out, (s2 << 16) | s1);
  return out;
}

}  // namespace

Image::Image(int width, int height, std::uint8_t r, std::uint8_t g, std::uint8_t b)
    : width_(width), height_(height),
      pixels_(static_cast<std::size_t>(width) * height * 3) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("image: bad dimensions");
  for (int y = 0; y < height; ++y)
    for (int x = 0; x < width; ++x) set_pixel(x, y, r, g, b);
}

void Image::set_pixel(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  if (x < 0 || x >= width_ || y < 0 || y >= height_) return;
  const std::size_t i = (static_cast<std::size_t>(y) * width_ + x) * 3;
  pixels_[i] = r;
  pixels_[i + 1] = g;
  pixels_[i + 2] = b;
}

void Image::fill_rect(int x0, int y0, int x1, int y1, std::uint8_t r, std::uint8_t g,
                      std::uint8_t b) {
  for (int y = std::max(0, y0); y < std::min(height_, y1); ++y)
    for (int x = std::max(0, x0); x < std::min(width_, x1); ++x) set_pixel(x, y, r, g, b);
}

void Image::write_png(const std::string& path) const {
  std::vector<std::uint8_t> raw;
  raw.reserve(static_cast<std::size_t>(height_) * (static_cast<std::size_t>(width_) * 3 + 1));
  for (int y = 0; y < height_; ++y) {
    raw.push_back(0);  // filter: none
    const std::size_t row = static_cast<std::size_t>(y) * width_ * 3;
    raw.insert(raw.end(), pixels_.begin() + static_cast<long>(row),
               pixels_.begin() + static_cast<long>(row + static_cast<std::size_t>(width_) * 3));
  }

  std::vector<std::uint8_t> out = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  std::vector<std::uint8_t> ihdr;
  put_u32_be(ihdr, static_cast<std::uint32_t>(width_));
  put_u32_be(ihdr, static_cast<std::uint32_t>(height_));
  ihdr.push_back(8);   // bit depth
  ihdr.push_back(2);   // color type: truecolor
  ihdr.push_back(0);   // compression
  ihdr.push_back(0);   // filter
  ihdr.push_back(0);   // interlace
  append_chunk(out, "IHDR", ihdr);
  append_chunk(out, "IDAT", zlib_store(raw));
  append_chunk(out, "IEND", {});

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw std::runtime_error("png: cannot write " + path);
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
}

void write_bar_chart_png(const std::string& path, const std::vector<double>& values, int width,
                         int height) {
  Image img(width, height);
  if (values.empty()) {
    img.write_png(path);
    return;
  }
  const double peak = std::max(1e-12, *std::max_element(values.begin(), values.end()));
  const int margin = 20;
  const int plot_w = width - 2 * margin;
  const int plot_h = height - 2 * margin;
  const double bar_w = static_cast<double>(plot_w) / static_cast<double>(values.size());
  img.fill_rect(margin - 1, height - margin, width - margin + 1, height - margin + 1, 0, 0, 0);
  for (std::size_t i = 0; i < values.size(); ++i) {
    const int h = static_cast<int>(std::max(0.0, values[i]) / peak * plot_h);
    const int x0 = margin + static_cast<int>(i * bar_w) + 1;
    const int x1 = margin + static_cast<int>((i + 1) * bar_w) - 1;
    img.fill_rect(x0, height - margin - h, x1, height - margin, 70, 110, 190);
  }
  img.write_png(path);
}

}  // namespace ssf
