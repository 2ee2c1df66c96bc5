#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ssf {

// Minimal RGB raster with a PNG writer (stored deflate blocks, no
// dependencies).  Only used for the optional `stats` plot output.
class Image {
 public:
  Image(int width, int height, std::uint8_t r = 255, std::uint8_t g = 255, std::uint8_t b = 255);

  int width() const { return width_; }
  int height() const { return height_; }
  void set_pixel(int x, int y, std::uint8_t r, std::uint8_t g, std::uint8_t b);
  void fill_rect(int x0, int y0, int x1, int y1, std::uint8_t r, std::uint8_t g, std::uint8_t b);

  void write_png(const std::string& path) const;

 private:
  int width_;
  int height_;
  std::vector<std::uint8_t> pixels_;  // RGB rows
};

// Bar chart of nonnegative values, optionally with tick labels baked in as
// simple grid lines.
void write_bar_chart_png(const std::string& path, const std::vector<double>& values,
                         int width = 640, int height = 360);

}  // namespace ssf
