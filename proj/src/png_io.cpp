#include "hflw/png_io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <memory>

#include "hflw/errors.hpp"

namespace hflw {
namespace {

struct FileCloser {
  void operator()(std::FILE* f) const { if (f) std::fclose(f); }
};

void write_png(const std::string& path, int width, int height, int channels,
               const uint8_t* rows) {
  std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "wb"));
  if (!fp) throw DataError("cannot open for writing: " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                            nullptr, nullptr);
  png_infop info = png_create_info_struct(png);
  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw DataError("libpng failure writing " + path);
  }
  png_init_io(png, fp.get());
  png_set_IHDR(png, info, width, height, 8,
               channels == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  std::vector<png_bytep> row_ptrs(height);
  for (int y = 0; y < height; ++y)
    row_ptrs[y] = const_cast<png_bytep>(rows + static_cast<size_t>(y) * width * channels);
  png_write_image(png, row_ptrs.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
}

}  // namespace

void write_png_gray(const std::string& path, const Mask& img) {
  write_png(path, img.width, img.height, 1, img.data.data());
}

void write_png_rgb(const std::string& path, const RgbImage& img) {
  static_assert(sizeof(Rgb) == 3);
  write_png(path, img.width, img.height, 3,
            reinterpret_cast<const uint8_t*>(img.data.data()));
}

Mask to_gray(const ImageF& img) {
  float lo = 1e30f, hi = -1e30f;
  for (float v : img.data) { lo = std::min(lo, v); hi = std::max(hi, v); }
  const float span = hi > lo ? hi - lo : 1.0f;
  Mask out(img.width, img.height);
  for (size_t p = 0; p < img.size(); ++p)
    out.data[p] = static_cast<uint8_t>(
        std::clamp(255.0f * (img.data[p] - lo) / span, 0.0f, 255.0f));
  return out;
}

RgbImage overlay_mask(const ImageF& backdrop, const Mask& mask) {
  const Mask gray = to_gray(backdrop);
  RgbImage out(backdrop.width, backdrop.height);
  for (size_t p = 0; p < out.size(); ++p) {
    const uint8_t g = gray.data[p];
    out.data[p] = mask.data[p] ? Rgb{255, static_cast<uint8_t>(g / 3),
                                     static_cast<uint8_t>(g / 3)}
                               : Rgb{g, g, g};
  }
  return out;
}

RgbImage render_plot(const std::vector<PlotSeries>& series, int width,
                     int height) {
  RgbImage img(width, height, Rgb{255, 255, 255});
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& s : series)
    for (size_t i = 0; i < s.x.size(); ++i) {
      x0 = std::min(x0, s.x[i]); x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, s.y[i]); y1 = std::max(y1, s.y[i]);
    }
  if (!(x1 > x0)) { x0 -= 1; x1 += 1; }
  if (!(y1 > y0)) { y0 -= 1; y1 += 1; }
  const int margin = 40;
  auto px = [&](double x) {
    return margin + (x - x0) / (x1 - x0) * (width - 2 * margin);
  };
  auto py = [&](double y) {
    return height - margin - (y - y0) / (y1 - y0) * (height - 2 * margin);
  };
  // Axes.
  for (int x = margin; x < width - margin; ++x)
    img.at(x, height - margin) = Rgb{0, 0, 0};
  for (int y = margin; y < height - margin; ++y)
    img.at(margin, y) = Rgb{0, 0, 0};

  auto draw_line = [&](double xa, double ya, double xb, double yb, Rgb c) {
    const int steps = std::max(2, static_cast<int>(
        std::hypot(px(xb) - px(xa), py(yb) - py(ya)) * 2));
    for (int i = 0; i <= steps; ++i) {
      const double t = static_cast<double>(i) / steps;
      const int x = static_cast<int>(std::lround(px(xa + t * (xb - xa))));
      const int y = static_cast<int>(std::lround(py(ya + t * (yb - ya))));
      if (img.in_bounds(x, y)) img.at(x, y) = c;
    }
  };
  for (const auto& s : series)
    for (size_t i = 0; i + 1 < s.x.size(); ++i)
      draw_line(s.x[i], s.y[i], s.x[i + 1], s.y[i + 1], s.color);
  return img;
}

}  // namespace hflw
