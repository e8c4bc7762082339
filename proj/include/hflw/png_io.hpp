#pragma once

#include <string>
#include <vector>

#include "hflw/image.hpp"

namespace hflw {

struct Rgb {
  uint8_t r = 0, g = 0, b = 0;
};

using RgbImage = Image<Rgb>;

void write_png_gray(const std::string& path, const Mask& img);
void write_png_rgb(const std::string& path, const RgbImage& img);

// Map a float image to 8-bit gray by min/max stretch.
Mask to_gray(const ImageF& img);

// Gray backdrop with mask pixels tinted red (Fig.-3-style composite).
RgbImage overlay_mask(const ImageF& backdrop, const Mask& mask);

// Minimal line-plot rasterizer: one or more series on a white canvas.
struct PlotSeries {
  std::vector<double> x;
  std::vector<double> y;
  Rgb color;
};
RgbImage render_plot(const std::vector<PlotSeries>& series, int width = 800,
                     int height = 480);

}  // namespace hflw
