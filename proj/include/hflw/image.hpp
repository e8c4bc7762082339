#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace hflw {

template <class T>
struct Image {
  int width = 0;
  int height = 0;
  std::vector<T> data;

  Image() = default;
  Image(int w, int h, T fill = T{})
      : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {}

  T& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
  const T& at(int x, int y) const {
    return data[static_cast<size_t>(y) * width + x];
  }
  size_t size() const { return data.size(); }
  template <class U>
  bool same_dims(const Image<U>& o) const {
    return width == o.width && height == o.height;
  }
  bool in_bounds(int x, int y) const {
    return x >= 0 && x < width && y >= 0 && y < height;
  }
};

using ImageF = Image<float>;
using ImageD = Image<double>;
using ImageC = Image<std::complex<double>>;
using Mask = Image<uint8_t>;
using Labels = Image<int32_t>;

}  // namespace hflw
