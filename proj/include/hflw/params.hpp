#pragma once

#include <cstdint>
#include <vector>

#include "hflw/errors.hpp"

namespace hflw {

struct OpticalParams {
  double wavelength_m = 852e-9;
  double numerical_aperture = 0.124;
  double frame_rate_hz = 33000.0;
  double pixel_pitch_m = 20e-6;
  double propagation_distance_m = 0.0;
  double papilla_diameter_m = 1.8e-3;

  void validate() const {
    if (!(wavelength_m > 0)) throw ConfigError("wavelength_m must be > 0");
    if (!(numerical_aperture > 0 && numerical_aperture < 1))
      throw ConfigError("numerical_aperture must be in (0, 1)");
    if (!(frame_rate_hz > 0)) throw ConfigError("frame_rate_hz must be > 0");
    if (!(pixel_pitch_m > 0)) throw ConfigError("pixel_pitch_m must be > 0");
    if (!(papilla_diameter_m > 0))
      throw ConfigError("papilla_diameter_m must be > 0");
  }
};

// Raw 16-bit camera frames, frame-major, row-major within a frame.
struct InterferogramStack {
  int width = 0;
  int height = 0;
  int frame_count = 0;
  int bit_depth = 16;
  std::vector<uint16_t> frames;
  OpticalParams params;

  size_t frame_pixels() const { return static_cast<size_t>(width) * height; }
  const uint16_t* frame(int i) const { return frames.data() + frame_pixels() * i; }
  uint16_t* frame(int i) { return frames.data() + frame_pixels() * i; }

  void validate() const {
    params.validate();
    if (width <= 0 || height <= 0 || frame_count <= 0)
      throw DataError("interferogram stack has empty dimensions");
    if (frames.size() != frame_pixels() * static_cast<size_t>(frame_count))
      throw DataError("interferogram stack frame buffer size mismatch");
  }
};

// Complex field frames after Fresnel rendering. Stored single-precision;
// spectral kernels accumulate in double.
struct HologramStack {
  int width = 0;
  int height = 0;
  int frame_count = 0;
  std::vector<std::complex<float>> frames;
  OpticalParams params;

  size_t frame_pixels() const { return static_cast<size_t>(width) * height; }
  const std::complex<float>* frame(int i) const {
    return frames.data() + frame_pixels() * i;
  }
  std::complex<float>* frame(int i) {
    return frames.data() + frame_pixels() * i;
  }
};

}  // namespace hflw
