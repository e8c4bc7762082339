#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <utility>
#include <vector>

#include "hflw/image.hpp"
#include "hflw/params.hpp"
#include "hflw/spectral.hpp"

namespace hflw {

struct PhantomVessel {
  std::vector<std::array<double, 2>> centerline;  // polyline, pixel coords
  double radius_px = 4.0;
  double peak_delta_f_hz = 2000.0;
  double pulsatility = 0.0;       // amplitude fraction of the peak
  double cardiac_freq_hz = 1.2;
};

struct PhantomSpec {
  int width = 128;
  int height = 128;
  int frame_count = 2048;
  OpticalParams params;
  double background_sigma_hz = 3000.0;
  std::vector<PhantomVessel> vessels;
  double reference_beam_amplitude = 150.0;
  double scattered_amplitude = 1.0;
  double noise_floor = 1e-4;      // white noise relative to reference power
  uint64_t rng_seed = 1;
  double papilla_diameter_px = 120.0;
  SpectralWindowConfig window;    // band and windowing the truth refers to
  int synth_segment_len = 256;    // piecewise-stationary synthesis blocks
};

struct PhantomTruth {
  Mask artery_raster;
  std::vector<ImageF> delta_f;                       // per window, Hz
  std::vector<ImageF> velocity;                      // per window, m/s
  std::vector<std::vector<double>> section_flows_ul_min;  // [vessel][window]
  std::vector<double> total_flow_ul_min;             // per window
  std::vector<double> time_s;                        // window centers
  double pixel_scale_m_per_px = 0.0;
  double papilla_diameter_px = 0.0;
  double m2_background_hz2 = 0.0;
};

// Band-limited normalized second moment of a Gaussian power spectral density
// of width sigma_hz over |f| in [lo, hi], in closed form (erf).
double band_m2_of_gaussian(double sigma_hz, double band_low_hz,
                           double band_high_hz);

// sigma -> infinity limit: (a^2 + a b + b^2) / 3.
double band_m2_flat_limit(double band_low_hz, double band_high_hz);

// Solve band_m2_of_gaussian(sigma) = band_m2_of_gaussian(sigma_bg) + df^2 by
// bisection; throws NumericError naming the band limit when no sigma exists.
double solve_sigma_for_broadening(double delta_f_hz, double sigma_bg_hz,
                                  double band_low_hz, double band_high_hz);

// Circular complex Gaussian process with a Gaussian-shaped power spectral
// density of width sigma_hz, unit average power, synthesized by
// frequency-domain shaping of white noise. Deterministic in the seed.
std::vector<std::complex<double>> gaussian_doppler_series(double sigma_hz,
                                                          int n_frames,
                                                          double fs,
                                                          uint64_t seed);

// Synthesize the interferogram stack and its ground truth.
std::pair<InterferogramStack, PhantomTruth> generate_phantom(const PhantomSpec& spec);

// Deterministic per-pixel seed derivation.
uint64_t mix_seed(uint64_t seed, uint64_t x, uint64_t y);

}  // namespace hflw
