#pragma once

#include <complex>
#include <vector>

#include "hflw/image.hpp"
#include "hflw/params.hpp"

namespace hflw {

enum class Apodization { kNone, kHann };

struct SpectralWindowConfig {
  int window_len = 512;
  int hop = 256;
  int svd_remove = 8;
  double band_low_hz = 6000.0;
  double band_high_hz = 16500.0;
  Apodization apodization = Apodization::kHann;
  // Nyquist-clipping sentinel: flag a pixel when the outermost in-band bins
  // carry more than this fraction of in-band power.
  double saturation_fraction = 0.05;

  void validate(double frame_rate_hz) const;
  int window_count(int n_frames) const {
    return n_frames < window_len ? 0 : (n_frames - window_len) / hop + 1;
  }
};

struct MomentMaps {
  ImageF m0;        // in-band power
  ImageF m2;        // normalized second moment, Hz^2; valid where defined
  Mask defined;     // 1 where in-band power > 0
  Mask saturated;   // Nyquist-clipping sentinel
  int window_index = 0;
  int window_start_frame = 0;
};

struct BroadeningMap {
  ImageF delta_f;   // signed, Hz; zero outside the artery mask
  Mask saturated;
};

struct VelocityMap {
  ImageF v;  // signed, m/s
};

struct BackgroundEstimate {
  ImageF m2_background;  // defined on artery pixels only
  int fallback_count = 0;  // pixels resolved via nearest-neighbor fallback
};

// Per-pixel short-time spectrum: apodize, unitary DFT, squared magnitudes.
// Bin k maps to bin_frequency_hz(k, n, fs), axis (-fs/2, +fs/2].
std::vector<double> stft_power_spectrum(const std::vector<std::complex<double>>& series,
                                        Apodization apod);

// In-band integral of a single power spectrum (both frequency signs).
double power_doppler(const std::vector<double>& psd,
                     const SpectralWindowConfig& cfg, double fs);

// Normalized in-band second moment of a single power spectrum; defined=false
// when the in-band power is zero.
double spectral_moment2(const std::vector<double>& psd,
                        const SpectralWindowConfig& cfg, double fs,
                        bool* defined);

// Fused per-window kernel: clutter-filtered frames -> M0/M2/flags.
// OpenMP-parallel over pixels, bit-deterministic across thread counts.
MomentMaps compute_moment_maps(const std::complex<float>* frames, int width,
                               int height, const SpectralWindowConfig& cfg,
                               double fs, int window_index = 0,
                               int window_start_frame = 0);

// Per artery pixel, the median M2 over an annular neighborhood
// ring_inner_px < r <= ring_outer_px, excluding artery and undefined pixels.
// Empty annulus falls back to the nearest valid non-artery pixel.
BackgroundEstimate estimate_background(const ImageF& m2, const Mask& defined,
                                       const Mask& artery_mask,
                                       double ring_inner_px,
                                       double ring_outer_px);

// Signed differential broadening: delta_f = sign(M2-M2bg)*sqrt(|M2-M2bg|) on
// artery pixels, zero elsewhere. Saturation flags pass through.
BroadeningMap differential_broadening(const ImageF& m2, const ImageF& m2_background,
                                      const Mask& artery_mask, const Mask& defined,
                                      const Mask& saturated);

// v = lambda * delta_f / NA, pixel-wise.
VelocityMap velocity_from_broadening(const BroadeningMap& bmap,
                                     const OpticalParams& params);

}  // namespace hflw
