#include "hflw/spectral.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <queue>

#include "hflw/errors.hpp"
#include "hflw/fft.hpp"

namespace hflw {
namespace {

std::vector<double> make_window(int n, Apodization apod) {
  std::vector<double> w(n, 1.0);
  if (apod == Apodization::kHann)
    for (int i = 0; i < n; ++i)
      w[i] = 0.5 * (1.0 - std::cos(2.0 * M_PI * i / n));
  return w;
}

struct BandInfo {
  std::vector<int> bins;       // all in-band bin indices
  std::vector<int> edge_bins;  // highest-|f| in-band bins (both signs)
  std::vector<double> freq;    // per in-band bin, Hz
};

BandInfo band_bins(int n, const SpectralWindowConfig& cfg, double fs) {
  BandInfo info;
  double max_af = -1.0;
  for (int k = 0; k < n; ++k) {
    const double f = bin_frequency_hz(k, n, fs);
    const double af = std::abs(f);
    if (af >= cfg.band_low_hz && af <= cfg.band_high_hz) {
      info.bins.push_back(k);
      info.freq.push_back(f);
      max_af = std::max(max_af, af);
    }
  }
  for (size_t i = 0; i < info.bins.size(); ++i)
    if (std::abs(std::abs(info.freq[i]) - max_af) < 1e-9)
      info.edge_bins.push_back(info.bins[i]);
  return info;
}

}  // namespace

void SpectralWindowConfig::validate(double frame_rate_hz) const {
  if (!(hop > 0 && hop <= window_len))
    throw ConfigError("spectral window: need 0 < hop <= window_len");
  if (!(svd_remove >= 0 && svd_remove < window_len))
    throw ConfigError("spectral window: svd_remove must be < window_len");
  if (!(band_low_hz >= 0 && band_low_hz < band_high_hz &&
        band_high_hz <= frame_rate_hz / 2))
    throw ConfigError("spectral window: band must satisfy 0 <= low < high <= fs/2");
}

std::vector<double> stft_power_spectrum(const std::vector<std::complex<double>>& series,
                                        Apodization apod) {
  const int n = static_cast<int>(series.size());
  if (n < 2) throw ConfigError("stft_power_spectrum: series too short");
  const std::vector<double> w = make_window(n, apod);
  std::vector<std::complex<double>> buf(n);
  for (int i = 0; i < n; ++i) buf[i] = series[i] * w[i];
  Fft1D fft(n);
  fft.forward(buf.data());
  std::vector<double> psd(n);
  for (int i = 0; i < n; ++i) psd[i] = std::norm(buf[i]);
  return psd;
}

double power_doppler(const std::vector<double>& psd,
                     const SpectralWindowConfig& cfg, double fs) {
  const BandInfo info = band_bins(static_cast<int>(psd.size()), cfg, fs);
  double m0 = 0.0;
  for (int k : info.bins) m0 += psd[k];
  return m0;
}

double spectral_moment2(const std::vector<double>& psd,
                        const SpectralWindowConfig& cfg, double fs,
                        bool* defined) {
  const BandInfo info = band_bins(static_cast<int>(psd.size()), cfg, fs);
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < info.bins.size(); ++i) {
    const double s = psd[info.bins[i]];
    num += info.freq[i] * info.freq[i] * s;
    den += s;
  }
  if (den <= 0.0) {
    if (defined) *defined = false;
    return 0.0;
  }
  if (defined) *defined = true;
  return num / den;
}

MomentMaps compute_moment_maps(const std::complex<float>* frames, int width,
                               int height, const SpectralWindowConfig& cfg,
                               double fs, int window_index,
                               int window_start_frame) {
  cfg.validate(fs);
  const int n = cfg.window_len;
  const size_t npix = static_cast<size_t>(width) * height;
  const std::vector<double> apod = make_window(n, cfg.apodization);
  const BandInfo info = band_bins(n, cfg, fs);

  MomentMaps maps;
  maps.m0 = ImageF(width, height);
  maps.m2 = ImageF(width, height);
  maps.defined = Mask(width, height);
  maps.saturated = Mask(width, height);
  maps.window_index = window_index;
  maps.window_start_frame = window_start_frame;

#pragma omp parallel
  {
    std::unique_ptr<Fft1D> fft;
#pragma omp critical(hflw_fft_plan)
    fft = std::make_unique<Fft1D>(n);
    std::vector<std::complex<double>> buf(n);

#pragma omp for schedule(static)
    for (long long p = 0; p < static_cast<long long>(npix); ++p) {
      for (int t = 0; t < n; ++t) {
        const std::complex<float> v = frames[static_cast<size_t>(t) * npix + p];
        buf[t] = std::complex<double>(v.real(), v.imag()) * apod[t];
      }
      fft->forward(buf.data());

      double m0 = 0.0, num = 0.0, edge = 0.0;
      for (size_t i = 0; i < info.bins.size(); ++i) {
        const double s = std::norm(buf[info.bins[i]]);
        m0 += s;
        num += info.freq[i] * info.freq[i] * s;
      }
      for (int k : info.edge_bins) edge += std::norm(buf[k]);

      maps.m0.data[p] = static_cast<float>(m0);
      if (m0 > 0.0) {
        maps.defined.data[p] = 1;
        maps.m2.data[p] = static_cast<float>(num / m0);
        if (edge > cfg.saturation_fraction * m0) maps.saturated.data[p] = 1;
      }
    }
  }
  return maps;
}

BackgroundEstimate estimate_background(const ImageF& m2, const Mask& defined,
                                       const Mask& artery_mask,
                                       double ring_inner_px,
                                       double ring_outer_px) {
  if (!(ring_inner_px < ring_outer_px))
    throw ConfigError("estimate_background: ring_inner must be < ring_outer");
  if (!m2.same_dims(artery_mask))
    throw ConfigError("estimate_background: mask/image dimensions differ");

  // Precompute annulus offsets once.
  std::vector<std::pair<int, int>> offsets;
  const int r = static_cast<int>(std::ceil(ring_outer_px));
  for (int dy = -r; dy <= r; ++dy)
    for (int dx = -r; dx <= r; ++dx) {
      const double d = std::sqrt(double(dx) * dx + double(dy) * dy);
      if (d > ring_inner_px && d <= ring_outer_px) offsets.emplace_back(dx, dy);
    }

  BackgroundEstimate result;
  result.m2_background = ImageF(m2.width, m2.height);
  int fallbacks = 0;

#pragma omp parallel for schedule(static) reduction(+ : fallbacks)
  for (int y = 0; y < m2.height; ++y) {
    std::vector<float> ring;
    for (int x = 0; x < m2.width; ++x) {
      if (!artery_mask.at(x, y)) continue;
      ring.clear();
      for (const auto& [dx, dy] : offsets) {
        const int nx = x + dx, ny = y + dy;
        if (!m2.in_bounds(nx, ny)) continue;
        if (artery_mask.at(nx, ny) || !defined.at(nx, ny)) continue;
        ring.push_back(m2.at(nx, ny));
      }
      if (!ring.empty()) {
        const size_t mid = ring.size() / 2;
        std::nth_element(ring.begin(), ring.begin() + mid, ring.end());
        float med = ring[mid];
        if (ring.size() % 2 == 0) {
          const float lo = *std::max_element(ring.begin(), ring.begin() + mid);
          med = 0.5f * (med + lo);
        }
        result.m2_background.at(x, y) = med;
      } else {
        // Expanding search for the nearest valid non-artery pixel.
        ++fallbacks;
        bool found = false;
        for (int rad = 1; rad < std::max(m2.width, m2.height) && !found; ++rad) {
          float best = 0.0f;
          double best_d = 1e30;
          for (int dy = -rad; dy <= rad; ++dy)
            for (int dx = -rad; dx <= rad; ++dx) {
              if (std::max(std::abs(dx), std::abs(dy)) != rad) continue;
              const int nx = x + dx, ny = y + dy;
              if (!m2.in_bounds(nx, ny)) continue;
              if (artery_mask.at(nx, ny) || !defined.at(nx, ny)) continue;
              const double d = double(dx) * dx + double(dy) * dy;
              if (d < best_d) { best_d = d; best = m2.at(nx, ny); found = true; }
            }
          if (found) result.m2_background.at(x, y) = best;
        }
      }
    }
  }
  result.fallback_count = fallbacks;
  return result;
}

BroadeningMap differential_broadening(const ImageF& m2, const ImageF& m2_background,
                                      const Mask& artery_mask, const Mask& defined,
                                      const Mask& saturated) {
  BroadeningMap bmap;
  bmap.delta_f = ImageF(m2.width, m2.height);
  bmap.saturated = saturated;
  for (size_t p = 0; p < m2.size(); ++p) {
    if (!artery_mask.data[p] || !defined.data[p]) continue;
    const double diff = double(m2.data[p]) - double(m2_background.data[p]);
    const double df = std::sqrt(std::abs(diff));
    bmap.delta_f.data[p] = static_cast<float>(diff < 0 ? -df : df);
  }
  return bmap;
}

VelocityMap velocity_from_broadening(const BroadeningMap& bmap,
                                     const OpticalParams& params) {
  params.validate();
  VelocityMap vel;
  vel.v = ImageF(bmap.delta_f.width, bmap.delta_f.height);
  const double scale = params.wavelength_m / params.numerical_aperture;
  for (size_t p = 0; p < bmap.delta_f.size(); ++p)
    vel.v.data[p] = static_cast<float>(scale * bmap.delta_f.data[p]);
  return vel;
}

}  // namespace hflw
