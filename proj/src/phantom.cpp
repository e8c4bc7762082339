#include "hflw/phantom.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "hflw/errors.hpp"
#include "hflw/fft.hpp"
#include "hflw/flow.hpp"

namespace hflw {
namespace {

constexpr double kSqrtHalfPi = 1.2533141373155003;  // sqrt(pi/2)

// One-sided integrals of the Gaussian PSD over [a, b].
double gauss_i0(double a, double b, double sigma) {
  const double inv = 1.0 / (std::sqrt(2.0) * sigma);
  // erfc form avoids the catastrophic cancellation of erf(b)-erf(a) when the
  // band sits far out on a narrow Gaussian's tail.
  return sigma * kSqrtHalfPi * (std::erfc(a * inv) - std::erfc(b * inv));
}

double gauss_i2(double a, double b, double sigma) {
  const double s2 = sigma * sigma;
  const double ea = std::exp(-a * a / (2 * s2));
  const double eb = std::exp(-b * b / (2 * s2));
  return s2 * (a * ea - b * eb) + s2 * gauss_i0(a, b, sigma);
}

// splitmix64; fully specified, platform-independent.
uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

struct Rng {
  uint64_t state;
  explicit Rng(uint64_t seed) : state(seed) {}
  double uniform() {  // (0, 1]
    return (splitmix64(state) >> 11) * 0x1.0p-53 + 0x1.0p-54;
  }
  void gauss_pair(double& z1, double& z2) {
    const double r = std::sqrt(-2.0 * std::log(uniform()));
    const double th = 2.0 * M_PI * uniform();
    z1 = r * std::cos(th);
    z2 = r * std::sin(th);
  }
};

// Shaped-noise synthesis of one stationary block into out[0..n).
void synth_block(Rng& rng, Fft1D& fft, double sigma, double fs,
                 std::complex<double>* out, int n) {
  double total = 0.0;
  for (int k = 0; k < n; ++k) {
    const double f = bin_frequency_hz(k, n, fs);
    const double g = std::exp(-f * f / (2.0 * sigma * sigma));
    double z1, z2;
    rng.gauss_pair(z1, z2);
    const double amp = std::sqrt(0.5 * g);
    out[k] = std::complex<double>(z1 * amp, z2 * amp);
    total += g;
  }
  fft.inverse(out);
  const double scale = std::sqrt(static_cast<double>(n) / total);
  for (int k = 0; k < n; ++k) out[k] *= scale;
}

double point_segment_distance(double px, double py, double ax, double ay,
                              double bx, double by) {
  const double vx = bx - ax, vy = by - ay;
  const double len2 = vx * vx + vy * vy;
  double t = len2 > 0 ? ((px - ax) * vx + (py - ay) * vy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(px - (ax + t * vx), py - (ay + t * vy));
}

}  // namespace

uint64_t mix_seed(uint64_t seed, uint64_t x, uint64_t y) {
  uint64_t s = seed ^ (x * 0x9E3779B97F4A7C15ULL) ^ (y * 0xC2B2AE3D27D4EB4FULL);
  return splitmix64(s);
}

double band_m2_of_gaussian(double sigma_hz, double band_low_hz,
                           double band_high_hz) {
  const double den = gauss_i0(band_low_hz, band_high_hz, sigma_hz);
  if (den <= 0.0) return band_low_hz * band_low_hz;
  return gauss_i2(band_low_hz, band_high_hz, sigma_hz) / den;
}

double band_m2_flat_limit(double band_low_hz, double band_high_hz) {
  const double a = band_low_hz, b = band_high_hz;
  return (a * a + a * b + b * b) / 3.0;
}

double solve_sigma_for_broadening(double delta_f_hz, double sigma_bg_hz,
                                  double band_low_hz, double band_high_hz) {
  const double m2_bg = band_m2_of_gaussian(sigma_bg_hz, band_low_hz, band_high_hz);
  const double target = m2_bg + delta_f_hz * delta_f_hz;
  const double sigma_max = 1e3 * band_high_hz;
  const double m2_max = band_m2_of_gaussian(sigma_max, band_low_hz, band_high_hz);
  if (target >= m2_max) {
    const double limit = std::sqrt(m2_max - m2_bg);
    throw NumericError(
        "phantom: requested delta_f " + std::to_string(delta_f_hz) +
        " Hz exceeds the band-limited maximum of " + std::to_string(limit) +
        " Hz for background sigma " + std::to_string(sigma_bg_hz) + " Hz");
  }
  double lo = sigma_bg_hz, hi = sigma_max;
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (band_m2_of_gaussian(mid, band_low_hz, band_high_hz) < target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<std::complex<double>> gaussian_doppler_series(double sigma_hz,
                                                          int n_frames,
                                                          double fs,
                                                          uint64_t seed) {
  if (!(sigma_hz > 0 && sigma_hz < fs / 2))
    throw ConfigError("gaussian_doppler_series: need 0 < sigma < fs/2");
  std::vector<std::complex<double>> out(n_frames);
  Rng rng(seed);
  Fft1D fft(n_frames);
  synth_block(rng, fft, sigma_hz, fs, out.data(), n_frames);
  return out;
}

std::pair<InterferogramStack, PhantomTruth> generate_phantom(const PhantomSpec& spec) {
  spec.params.validate();
  spec.window.validate(spec.params.frame_rate_hz);
  if (spec.width <= 0 || spec.height <= 0 || spec.frame_count <= 0)
    throw ConfigError("phantom: empty dimensions");
  if (!(spec.background_sigma_hz > 0))
    throw ConfigError("phantom: background_sigma_hz must be > 0");

  const double fs = spec.params.frame_rate_hz;
  const double lo = spec.window.band_low_hz, hi = spec.window.band_high_hz;
  const double m2_bg = band_m2_of_gaussian(spec.background_sigma_hz, lo, hi);

  // Fail fast on unreachable broadening requests.
  for (const auto& v : spec.vessels)
    solve_sigma_for_broadening(v.peak_delta_f_hz * (1.0 + v.pulsatility),
                               spec.background_sigma_hz, lo, hi);

  // Per-pixel vessel assignment: deepest lumen position wins on overlap.
  const size_t npix = static_cast<size_t>(spec.width) * spec.height;
  std::vector<int> vessel_of(npix, -1);
  std::vector<float> lumen(npix, 0.0f);  // 1 - (r/R)^2
  for (int y = 0; y < spec.height; ++y)
    for (int x = 0; x < spec.width; ++x) {
      double best = 1.0;  // r/R
      int best_v = -1;
      for (size_t vi = 0; vi < spec.vessels.size(); ++vi) {
        const auto& v = spec.vessels[vi];
        double d = 1e300;
        for (size_t i = 0; i + 1 < v.centerline.size(); ++i)
          d = std::min(d, point_segment_distance(x, y, v.centerline[i][0],
                                                 v.centerline[i][1],
                                                 v.centerline[i + 1][0],
                                                 v.centerline[i + 1][1]));
        const double rel = d / v.radius_px;
        if (rel <= best) { best = rel; best_v = static_cast<int>(vi); }
      }
      if (best_v >= 0) {
        const size_t p = static_cast<size_t>(y) * spec.width + x;
        vessel_of[p] = best_v;
        lumen[p] = static_cast<float>(1.0 - best * best);
      }
    }

  const int seg_len = spec.synth_segment_len;
  const int n_segments = (spec.frame_count + seg_len - 1) / seg_len;

  InterferogramStack stack;
  stack.width = spec.width;
  stack.height = spec.height;
  stack.frame_count = spec.frame_count;
  stack.params = spec.params;
  stack.frames.resize(npix * static_cast<size_t>(spec.frame_count));

  auto pulse = [](const PhantomVessel& v, double t) {
    return 1.0 + v.pulsatility * std::sin(2.0 * M_PI * v.cardiac_freq_hz * t);
  };

#pragma omp parallel
  {
    std::unique_ptr<Fft1D> fft_full, fft_tail;
#pragma omp critical(hflw_fft_plan)
    {
      fft_full = std::make_unique<Fft1D>(seg_len);
      const int tail = spec.frame_count - (n_segments - 1) * seg_len;
      if (tail != seg_len) fft_tail = std::make_unique<Fft1D>(tail);
    }
    std::vector<std::complex<double>> block(seg_len);

#pragma omp for schedule(static)
    for (long long p = 0; p < static_cast<long long>(npix); ++p) {
      const int x = static_cast<int>(p % spec.width);
      const int y = static_cast<int>(p / spec.width);
      Rng rng(mix_seed(spec.rng_seed, x, y));
      Rng noise_rng(mix_seed(spec.rng_seed ^ 0xA5A5A5A5A5A5A5A5ULL, x, y));
      const double ref = spec.reference_beam_amplitude;
      const double noise_sigma = spec.noise_floor * ref * ref;

      for (int s = 0; s < n_segments; ++s) {
        const int start = s * seg_len;
        const int len = std::min(seg_len, spec.frame_count - start);
        const double t_center = (start + len / 2.0) / fs;

        double sigma = spec.background_sigma_hz;
        if (vessel_of[p] >= 0) {
          const auto& v = spec.vessels[vessel_of[p]];
          const double df = v.peak_delta_f_hz * lumen[p] * pulse(v, t_center);
          if (df > 0)
            sigma = solve_sigma_for_broadening(df, spec.background_sigma_hz, lo, hi);
        }

        Fft1D& fft = len == seg_len ? *fft_full : *fft_tail;
        synth_block(rng, fft, sigma, fs, block.data(), len);

        for (int t = 0; t < len; ++t) {
          const std::complex<double> field =
              std::complex<double>(ref, 0.0) + spec.scattered_amplitude * block[t];
          double intensity = std::norm(field);
          if (spec.noise_floor > 0) {
            double z1, z2;
            noise_rng.gauss_pair(z1, z2);
            intensity += noise_sigma * z1;
          }
          const double q = std::round(intensity);
          stack.frames[static_cast<size_t>(start + t) * npix + p] =
              static_cast<uint16_t>(std::clamp(q, 0.0, 65535.0));
        }
      }
    }
  }

  // Ground truth from the same forward model.
  PhantomTruth truth;
  truth.pixel_scale_m_per_px =
      spec.params.papilla_diameter_m / spec.papilla_diameter_px;
  truth.papilla_diameter_px = spec.papilla_diameter_px;
  truth.m2_background_hz2 = m2_bg;
  truth.artery_raster = Mask(spec.width, spec.height);
  for (size_t p = 0; p < npix; ++p)
    truth.artery_raster.data[p] = vessel_of[p] >= 0 ? 1 : 0;

  const int nw = spec.window.window_count(spec.frame_count);
  truth.section_flows_ul_min.assign(spec.vessels.size(),
                                    std::vector<double>(nw, 0.0));
  const double lambda = spec.params.wavelength_m;
  const double na = spec.params.numerical_aperture;
  for (int w = 0; w < nw; ++w) {
    const double t = (w * spec.window.hop + spec.window.window_len / 2.0) / fs;
    truth.time_s.push_back(t);
    ImageF df_map(spec.width, spec.height);
    ImageF v_map(spec.width, spec.height);
    for (size_t p = 0; p < npix; ++p) {
      if (vessel_of[p] < 0) continue;
      const auto& v = spec.vessels[vessel_of[p]];
      const double df = v.peak_delta_f_hz * lumen[p] * pulse(v, t);
      df_map.data[p] = static_cast<float>(df);
      v_map.data[p] = static_cast<float>(lambda * df / na);
    }
    truth.delta_f.push_back(std::move(df_map));
    truth.velocity.push_back(std::move(v_map));

    double total = 0.0;
    for (size_t vi = 0; vi < spec.vessels.size(); ++vi) {
      const auto& v = spec.vessels[vi];
      const double vmax = lambda * v.peak_delta_f_hz * pulse(v, t) / na;
      const double r_m = v.radius_px * truth.pixel_scale_m_per_px;
      const double q = 0.5 * vmax * M_PI * r_m * r_m;  // Poiseuille mean
      truth.section_flows_ul_min[vi][w] = q * kM3PerSecToUlPerMin;
      total += q * kM3PerSecToUlPerMin;
    }
    truth.total_flow_ul_min.push_back(total);
  }
  return {std::move(stack), std::move(truth)};
}

}  // namespace hflw
