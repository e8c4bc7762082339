#include "hflw/flow.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hflw/errors.hpp"
#include "hflw/segmentation.hpp"

namespace hflw {
namespace {

double bilinear(const ImageF& img, double x, double y, bool* outside) {
  if (x < 0 || y < 0 || x > img.width - 1 || y > img.height - 1) {
    *outside = true;
    return 0.0;
  }
  const int x0 = static_cast<int>(std::floor(x));
  const int y0 = static_cast<int>(std::floor(y));
  const int x1 = std::min(x0 + 1, img.width - 1);
  const int y1 = std::min(y0 + 1, img.height - 1);
  const double fx = x - x0, fy = y - y0;
  return (1 - fx) * (1 - fy) * img.at(x0, y0) + fx * (1 - fy) * img.at(x1, y0) +
         (1 - fx) * fy * img.at(x0, y1) + fx * fy * img.at(x1, y1);
}

std::vector<double> moving_average(const std::vector<double>& s, int w) {
  if (w <= 1) return s;
  std::vector<double> out(s.size());
  const int h = w / 2;
  for (int i = 0; i < static_cast<int>(s.size()); ++i) {
    double acc = 0.0;
    int n = 0;
    for (int j = i - h; j <= i + h; ++j)
      if (j >= 0 && j < static_cast<int>(s.size())) { acc += s[j]; ++n; }
    out[i] = acc / n;
  }
  return out;
}

}  // namespace

double pixel_scale_from_papilla(double papilla_diameter_px,
                                double papilla_diameter_m) {
  if (!(papilla_diameter_px > 0 && papilla_diameter_m > 0))
    throw ConfigError("pixel_scale_from_papilla: diameters must be > 0");
  return papilla_diameter_m / papilla_diameter_px;
}

std::vector<SectionSeed> select_sections(const Mask& artery_mask, double cx,
                                         double cy, double circle_radius_px,
                                         double circle_width_px) {
  if (!(circle_radius_px > circle_width_px / 2 && circle_width_px > 0))
    throw ConfigError("select_sections: need radius > width/2 > 0");
  if (cx < 0 || cy < 0 || cx > artery_mask.width - 1 || cy > artery_mask.height - 1)
    throw ConfigError("select_sections: circle center outside image");

  const double r_lo = circle_radius_px - circle_width_px / 2;
  const double r_hi = circle_radius_px + circle_width_px / 2;
  Mask annulus(artery_mask.width, artery_mask.height);
  for (int y = 0; y < annulus.height; ++y)
    for (int x = 0; x < annulus.width; ++x) {
      const double d = std::hypot(x - cx, y - cy);
      if (d >= r_lo && d <= r_hi && artery_mask.at(x, y)) annulus.at(x, y) = 1;
    }

  std::vector<int> sizes;
  Labels labels = label_components(annulus, 8, &sizes);
  std::vector<SectionSeed> seeds(sizes.size());
  for (int y = 0; y < labels.height; ++y)
    for (int x = 0; x < labels.width; ++x) {
      const int l = labels.at(x, y);
      if (l < 1) continue;
      seeds[l - 1].centroid_x += x;
      seeds[l - 1].centroid_y += y;
      seeds[l - 1].pixel_count += 1;
    }
  for (auto& s : seeds) {
    s.centroid_x /= s.pixel_count;
    s.centroid_y /= s.pixel_count;
  }
  if (seeds.empty())
    throw DataError("select_sections: no artery/annulus intersection; adjust radius");
  return seeds;
}

std::optional<ArterySection> extract_profile(const ImageF& velocity_map,
                                             const SectionSeed& seed,
                                             int half_len_px, int width_px) {
  const int nprof = 2 * half_len_px + 1;
  double best_score = -1e300;
  int best_deg = 0;
  std::vector<double> best_profile;
  std::vector<double> profile(nprof);

  for (int deg = 0; deg < 180; ++deg) {
    const double th = deg * M_PI / 180.0;
    // Vessel axis at angle th from vertical; cross-profile runs perpendicular.
    const double ax = std::sin(th), ay = std::cos(th);
    const double px = std::cos(th), py = -std::sin(th);
    bool outside = false;
    double peak = -1e300;
    for (int a = -half_len_px; a <= half_len_px; ++a) {
      double colsum = 0.0;
      for (int b = 0; b < width_px; ++b) {
        const double bb = b - (width_px - 1) / 2.0;
        const double x = seed.centroid_x + a * px + bb * ax;
        const double y = seed.centroid_y + a * py + bb * ay;
        colsum += bilinear(velocity_map, x, y, &outside);
      }
      if (outside) break;
      profile[a + half_len_px] = colsum / width_px;
      peak = std::max(peak, colsum);
    }
    // Any angle whose patch leaves the image disqualifies the section.
    if (outside) return std::nullopt;
    if (peak > best_score) {
      best_score = peak;
      best_deg = deg;
      best_profile = profile;
    }
  }

  ArterySection section;
  section.seed = seed;
  section.orientation_rad = best_deg * M_PI / 180.0;
  section.profile = std::move(best_profile);
  return section;
}

PoiseuilleFit fit_poiseuille(const std::vector<double>& profile,
                             double fit_floor_fraction) {
  PoiseuilleFit fit;
  const int n = static_cast<int>(profile.size());
  if (n < 5) return fit;
  const double vpeak = *std::max_element(profile.begin(), profile.end());
  if (!(vpeak > 0)) return fit;
  const double floor = fit_floor_fraction * vpeak;
  const double mid = (n - 1) / 2.0;

  // v(x) = A + B x + C x^2 on samples above the floor; quadratic normal
  // equations give the Poiseuille parameters in closed form.
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0, s4 = 0, t0 = 0, t1 = 0, t2 = 0;
  int used = 0;
  for (int i = 0; i < n; ++i) {
    if (profile[i] < floor) continue;
    const double x = i - mid;
    const double v = profile[i];
    s0 += 1; s1 += x; s2 += x * x; s3 += x * x * x; s4 += x * x * x * x;
    t0 += v; t1 += v * x; t2 += v * x * x;
    ++used;
  }
  if (used < 3) return fit;

  // Solve the 3x3 symmetric system by Cramer.
  const double det = s0 * (s2 * s4 - s3 * s3) - s1 * (s1 * s4 - s2 * s3) +
                     s2 * (s1 * s3 - s2 * s2);
  if (std::abs(det) < 1e-12) return fit;
  const double a = (t0 * (s2 * s4 - s3 * s3) - s1 * (t1 * s4 - t2 * s3) +
                    s2 * (t1 * s3 - t2 * s2)) / det;
  const double b = (s0 * (t1 * s4 - t2 * s3) - t0 * (s1 * s4 - s2 * s3) +
                    s2 * (s1 * t2 - s2 * t1)) / det;
  const double c = (s0 * (s2 * t2 - s3 * t1) - s1 * (s1 * t2 - s2 * t1) +
                    t0 * (s1 * s3 - s2 * s2)) / det;
  if (!(c < 0)) return fit;

  fit.center_offset_px = -b / (2 * c);
  fit.vmax = a - b * b / (4 * c);
  fit.radius_px = std::sqrt(-fit.vmax / c);
  double ss = 0.0;
  for (int i = 0; i < n; ++i) {
    if (profile[i] < floor) continue;
    const double x = i - mid;
    const double r = profile[i] - (a + b * x + c * x * x);
    ss += r * r;
  }
  fit.rms_residual = std::sqrt(ss / used);
  fit.valid = fit.vmax > 0 && fit.radius_px > 0.5;
  return fit;
}

double section_volume_rate(const PoiseuilleFit& fit, double scale_m_per_px,
                           double mean_velocity_factor) {
  if (!fit.valid) return 0.0;
  const double r_m = fit.radius_px * scale_m_per_px;
  return mean_velocity_factor * fit.vmax * M_PI * r_m * r_m;
}

double resistivity_index(double systolic, double diastolic) {
  if (!(systolic > 0)) throw NumericError("resistivity_index: systolic must be > 0");
  return (systolic - diastolic) / systolic;
}

FlowResult total_flow_series(std::vector<std::vector<ArterySection>> sections,
                             const FlowConfig& cfg, double scale_m_per_px,
                             double frame_rate_hz, int window_len, int hop) {
  FlowResult result;
  result.pixel_scale_m_per_px = scale_m_per_px;
  result.sections = std::move(sections);
  const int nw = static_cast<int>(result.sections.size());
  if (nw < 1) throw DataError("total_flow_series: no windows");

  bool any_valid = false;
  for (int w = 0; w < nw; ++w) {
    double total = 0.0;
    for (auto& sec : result.sections[w]) {
      sec.fit = fit_poiseuille(sec.profile, cfg.fit_floor_fraction);
      if (sec.fit.valid) {
        sec.fitted_radius_m = sec.fit.radius_px * scale_m_per_px;
        sec.area_m2 = M_PI * sec.fitted_radius_m * sec.fitted_radius_m;
        sec.volume_rate_m3s =
            section_volume_rate(sec.fit, scale_m_per_px, cfg.mean_velocity_factor);
        total += sec.volume_rate_m3s;
        any_valid = true;
      } else {
        ++result.excluded_section_count;
      }
    }
    result.total_flow_ul_min.push_back(total * kM3PerSecToUlPerMin);
    result.time_s.push_back((w * hop + window_len / 2.0) / frame_rate_hz);
  }
  if (!any_valid) throw DataError("total_flow_series: no valid sections in any window");

  result.mean_total_flow_ul_min =
      std::accumulate(result.total_flow_ul_min.begin(),
                      result.total_flow_ul_min.end(), 0.0) / nw;

  const std::vector<double> smooth =
      moving_average(result.total_flow_ul_min, cfg.smoothing_windows);
  const auto mx = std::max_element(smooth.begin(), smooth.end());
  const auto mn = std::min_element(smooth.begin(), smooth.end());
  result.systolic_window = static_cast<int>(mx - smooth.begin());
  result.diastolic_window = static_cast<int>(mn - smooth.begin());
  result.systolic_flow_ul_min = *mx;
  result.diastolic_flow_ul_min = *mn;
  result.resistivity_index =
      *mx > 0 ? resistivity_index(*mx, *mn) : 0.0;
  return result;
}

namespace {

ProfileBand phase_profile(const std::vector<ArterySection>& sections) {
  ProfileBand band;
  const int nsamp = 49;
  band.axis.resize(nsamp);
  for (int i = 0; i < nsamp; ++i)
    band.axis[i] = -1.2 + 2.4 * i / (nsamp - 1);
  std::vector<double> sum(nsamp, 0.0), sumsq(nsamp, 0.0);
  int count = 0;
  for (const auto& sec : sections) {
    if (!sec.fit.valid) continue;
    const int n = static_cast<int>(sec.profile.size());
    const double mid = (n - 1) / 2.0;
    for (int i = 0; i < nsamp; ++i) {
      const double x = mid + sec.fit.center_offset_px + band.axis[i] * sec.fit.radius_px;
      const int x0 = static_cast<int>(std::floor(x));
      double v = 0.0;
      if (x0 >= 0 && x0 + 1 < n) {
        const double fx = x - x0;
        v = (1 - fx) * sec.profile[x0] + fx * sec.profile[x0 + 1];
      } else if (x0 >= 0 && x0 < n) {
        v = sec.profile[x0];
      }
      sum[i] += v;
      sumsq[i] += v * v;
    }
    ++count;
  }
  band.section_count = count;
  band.mean.assign(nsamp, 0.0);
  band.sd.assign(nsamp, 0.0);
  if (count == 0) return band;
  for (int i = 0; i < nsamp; ++i) {
    band.mean[i] = sum[i] / count;
    const double var = sumsq[i] / count - band.mean[i] * band.mean[i];
    band.sd[i] = std::sqrt(std::max(0.0, var));
  }
  return band;
}

}  // namespace

SysDiaProfiles systole_diastole_profiles(const FlowResult& result) {
  if (result.sections.size() < 2)
    throw ConfigError("systole_diastole_profiles: need >= 2 windows");
  SysDiaProfiles out;
  out.systole = phase_profile(result.sections[result.systolic_window]);
  out.diastole = phase_profile(result.sections[result.diastolic_window]);
  return out;
}

}  // namespace hflw
