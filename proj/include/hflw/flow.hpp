#pragma once

#include <optional>
#include <vector>

#include "hflw/image.hpp"
#include "hflw/params.hpp"

namespace hflw {

struct FlowConfig {
  double circle_radius_px = 40.0;
  double circle_width_px = 8.0;
  double center_x_px = -1.0;  // < 0 selects the image center
  double center_y_px = -1.0;
  int profile_half_len_px = 12;
  int profile_width_px = 5;
  double papilla_diameter_px = 120.0;
  // Poiseuille mean = vmax/2; the RMS-based alternative (vmax/sqrt(3)) is
  // selectable because the broadening velocimetry yields an RMS quantity.
  double mean_velocity_factor = 0.5;
  double fit_floor_fraction = 0.10;   // samples below this fraction of the
                                      // profile max are excluded from the fit
  int smoothing_windows = 3;          // moving average before extrema search
  bool include_negative_sections = true;  // keep negative-delta-f sections in
                                          // field statistics (they are always
                                          // excluded from flow sums)
};

struct SectionSeed {
  double centroid_x = 0.0;
  double centroid_y = 0.0;
  int pixel_count = 0;
};

struct PoiseuilleFit {
  bool valid = false;
  double vmax = 0.0;          // profile units
  double radius_px = 0.0;
  double center_offset_px = 0.0;  // relative to the profile midpoint
  double rms_residual = 0.0;
};

struct ArterySection {
  SectionSeed seed;
  double orientation_rad = 0.0;
  std::vector<double> profile;  // signed velocity, wall to wall
  PoiseuilleFit fit;
  double fitted_radius_m = 0.0;
  double area_m2 = 0.0;
  double volume_rate_m3s = 0.0;
  bool dropped = false;  // patch exited image bounds
};

struct FlowResult {
  std::vector<std::vector<ArterySection>> sections;  // [window][section]
  std::vector<double> total_flow_ul_min;             // per window
  std::vector<double> time_s;                        // window centers
  double mean_total_flow_ul_min = 0.0;
  double systolic_flow_ul_min = 0.0;
  double diastolic_flow_ul_min = 0.0;
  int systolic_window = 0;
  int diastolic_window = 0;
  double resistivity_index = 0.0;
  double pixel_scale_m_per_px = 0.0;
  int excluded_section_count = 0;  // non-positive fitted vmax
};

struct ProfileBand {
  std::vector<double> axis;  // radius-normalized, [-1.2, 1.2]
  std::vector<double> mean;
  std::vector<double> sd;
  int section_count = 0;
};

constexpr double kM3PerSecToUlPerMin = 6e10;

double pixel_scale_from_papilla(double papilla_diameter_px,
                                double papilla_diameter_m);

// Intersect the artery mask with the annulus around (cx, cy); every
// connected component of the intersection becomes one section seed.
std::vector<SectionSeed> select_sections(const Mask& artery_mask, double cx,
                                         double cy, double circle_radius_px,
                                         double circle_width_px);

// Orientation search over [0, 180) degrees in 1-degree steps; the patch is
// resampled bilinearly about the seed centroid and the orientation with the
// largest peak of the along-vessel sum wins (lowest angle on ties). Returns
// nullopt when the patch exits the image bounds.
std::optional<ArterySection> extract_profile(const ImageF& velocity_map,
                                             const SectionSeed& seed,
                                             int half_len_px, int width_px);

// Least-squares fit of vmax*(1-((x-x0)/R)^2) restricted to samples above
// fit_floor_fraction of the profile max.
PoiseuilleFit fit_poiseuille(const std::vector<double>& profile,
                             double fit_floor_fraction = 0.10);

// Q = mean_velocity_factor * vmax * pi * (R_px*scale)^2.
double section_volume_rate(const PoiseuilleFit& fit, double scale_m_per_px,
                           double mean_velocity_factor = 0.5);

// Aggregate per-window sections into total-flow series, extrema and RI.
FlowResult total_flow_series(std::vector<std::vector<ArterySection>> sections,
                             const FlowConfig& cfg, double scale_m_per_px,
                             double frame_rate_hz, int window_len, int hop);

double resistivity_index(double systolic, double diastolic);

// Averaged wall-to-wall profiles at the systolic and diastolic windows,
// aligned by fitted center and radius-normalized.
struct SysDiaProfiles {
  ProfileBand systole;
  ProfileBand diastole;
};
SysDiaProfiles systole_diastole_profiles(const FlowResult& result);

}  // namespace hflw
