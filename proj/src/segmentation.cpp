#include "hflw/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "hflw/errors.hpp"

namespace hflw {
namespace {

// Separable convolution with reflect boundary handling, double accumulation.
ImageF convolve_separable(const ImageF& img, const std::vector<double>& kx,
                          const std::vector<double>& ky) {
  const int rx = static_cast<int>(kx.size()) / 2;
  const int ry = static_cast<int>(ky.size()) / 2;
  auto reflect = [](int i, int n) {
    while (i < 0 || i >= n) i = i < 0 ? -i - 1 : 2 * n - i - 1;
    return i;
  };
  ImageD tmp(img.width, img.height);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      double acc = 0.0;
      for (int i = -rx; i <= rx; ++i)
        acc += kx[i + rx] * img.at(reflect(x + i, img.width), y);
      tmp.at(x, y) = acc;
    }
  ImageF out(img.width, img.height);
#pragma omp parallel for schedule(static)
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      double acc = 0.0;
      for (int j = -ry; j <= ry; ++j)
        acc += ky[j + ry] * tmp.at(x, reflect(y + j, img.height));
      out.at(x, y) = static_cast<float>(acc);
    }
  return out;
}

enum class Deriv { kNone, kFirst, kSecond };

std::vector<double> gauss_kernel(double sigma, Deriv d) {
  const int r = std::max(1, static_cast<int>(std::ceil(4.0 * sigma)));
  std::vector<double> k(2 * r + 1);
  const double s2 = sigma * sigma;
  for (int i = -r; i <= r; ++i) {
    const double g = std::exp(-0.5 * i * i / s2);
    switch (d) {
      case Deriv::kNone: k[i + r] = g; break;
      case Deriv::kFirst: k[i + r] = -i / s2 * g; break;
      case Deriv::kSecond: k[i + r] = (i * i / (s2 * s2) - 1.0 / s2) * g; break;
    }
  }
  // Normalize by the smoothing kernel's sum so plain blur preserves DC.
  double norm = 0.0;
  for (int i = -r; i <= r; ++i) norm += std::exp(-0.5 * i * i / s2);
  for (auto& v : k) v /= norm;
  // Truncation leaves the second-derivative kernel with a small nonzero sum;
  // re-center it so constant regions produce exactly zero response.
  if (d == Deriv::kSecond) {
    double sum = 0.0;
    for (double v : k) sum += v;
    for (auto& v : k) v -= sum / k.size();
  }
  return k;
}

}  // namespace

void SegmentationConfig::validate() const {
  if (!(flatfield_sigma_px > 0)) throw ConfigError("flatfield_sigma_px must be > 0");
  if (frangi_scales_px.empty()) throw ConfigError("frangi_scales_px must be non-empty");
  for (double s : frangi_scales_px)
    if (!(s > 0)) throw ConfigError("frangi scales must be > 0");
  if (!(vessel_threshold >= 0)) throw ConfigError("vessel_threshold must be >= 0");
  if (!(artery_threshold <= 1)) throw ConfigError("artery_threshold must be <= 1");
  if (min_component_px < 0) throw ConfigError("min_component_px must be >= 0");
  if (connectivity != 4 && connectivity != 8)
    throw ConfigError("connectivity must be 4 or 8");
}

FlatFieldResult flat_field_correct(const ImageF& image, double sigma_px) {
  if (!(sigma_px > 0)) throw ConfigError("flat_field_correct: sigma must be > 0");
  float maxval = 0.0f;
  double in_mean = 0.0;
  for (float v : image.data) {
    if (v < 0.0f) throw DataError("flat_field_correct: negative input");
    maxval = std::max(maxval, v);
    in_mean += v;
  }
  in_mean /= std::max<size_t>(1, image.size());
  if (maxval == 0.0f) return {image, true};

  const std::vector<double> g = gauss_kernel(sigma_px, Deriv::kNone);
  ImageF blur = convolve_separable(image, g, g);
  const double eps = 1e-12 * maxval;
  ImageF out(image.width, image.height);
  double out_mean = 0.0;
  for (size_t p = 0; p < image.size(); ++p) {
    out.data[p] = static_cast<float>(image.data[p] /
                                     std::max(static_cast<double>(blur.data[p]), eps));
    out_mean += out.data[p];
  }
  out_mean /= std::max<size_t>(1, out.size());
  if (out_mean > 0) {
    const float s = static_cast<float>(in_mean / out_mean);
    for (auto& v : out.data) v *= s;
  }
  return {out, false};
}

ImageF frangi_vesselness(const ImageF& image, const std::vector<double>& scales,
                         double beta, double c) {
  if (scales.empty()) throw ConfigError("frangi_vesselness: no scales");
  ImageF best(image.width, image.height, 0.0f);

  for (double s : scales) {
    const std::vector<double> g = gauss_kernel(s, Deriv::kNone);
    const std::vector<double> g1 = gauss_kernel(s, Deriv::kFirst);
    const std::vector<double> g2 = gauss_kernel(s, Deriv::kSecond);
    ImageF hxx = convolve_separable(image, g2, g);
    ImageF hyy = convolve_separable(image, g, g2);
    ImageF hxy = convolve_separable(image, g1, g1);

    const double s2 = s * s;  // gamma-normalized second derivatives
    double c_scale = c;
    if (c_scale <= 0) {
      double max_frob = 0.0;
      for (size_t p = 0; p < image.size(); ++p) {
        const double xx = s2 * hxx.data[p], yy = s2 * hyy.data[p],
                     xy = s2 * hxy.data[p];
        max_frob = std::max(max_frob, std::sqrt(xx * xx + yy * yy + 2 * xy * xy));
      }
      // Guard against a numerically flat scale: the auto-c normalization
      // would otherwise amplify pure rounding noise to full response.
      double img_mag = 0.0;
      for (float v : image.data) img_mag = std::max(img_mag, std::abs(double(v)));
      if (max_frob <= 1e-9 * img_mag) continue;
      c_scale = 0.5 * max_frob;
      if (c_scale <= 0) continue;  // flat image at this scale
    }

#pragma omp parallel for schedule(static)
    for (long long p = 0; p < static_cast<long long>(image.size()); ++p) {
      const double xx = s2 * hxx.data[p], yy = s2 * hyy.data[p],
                   xy = s2 * hxy.data[p];
      const double half_tr = 0.5 * (xx + yy);
      const double disc = std::sqrt(0.25 * (xx - yy) * (xx - yy) + xy * xy);
      double l1 = half_tr - disc, l2 = half_tr + disc;
      if (std::abs(l1) > std::abs(l2)) std::swap(l1, l2);
      // Bright vessels on dark background: l2 must be negative.
      if (l2 >= 0.0) continue;
      const double rb = l1 / l2;
      const double ss = std::sqrt(l1 * l1 + l2 * l2);
      const double v = std::exp(-rb * rb / (2 * beta * beta)) *
                       (1.0 - std::exp(-ss * ss / (2 * c_scale * c_scale)));
      if (v > best.data[p]) best.data[p] = static_cast<float>(v);
    }
  }

  float maxval = 0.0f;
  for (float v : best.data) maxval = std::max(maxval, v);
  if (maxval > 0)
    for (auto& v : best.data) v /= maxval;
  return best;
}

ImageF temporal_correlation_map(const std::vector<ImageF>& m0_series,
                                const Mask& vessel_mask) {
  const int nw = static_cast<int>(m0_series.size());
  if (nw < 8) throw ConfigError("temporal_correlation_map: need >= 8 windows");
  size_t mask_count = 0;
  for (uint8_t m : vessel_mask.data) mask_count += m ? 1 : 0;
  if (mask_count == 0) throw DataError("temporal_correlation_map: empty vessel mask");

  std::vector<double> ref(nw, 0.0);
  for (int t = 0; t < nw; ++t) {
    double acc = 0.0;
    for (size_t p = 0; p < vessel_mask.size(); ++p)
      if (vessel_mask.data[p]) acc += m0_series[t].data[p];
    ref[t] = acc / static_cast<double>(mask_count);
  }
  const double ref_mean = std::accumulate(ref.begin(), ref.end(), 0.0) / nw;
  double ref_var = 0.0;
  for (auto& r : ref) { r -= ref_mean; ref_var += r * r; }

  ImageF out(vessel_mask.width, vessel_mask.height, 0.0f);
  if (ref_var <= 0) return out;

#pragma omp parallel for schedule(static)
  for (long long p = 0; p < static_cast<long long>(out.size()); ++p) {
    double mean = 0.0;
    for (int t = 0; t < nw; ++t) mean += m0_series[t].data[p];
    mean /= nw;
    double var = 0.0, cov = 0.0;
    for (int t = 0; t < nw; ++t) {
      const double d = m0_series[t].data[p] - mean;
      var += d * d;
      cov += d * ref[t];
    }
    if (var <= 0) continue;  // zero temporal variance -> 0
    out.data[p] = static_cast<float>(cov / std::sqrt(var * ref_var));
  }
  return out;
}

Mask dilate3x3(const Mask& mask) {
  Mask out(mask.width, mask.height);
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x) {
      uint8_t v = 0;
      for (int dy = -1; dy <= 1 && !v; ++dy)
        for (int dx = -1; dx <= 1 && !v; ++dx) {
          const int nx = x + dx, ny = y + dy;
          if (mask.in_bounds(nx, ny) && mask.at(nx, ny)) v = 1;
        }
      out.at(x, y) = v;
    }
  return out;
}

Mask erode3x3(const Mask& mask) {
  Mask out(mask.width, mask.height);
  for (int y = 0; y < mask.height; ++y)
    for (int x = 0; x < mask.width; ++x) {
      uint8_t v = 1;
      for (int dy = -1; dy <= 1 && v; ++dy)
        for (int dx = -1; dx <= 1 && v; ++dx) {
          const int nx = x + dx, ny = y + dy;
          // Out-of-bounds neighbors count as set so border pixels survive.
          if (mask.in_bounds(nx, ny) && !mask.at(nx, ny)) v = 0;
        }
      out.at(x, y) = v;
    }
  return out;
}

Labels label_components(const Mask& mask, int connectivity,
                        std::vector<int>* sizes) {
  Labels labels(mask.width, mask.height, 0);
  std::vector<int> raw_sizes;
  std::vector<std::pair<int, int>> stack;
  const int dx8[] = {1, -1, 0, 0, 1, 1, -1, -1};
  const int dy8[] = {0, 0, 1, -1, 1, -1, 1, -1};
  const int nn = connectivity == 8 ? 8 : 4;

  int next = 0;
  for (int y0 = 0; y0 < mask.height; ++y0)
    for (int x0 = 0; x0 < mask.width; ++x0) {
      if (!mask.at(x0, y0) || labels.at(x0, y0)) continue;
      ++next;
      int count = 0;
      stack.push_back({x0, y0});
      labels.at(x0, y0) = next;
      while (!stack.empty()) {
        auto [x, y] = stack.back();
        stack.pop_back();
        ++count;
        for (int i = 0; i < nn; ++i) {
          const int nx = x + dx8[i], ny = y + dy8[i];
          if (!mask.in_bounds(nx, ny)) continue;
          if (mask.at(nx, ny) && !labels.at(nx, ny)) {
            labels.at(nx, ny) = next;
            stack.push_back({nx, ny});
          }
        }
      }
      raw_sizes.push_back(count);
    }

  // Relabel by size, descending.
  std::vector<int> order(raw_sizes.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return raw_sizes[a] > raw_sizes[b]; });
  std::vector<int> remap(raw_sizes.size() + 1, 0);
  for (size_t i = 0; i < order.size(); ++i) remap[order[i] + 1] = static_cast<int>(i) + 1;
  for (auto& l : labels.data) l = remap[l];
  if (sizes) {
    sizes->clear();
    for (int idx : order) sizes->push_back(raw_sizes[idx]);
  }
  return labels;
}

RefineResult threshold_and_refine(const ImageF& vesselness,
                                  const ImageF& correlation_map,
                                  const SegmentationConfig& cfg) {
  cfg.validate();
  Mask prelim(vesselness.width, vesselness.height);
  const bool use_corr = cfg.artery_threshold > -1.0;
  for (size_t p = 0; p < prelim.size(); ++p) {
    const bool v = vesselness.data[p] >= cfg.vessel_threshold;
    const bool c = !use_corr || correlation_map.data[p] >= cfg.artery_threshold;
    prelim.data[p] = (v && c) ? 1 : 0;
  }

  Mask closed = erode3x3(dilate3x3(prelim));

  std::vector<int> sizes;
  Labels labels = label_components(closed, cfg.connectivity, &sizes);
  RefineResult result;
  result.artery_mask = Mask(closed.width, closed.height);
  int kept = 0;
  for (size_t i = 0; i < sizes.size(); ++i)
    if (sizes[i] >= cfg.min_component_px) kept = static_cast<int>(i) + 1;
  for (size_t p = 0; p < closed.size(); ++p) {
    if (labels.data[p] >= 1 && labels.data[p] <= kept)
      result.artery_mask.data[p] = 1;
    else
      labels.data[p] = 0;
  }
  result.components = labels;
  result.component_sizes.assign(sizes.begin(), sizes.begin() + kept);

  bool any = false;
  for (uint8_t m : result.artery_mask.data) any = any || m;
  if (!any)
    throw DataError(
        "threshold_and_refine: empty artery mask; adjust vessel/artery thresholds");
  return result;
}

}  // namespace hflw
