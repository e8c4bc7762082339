#pragma once

#include <vector>

#include "hflw/image.hpp"

namespace hflw {

struct SegmentationConfig {
  double flatfield_sigma_px = 32.0;
  std::vector<double> frangi_scales_px = {1.0, 2.0, 4.0, 8.0};
  double frangi_beta = 0.5;
  // <= 0 selects the per-scale default: half the maximum Hessian Frobenius
  // norm over the image.
  double frangi_c = -1.0;
  double vessel_threshold = 0.25;      // on normalized vesselness, [0,1]
  double artery_threshold = 0.0;       // on temporal correlation, [-1,1];
                                       // <= -1 disables the correlation gate
  int min_component_px = 50;
  int connectivity = 8;                // 4 or 8

  void validate() const;
};

struct SegmentationSet {
  ImageF flatfielded;
  ImageF vesselness;     // [0,1]
  Mask vessel_mask;
  ImageF correlation_map;  // [-1,1]
  Mask artery_mask;
  Labels components;     // 1 = largest component, 0 = background
  std::vector<int> component_sizes;  // indexed by label-1
  bool flatfield_warning = false;
};

struct FlatFieldResult {
  ImageF image;
  bool warned = false;  // all-zero input returned unchanged
};

// Divide by a Gaussian-blurred copy and rescale to preserve the input mean.
FlatFieldResult flat_field_correct(const ImageF& image, double sigma_px);

// Multiscale Frangi vesselness for bright curvilinear structures, normalized
// to [0,1] by the global maximum. Scale-normalized second derivatives
// (multiplied by s^2); per-scale responses combined by pixel-wise max.
ImageF frangi_vesselness(const ImageF& image, const std::vector<double>& scales,
                         double beta, double c);

// Pearson correlation of each pixel's window-to-window M0 series against the
// zero-meaned spatial average over vessel_mask. Requires >= 8 windows.
ImageF temporal_correlation_map(const std::vector<ImageF>& m0_series,
                                const Mask& vessel_mask);

struct RefineResult {
  Mask artery_mask;
  Labels components;
  std::vector<int> component_sizes;
};

// Threshold vesselness and correlation, close with a 3x3 structuring
// element, drop components smaller than min_component_px, label remaining
// components by decreasing size.
RefineResult threshold_and_refine(const ImageF& vesselness,
                                  const ImageF& correlation_map,
                                  const SegmentationConfig& cfg);

// Connected-component labeling; returns label image (0 background, labels
// sorted by size descending from 1) and sizes.
Labels label_components(const Mask& mask, int connectivity,
                        std::vector<int>* sizes);

Mask dilate3x3(const Mask& mask);
Mask erode3x3(const Mask& mask);

}  // namespace hflw
