#pragma once

#include <Eigen/Dense>

#include "hflw/spectral.hpp"

namespace hflw::ref {

// Serial reference implementations kept for testing and benchmarking the
// parallel kernels against an independent route.

// Moment maps via a naive O(n^2) DFT per pixel, no FFT, single-threaded.
MomentMaps moment_maps(const std::complex<float>* frames, int width, int height,
                       const SpectralWindowConfig& cfg, double fs);

// Clutter rejection via a direct SVD of the Casorati matrix (double
// precision), instead of the Gram-matrix route used by the kernel.
Eigen::MatrixXcd svd_clutter_filter(const Eigen::MatrixXcd& casorati,
                                    int n_remove);

}  // namespace hflw::ref
