#pragma once

#include <complex>
#include <vector>

#include "hflw/image.hpp"

namespace hflw {

// Truncated-SVD clutter rejection of a hologram window in Casorati form
// (space x time, time = frames). The n_remove leading singular components
// are projected out in place. Implemented through the time-side Gram matrix
// so only an n_frames x n_frames eigenproblem is solved; the algebra runs
// single-threaded and is bit-deterministic.
//
// frames: frame-major buffer of width*height*n_frames values.
void svd_clutter_filter(std::complex<float>* frames, int width, int height,
                        int n_frames, int n_remove, int window_index = 0);

// 16-frame live-preview renderer: remove the first principal component of
// the Casorati stack and return the per-pixel temporal energy of the
// residual.
ImageF pca_preview(const std::complex<float>* frames, int width, int height,
                   int n_frames = 16);

}  // namespace hflw
