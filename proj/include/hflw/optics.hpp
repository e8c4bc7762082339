#pragma once

#include "hflw/image.hpp"
#include "hflw/params.hpp"

namespace hflw {

// Single-FFT Fresnel propagation with quadratic chirp pre/post factors,
// unitary normalization. z = 0 is the identity; a negative z applies the
// exact algebraic inverse of the positive-z transform, so
// propagate(z) followed by propagate(-z) recovers the input.
ImageC fresnel_propagate(const ImageC& field, const OpticalParams& params,
                         double z_m);

// Convert each frame to a zero-imaginary complex field, subtract the frame
// mean (zero-order suppression), then Fresnel-propagate frame-wise.
// Frames are independent; the loop is OpenMP-parallel and bit-deterministic
// across thread counts.
HologramStack render_hologram_stack(const InterferogramStack& stack, double z_m);

}  // namespace hflw
