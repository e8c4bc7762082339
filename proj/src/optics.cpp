#include "hflw/optics.hpp"

#include <omp.h>

#include <cmath>
#include <memory>

#include "hflw/errors.hpp"
#include "hflw/fft.hpp"

namespace hflw {
namespace {

constexpr int kMinDim = 16;

// Centered quadratic phase exp(i*pi*(x^2+y^2)/(lambda*z)) sampled on a
// pitch_x/pitch_y grid.
void apply_chirp(ImageC& f, double lambda, double z, double pitch_x,
                 double pitch_y, bool conjugate) {
  const int cx = f.width / 2, cy = f.height / 2;
  const double k = M_PI / (lambda * z) * (conjugate ? -1.0 : 1.0);
  for (int y = 0; y < f.height; ++y) {
    const double yy = (y - cy) * pitch_y;
    for (int x = 0; x < f.width; ++x) {
      const double xx = (x - cx) * pitch_x;
      const double ph = k * (xx * xx + yy * yy);
      f.at(x, y) *= std::complex<double>(std::cos(ph), std::sin(ph));
    }
  }
}

ImageC fftshift(const ImageC& f, bool inverse) {
  ImageC out(f.width, f.height);
  const int sx = inverse ? f.width - f.width / 2 : f.width / 2;
  const int sy = inverse ? f.height - f.height / 2 : f.height / 2;
  for (int y = 0; y < f.height; ++y)
    for (int x = 0; x < f.width; ++x)
      out.at((x + sx) % f.width, (y + sy) % f.height) = f.at(x, y);
  return out;
}

ImageC propagate_with(Fft2D& fft, const ImageC& field,
                      const OpticalParams& params, double z_m) {
  if (z_m == 0.0) return field;
  const double lambda = params.wavelength_m;
  const double pitch = params.pixel_pitch_m;
  const double az = std::abs(z_m);
  // Output-plane sampling of the single-FFT method.
  const double pout_x = lambda * az / (field.width * pitch);
  const double pout_y = lambda * az / (field.height * pitch);

  ImageC buf = field;
  if (z_m > 0) {
    apply_chirp(buf, lambda, az, pitch, pitch, false);
    fft.forward(buf.data.data());
    buf = fftshift(buf, false);
    apply_chirp(buf, lambda, az, pout_x, pout_y, false);
  } else {
    apply_chirp(buf, lambda, az, pout_x, pout_y, true);
    buf = fftshift(buf, true);
    fft.inverse(buf.data.data());
    apply_chirp(buf, lambda, az, pitch, pitch, true);
  }
  return buf;
}

}  // namespace

ImageC fresnel_propagate(const ImageC& field, const OpticalParams& params,
                         double z_m) {
  params.validate();
  if (field.width < kMinDim || field.height < kMinDim)
    throw DataError("fresnel_propagate: field smaller than 16x16");
  for (const auto& v : field.data)
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw DataError("fresnel_propagate: non-finite input value");
  if (z_m == 0.0) return field;
  Fft2D fft(field.width, field.height);
  return propagate_with(fft, field, params, z_m);
}

HologramStack render_hologram_stack(const InterferogramStack& stack,
                                    double z_m) {
  stack.validate();
  HologramStack out;
  out.width = stack.width;
  out.height = stack.height;
  out.frame_count = stack.frame_count;
  out.params = stack.params;
  out.params.propagation_distance_m = z_m;
  out.frames.resize(stack.frame_pixels() *
                    static_cast<size_t>(stack.frame_count));

  const size_t npix = stack.frame_pixels();
#pragma omp parallel
  {
    std::unique_ptr<Fft2D> fft;
    if (z_m != 0.0) {
#pragma omp critical(hflw_fft_plan)
      fft = std::make_unique<Fft2D>(stack.width, stack.height);
    }
#pragma omp for schedule(static)
    for (int i = 0; i < stack.frame_count; ++i) {
      const uint16_t* src = stack.frame(i);
      double mean = 0.0;
      for (size_t p = 0; p < npix; ++p) mean += src[p];
      mean /= static_cast<double>(npix);

      ImageC field(stack.width, stack.height);
      for (size_t p = 0; p < npix; ++p)
        field.data[p] = std::complex<double>(src[p] - mean, 0.0);
      if (z_m != 0.0) field = propagate_with(*fft, field, stack.params, z_m);

      std::complex<float>* dst = out.frame(i);
      for (size_t p = 0; p < npix; ++p)
        dst[p] = static_cast<std::complex<float>>(field.data[p]);
    }
  }
  return out;
}

}  // namespace hflw
