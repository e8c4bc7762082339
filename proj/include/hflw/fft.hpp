#pragma once

#include <complex>
#include <cstddef>

namespace hflw {

// Unitary FFT wrappers over FFTW. Plan creation is serialized internally;
// each object owns its buffers, so one instance per thread.
class Fft1D {
 public:
  explicit Fft1D(int n);
  ~Fft1D();
  Fft1D(const Fft1D&) = delete;
  Fft1D& operator=(const Fft1D&) = delete;

  int size() const { return n_; }
  // In-place transform of buf[0..n), scaled by 1/sqrt(n).
  void forward(std::complex<double>* buf);
  void inverse(std::complex<double>* buf);

 private:
  int n_;
  void* plan_fwd_;
  void* plan_bwd_;
  std::complex<double>* work_;
};

class Fft2D {
 public:
  Fft2D(int width, int height);
  ~Fft2D();
  Fft2D(const Fft2D&) = delete;
  Fft2D& operator=(const Fft2D&) = delete;

  void forward(std::complex<double>* buf);  // row-major width x height
  void inverse(std::complex<double>* buf);

 private:
  int w_, h_;
  void* plan_fwd_;
  void* plan_bwd_;
  std::complex<double>* work_;
};

// Signed bin frequency for an n-point DFT at sample rate fs; the axis spans
// (-fs/2, +fs/2] with bin n/2 mapping to +fs/2.
inline double bin_frequency_hz(int k, int n, double fs) {
  return (k <= n / 2 ? k : k - n) * fs / n;
}

}  // namespace hflw
