#include "hflw/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <mutex>

namespace hflw {
namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

Fft1D::Fft1D(int n) : n_(n) {
  work_ = reinterpret_cast<std::complex<double>*>(
      fftw_malloc(sizeof(fftw_complex) * n));
  auto* w = reinterpret_cast<fftw_complex*>(work_);
  std::lock_guard<std::mutex> lock(planner_mutex());
  plan_fwd_ = fftw_plan_dft_1d(n, w, w, FFTW_FORWARD, FFTW_ESTIMATE);
  plan_bwd_ = fftw_plan_dft_1d(n, w, w, FFTW_BACKWARD, FFTW_ESTIMATE);
}

Fft1D::~Fft1D() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
  fftw_free(work_);
}

void Fft1D::forward(std::complex<double>* buf) {
  std::memcpy(work_, buf, sizeof(std::complex<double>) * n_);
  fftw_execute(static_cast<fftw_plan>(plan_fwd_));
  const double s = 1.0 / std::sqrt(static_cast<double>(n_));
  for (int i = 0; i < n_; ++i) buf[i] = work_[i] * s;
}

void Fft1D::inverse(std::complex<double>* buf) {
  std::memcpy(work_, buf, sizeof(std::complex<double>) * n_);
  fftw_execute(static_cast<fftw_plan>(plan_bwd_));
  const double s = 1.0 / std::sqrt(static_cast<double>(n_));
  for (int i = 0; i < n_; ++i) buf[i] = work_[i] * s;
}

Fft2D::Fft2D(int width, int height) : w_(width), h_(height) {
  work_ = reinterpret_cast<std::complex<double>*>(
      fftw_malloc(sizeof(fftw_complex) * static_cast<size_t>(w_) * h_));
  auto* w = reinterpret_cast<fftw_complex*>(work_);
  std::lock_guard<std::mutex> lock(planner_mutex());
  // FFTW is row-major with the first dimension slowest: (h, w).
  plan_fwd_ = fftw_plan_dft_2d(h_, w_, w, w, FFTW_FORWARD, FFTW_ESTIMATE);
  plan_bwd_ = fftw_plan_dft_2d(h_, w_, w, w, FFTW_BACKWARD, FFTW_ESTIMATE);
}

Fft2D::~Fft2D() {
  std::lock_guard<std::mutex> lock(planner_mutex());
  fftw_destroy_plan(static_cast<fftw_plan>(plan_fwd_));
  fftw_destroy_plan(static_cast<fftw_plan>(plan_bwd_));
  fftw_free(work_);
}

void Fft2D::forward(std::complex<double>* buf) {
  const size_t n = static_cast<size_t>(w_) * h_;
  std::memcpy(work_, buf, sizeof(std::complex<double>) * n);
  fftw_execute(static_cast<fftw_plan>(plan_fwd_));
  const double s = 1.0 / std::sqrt(static_cast<double>(n));
  for (size_t i = 0; i < n; ++i) buf[i] = work_[i] * s;
}

void Fft2D::inverse(std::complex<double>* buf) {
  const size_t n = static_cast<size_t>(w_) * h_;
  std::memcpy(work_, buf, sizeof(std::complex<double>) * n);
  fftw_execute(static_cast<fftw_plan>(plan_bwd_));
  const double s = 1.0 / std::sqrt(static_cast<double>(n));
  for (size_t i = 0; i < n; ++i) buf[i] = work_[i] * s;
}

}  // namespace hflw
