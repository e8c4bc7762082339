#include "hflw/ref.hpp"

#include <cmath>

#include "hflw/errors.hpp"
#include "hflw/fft.hpp"

namespace hflw::ref {

MomentMaps moment_maps(const std::complex<float>* frames, int width, int height,
                       const SpectralWindowConfig& cfg, double fs) {
  cfg.validate(fs);
  const int n = cfg.window_len;
  const size_t npix = static_cast<size_t>(width) * height;

  std::vector<double> apod(n, 1.0);
  if (cfg.apodization == Apodization::kHann)
    for (int i = 0; i < n; ++i)
      apod[i] = 0.5 * (1.0 - std::cos(2.0 * M_PI * i / n));

  MomentMaps maps;
  maps.m0 = ImageF(width, height);
  maps.m2 = ImageF(width, height);
  maps.defined = Mask(width, height);
  maps.saturated = Mask(width, height);

  std::vector<std::complex<double>> series(n);
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  double max_af = -1.0;
  for (int k = 0; k < n; ++k) {
    const double af = std::abs(bin_frequency_hz(k, n, fs));
    if (af >= cfg.band_low_hz && af <= cfg.band_high_hz)
      max_af = std::max(max_af, af);
  }

  for (size_t p = 0; p < npix; ++p) {
    for (int t = 0; t < n; ++t) {
      const std::complex<float> v = frames[static_cast<size_t>(t) * npix + p];
      series[t] = std::complex<double>(v.real(), v.imag()) * apod[t];
    }
    double m0 = 0.0, num = 0.0, edge = 0.0;
    for (int k = 0; k < n; ++k) {
      const double f = bin_frequency_hz(k, n, fs);
      const double af = std::abs(f);
      if (af < cfg.band_low_hz || af > cfg.band_high_hz) continue;
      std::complex<double> acc = 0.0;
      for (int t = 0; t < n; ++t) {
        const double ph = -2.0 * M_PI * k * t / n;
        acc += series[t] * std::complex<double>(std::cos(ph), std::sin(ph));
      }
      const double s = std::norm(acc * inv_sqrt_n);
      m0 += s;
      num += f * f * s;
      if (std::abs(af - max_af) < 1e-9) edge += s;
    }
    maps.m0.data[p] = static_cast<float>(m0);
    if (m0 > 0.0) {
      maps.defined.data[p] = 1;
      maps.m2.data[p] = static_cast<float>(num / m0);
      if (edge > cfg.saturation_fraction * m0) maps.saturated.data[p] = 1;
    }
  }
  return maps;
}

Eigen::MatrixXcd svd_clutter_filter(const Eigen::MatrixXcd& casorati,
                                    int n_remove) {
  if (casorati.cols() < 2) throw ConfigError("ref svd filter: need >= 2 frames");
  if (n_remove < 0 || n_remove >= casorati.cols())
    throw ConfigError("ref svd filter: n_remove out of range");
  if (n_remove == 0) return casorati;
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(
      casorati, Eigen::ComputeThinU | Eigen::ComputeThinV);
  Eigen::VectorXd sv = svd.singularValues();
  for (int i = 0; i < n_remove; ++i) sv[i] = 0.0;
  return svd.matrixU() * sv.asDiagonal() * svd.matrixV().adjoint();
}

}  // namespace hflw::ref
