#include "hflw/clutter.hpp"

#include <Eigen/Dense>

#include <string>

#include "hflw/errors.hpp"

namespace hflw {

void svd_clutter_filter(std::complex<float>* frames, int width, int height,
                        int n_frames, int n_remove, int window_index) {
  if (n_frames < 2) throw ConfigError("svd_clutter_filter: need >= 2 frames");
  if (n_remove < 0 || n_remove >= n_frames)
    throw ConfigError("svd_clutter_filter: n_remove must be in [0, n_frames)");
  if (n_remove == 0) return;

  const Eigen::Index m = static_cast<Eigen::Index>(width) * height;
  Eigen::Map<Eigen::MatrixXcf> casorati(frames, m, n_frames);

  // Time-side Gram matrix; eigenvectors of C^H C are the right singular
  // vectors of C.
  Eigen::MatrixXcf gram = casorati.adjoint() * casorati;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(gram.cast<std::complex<double>>());
  if (eig.info() != Eigen::Success)
    throw NumericError("svd_clutter_filter: eigendecomposition failed for window " +
                       std::to_string(window_index));

  // Eigen returns ascending eigenvalues; the clutter subspace is the last
  // n_remove columns.
  Eigen::MatrixXcf basis =
      eig.eigenvectors().rightCols(n_remove).cast<std::complex<float>>();
  Eigen::MatrixXcf proj = casorati * basis;          // m x k
  casorati.noalias() -= proj * basis.adjoint();      // project out clutter
}

ImageF pca_preview(const std::complex<float>* frames, int width, int height,
                   int n_frames) {
  if (n_frames != 16) throw ConfigError("pca_preview: expects exactly 16 frames");
  const Eigen::Index m = static_cast<Eigen::Index>(width) * height;
  Eigen::Map<const Eigen::MatrixXcf> casorati(frames, m, n_frames);

  Eigen::MatrixXcd gram =
      (casorati.adjoint() * casorati).cast<std::complex<double>>();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(gram);
  if (eig.info() != Eigen::Success)
    throw NumericError("pca_preview: eigendecomposition failed");
  Eigen::VectorXcd v1 = eig.eigenvectors().col(n_frames - 1);

  ImageF out(width, height);
  for (Eigen::Index p = 0; p < m; ++p) {
    double total = 0.0;
    std::complex<double> coeff = 0.0;
    for (int t = 0; t < n_frames; ++t) {
      const std::complex<double> v = casorati(p, t);
      total += std::norm(v);
      coeff += v * std::conj(v1[t]);
    }
    const double residual = total - std::norm(coeff);
    out.data[p] = static_cast<float>(residual > 0.0 ? residual : 0.0);
  }
  return out;
}

}  // namespace hflw
