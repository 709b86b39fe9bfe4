#pragma once

#include <random>

#include "adbsim/operator_algebra.hpp"

namespace adb::testing {

inline Matrix random_matrix(Eigen::Index n, std::mt19937& rng) {
  std::normal_distribution<double> d;
  Matrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) m(i, j) = Complex{d(rng), d(rng)};
  return m;
}

inline Operator random_hermitian(const LayoutPtr& layout, std::mt19937& rng) {
  const Matrix m = random_matrix(static_cast<Eigen::Index>(layout->total_dim()), rng);
  return {layout, 0.5 * (m + m.adjoint())};
}

/// Full-rank random state: A A^dag / Tr.
inline DensityMatrix random_density(const LayoutPtr& layout, std::mt19937& rng) {
  const Matrix a = random_matrix(static_cast<Eigen::Index>(layout->total_dim()), rng);
  Matrix r = a * a.adjoint();
  r /= r.trace().real();
  return {layout, 0.5 * (r + r.adjoint())};
}

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace adb::testing
