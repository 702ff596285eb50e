#pragma once

#include <random>

#include "symscope/common.hpp"
#include "symscope/states.hpp"

namespace symscope::testutil {

inline Matrix random_complex(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> dist(0.0, 1.0);
  Matrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = Complex(dist(rng), dist(rng));
  return m;
}

inline Matrix random_psd(std::mt19937_64& rng, int dim) {
  Matrix g = random_complex(rng, dim, dim);
  return g * g.adjoint();
}

inline Matrix random_density_matrix(std::mt19937_64& rng, int dim) {
  Matrix p = random_psd(rng, dim);
  return p / p.trace().real();
}

inline Matrix random_unitary(std::mt19937_64& rng, int dim) {
  Matrix g = random_complex(rng, dim, dim);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < dim; ++i) {
    Complex d = r(i, i);
    q.col(i) *= d / std::abs(d);
  }
  return q;
}

inline Vector random_state_vector(std::mt19937_64& rng, int dim) {
  Matrix g = random_complex(rng, dim, 1);
  Vector v = g.col(0);
  return v / v.norm();
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace symscope::testutil
