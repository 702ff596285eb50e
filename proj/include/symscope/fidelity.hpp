#pragma once

#include <cmath>
#include <stdexcept>

#include "symscope/common.hpp"
#include "symscope/states.hpp"

namespace symscope {

/// Uhlmann fidelity with a conditioning report. For unnormalized positive
/// functionals the value lies in [0, tr(rho) tr(sigma)].
struct FidelityValue {
  double value = 0.0;
  /// Smallest eigenvalue of sqrt(rho) sigma sqrt(rho) that entered the sum.
  double min_retained_eigenvalue = 0.0;
  /// Eigenvalues below the clip threshold dropped from the sum.
  int clipped_count = 0;
};

namespace detail {

inline Matrix psd_sqrt(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(m);
  RealVector vals = es.eigenvalues();
  // The square root amplifies eigenvalue dust (sqrt(1e-16) = 1e-8), so
  // numerical zeros are flattened relative to the top of the spectrum.
  double floor = vals.size() ? 1e-13 * std::max(0.0, vals(vals.size() - 1))
                             : 0.0;
  for (Eigen::Index i = 0; i < vals.size(); ++i)
    vals(i) = vals(i) > floor ? std::sqrt(vals(i)) : 0.0;
  return es.eigenvectors() * vals.asDiagonal() *
         es.eigenvectors().adjoint();
}

}  // namespace detail

/// F(rho, sigma) = (tr sqrt(sqrt(rho) sigma sqrt(rho)))^2 via Hermitian
/// eigendecomposition. Eigenvalues of the inner product operator below the
/// clip threshold are dropped (and counted); genuine negativity beyond
/// numerical dust is an error.
inline FidelityValue fidelity(const DensityOperator& rho,
                              const DensityOperator& sigma) {
  require(rho.geometry() == sigma.geometry(), "fidelity: geometry mismatch");
  Matrix root = detail::psd_sqrt(rho.matrix());
  Matrix inner = root * sigma.matrix() * root;
  inner = (inner + inner.adjoint()) / 2.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(inner);
  const RealVector& vals = es.eigenvalues();
  double top = vals.size() ? std::max(0.0, vals(vals.size() - 1)) : 0.0;
  double clip = kFidelityClipTol * std::max(1.0, top);
  if (vals.size() && vals(0) < -1e-8 * std::max(1.0, top))
    throw std::invalid_argument("fidelity: input not positive semidefinite");
  FidelityValue out;
  double sum = 0.0;
  double min_kept = -1.0;
  for (Eigen::Index i = 0; i < vals.size(); ++i) {
    if (vals(i) < clip) {
      ++out.clipped_count;
      continue;
    }
    sum += std::sqrt(vals(i));
    if (min_kept < 0) min_kept = vals(i);  // ascending order: first kept wins
  }
  out.value = sum * sum;
  out.min_retained_eigenvalue = std::max(0.0, min_kept);
  return out;
}

}  // namespace symscope
