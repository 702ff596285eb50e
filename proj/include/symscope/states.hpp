#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

#include "symscope/chain.hpp"
#include "symscope/common.hpp"
#include "symscope/operators.hpp"

namespace symscope {

/// Positive semidefinite operator on a chain. Not required to be normalized:
/// unnormalized positive functionals (e.g. O rho O^dagger) are first-class.
/// Construction validates Hermiticity (tol 1e-10) and positivity; negative
/// eigenvalue dust in (-1e-10, 0) is clipped to zero (counted globally),
/// anything below -1e-10 is a hard error.
class DensityOperator {
 public:
  DensityOperator(ChainGeometry geometry, Matrix m)
      : geom_(std::move(geometry)) {
    require(m.rows() == geom_.total_dim() && m.cols() == geom_.total_dim(),
            "DensityOperator: matrix does not match geometry");
    double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    double herm_err = (m - m.adjoint()).cwiseAbs().maxCoeff();
    if (herm_err > kHermiticityTol * scale)
      throw std::invalid_argument("DensityOperator: matrix is not Hermitian");
    matrix_ = 0.5 * (m + m.adjoint().eval());
    Eigen::SelfAdjointEigenSolver<Matrix> es(matrix_);
    double lo = es.eigenvalues().minCoeff();
    if (lo < -kPsdClipTol * scale)
      throw std::invalid_argument(
          "DensityOperator: negative eigenvalue beyond clip tolerance");
    if (lo < 0) {
      RealVector clipped = es.eigenvalues().cwiseMax(0.0);
      matrix_ = es.eigenvectors() * clipped.asDiagonal() *
                es.eigenvectors().adjoint();
      detail::psd_clip_counter()++;
    }
  }

  /// Fast path for matrices that are PSD by construction (partial traces,
  /// unitary conjugations, tensor products of validated states). Hermitizes
  /// but skips the eigenvalue scan.
  static DensityOperator unchecked(ChainGeometry geometry, Matrix m) {
    DensityOperator rho;
    rho.geom_ = std::move(geometry);
    require(m.rows() == rho.geom_.total_dim() &&
                m.cols() == rho.geom_.total_dim(),
            "DensityOperator: matrix does not match geometry");
    rho.matrix_ = 0.5 * (m + m.adjoint().eval());
    return rho;
  }

  const ChainGeometry& geometry() const { return geom_; }
  const Matrix& matrix() const { return matrix_; }
  double trace() const { return matrix_.trace().real(); }

  DensityOperator normalized() const {
    double t = trace();
    require(t > 0, "DensityOperator: cannot normalize the zero functional");
    return unchecked(geom_, matrix_ / t);
  }

 private:
  DensityOperator() : geom_(ChainGeometry::uniform(1)) {}
  ChainGeometry geom_;
  Matrix matrix_;
};

/// Unit vector on a chain.
class PureStateVector {
 public:
  PureStateVector(ChainGeometry geometry, Vector amplitudes)
      : geom_(std::move(geometry)), amp_(std::move(amplitudes)) {
    require(amp_.size() == geom_.total_dim(),
            "PureStateVector: vector does not match geometry");
    double n = amp_.norm();
    require(std::abs(n - 1.0) < 1e-6, "PureStateVector: vector not normalized");
    amp_ /= n;
  }

  const ChainGeometry& geometry() const { return geom_; }
  const Vector& amplitudes() const { return amp_; }

  DensityOperator projector() const {
    return DensityOperator::unchecked(geom_, amp_ * amp_.adjoint());
  }

 private:
  ChainGeometry geom_;
  Vector amp_;
};

inline ChainGeometry concat_geometry(const ChainGeometry& a,
                                     const ChainGeometry& b) {
  std::vector<int> dims = a.local_dims();
  dims.insert(dims.end(), b.local_dims().begin(), b.local_dims().end());
  return ChainGeometry(std::move(dims));
}

/// Kronecker product in the little-endian convention: `a` occupies the lower
/// (faster) sites of the combined chain, `b` the upper ones.
inline Matrix tensor_matrix(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < b.rows(); ++i)
    for (Eigen::Index j = 0; j < b.cols(); ++j)
      out.block(i * a.rows(), j * a.cols(), a.rows(), a.cols()) = b(i, j) * a;
  return out;
}

inline Vector tensor_vector(const Vector& a, const Vector& b) {
  Vector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < b.size(); ++i)
    out.segment(i * a.size(), a.size()) = b(i) * a;
  return out;
}

inline DensityOperator tensor(const DensityOperator& a,
                              const DensityOperator& b) {
  return DensityOperator::unchecked(concat_geometry(a.geometry(), b.geometry()),
                                    tensor_matrix(a.matrix(), b.matrix()));
}

inline PureStateVector tensor(const PureStateVector& a,
                              const PureStateVector& b) {
  return PureStateVector(concat_geometry(a.geometry(), b.geometry()),
                         tensor_vector(a.amplitudes(), b.amplitudes()));
}

/// Partial trace onto the region `gamma`; sites renumber to 0..|gamma|-1 in
/// the original order. Empty gamma yields the 1x1 matrix [trace].
inline DensityOperator restrict_state(const DensityOperator& rho,
                                      const Region& gamma) {
  const ChainGeometry& g = rho.geometry();
  check_region_in_chain(g, gamma, "restrict");
  if (gamma.empty()) {
    // Scalar result, represented on a dimension-1 placeholder site.
    Matrix t(1, 1);
    t(0, 0) = rho.matrix().trace();
    return DensityOperator::unchecked(ChainGeometry(std::vector<int>{1}),
                                      std::move(t));
  }
  Region rest = gamma.complement(g.num_sites());
  auto keep = detail::region_offsets(g, gamma);
  auto traced = detail::region_offsets(g, rest);
  std::int64_t dk = static_cast<std::int64_t>(keep.size());
  Matrix out = Matrix::Zero(dk, dk);
  const Matrix& m = rho.matrix();
  for (std::int64_t t : traced)
    for (std::int64_t r = 0; r < dk; ++r)
      for (std::int64_t c = 0; c < dk; ++c)
        out(r, c) += m(keep[r] + t, keep[c] + t);
  std::vector<int> dims;
  for (int s : gamma.sites()) dims.push_back(g.local_dim(s));
  return DensityOperator::unchecked(ChainGeometry(dims), std::move(out));
}

/// Partial trace of a pure state's projector without forming the projector.
inline DensityOperator restrict_state(const PureStateVector& psi,
                                      const Region& gamma) {
  const ChainGeometry& g = psi.geometry();
  check_region_in_chain(g, gamma, "restrict");
  if (gamma.empty()) {
    Matrix t(1, 1);
    t(0, 0) = psi.amplitudes().squaredNorm();
    return DensityOperator::unchecked(ChainGeometry(std::vector<int>{1}),
                                      std::move(t));
  }
  Region rest = gamma.complement(g.num_sites());
  auto keep = detail::region_offsets(g, gamma);
  auto traced = detail::region_offsets(g, rest);
  std::int64_t dk = static_cast<std::int64_t>(keep.size());
  Matrix out = Matrix::Zero(dk, dk);
  const Vector& v = psi.amplitudes();
  for (std::int64_t t : traced)
    for (std::int64_t r = 0; r < dk; ++r) {
      Complex vr = v(keep[r] + t);
      if (vr == Complex(0, 0)) continue;
      for (std::int64_t c = 0; c < dk; ++c)
        out(r, c) += vr * std::conj(v(keep[c] + t));
    }
  std::vector<int> dims;
  for (int s : gamma.sites()) dims.push_back(g.local_dim(s));
  return DensityOperator::unchecked(ChainGeometry(dims), std::move(out));
}

/// Trace distance (1/2)||a - b||_1 via the spectrum of the difference.
inline double trace_distance(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(),
          "trace_distance: dimension mismatch");
  Matrix d = a - b;
  d = 0.5 * (d + d.adjoint().eval());
  Eigen::SelfAdjointEigenSolver<Matrix> es(d, Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

inline double trace_distance(const DensityOperator& a,
                             const DensityOperator& b) {
  return trace_distance(a.matrix(), b.matrix());
}

/// Largest singular value of a - b.
inline double operator_norm_distance(const Matrix& a, const Matrix& b) {
  require(a.rows() == b.rows() && a.cols() == b.cols(),
          "operator_norm_distance: dimension mismatch");
  Eigen::JacobiSVD<Matrix> svd(a - b);
  return svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
}

inline double operator_norm_distance(const DensityOperator& a,
                                     const DensityOperator& b) {
  return operator_norm_distance(a.matrix(), b.matrix());
}

// ---------------------------------------------------------------------------
// Vector and matrix application of local operators (no full embedding).

/// v <- embed(op) * v.
inline Vector apply_local(const LocalOperator& op, const ChainGeometry& g,
                          const Vector& v) {
  require(v.size() == g.total_dim(), "apply_local: dimension mismatch");
  Region rest = op.support().complement(g.num_sites());
  auto sup = detail::region_offsets(g, op.support());
  auto other = detail::region_offsets(g, rest);
  std::int64_t ds = static_cast<std::int64_t>(sup.size());
  const Matrix& m = op.matrix();
  Vector out = Vector::Zero(v.size());
  for (std::int64_t t : other) {
    for (std::int64_t r = 0; r < ds; ++r) {
      Complex acc(0, 0);
      for (std::int64_t c = 0; c < ds; ++c) acc += m(r, c) * v(sup[c] + t);
      out(sup[r] + t) = acc;
    }
  }
  return out;
}

/// M <- embed(op) * M.
inline Matrix apply_local_left(const LocalOperator& op, const ChainGeometry& g,
                               const Matrix& mat) {
  require(mat.rows() == g.total_dim(), "apply_local_left: dimension mismatch");
  Region rest = op.support().complement(g.num_sites());
  auto sup = detail::region_offsets(g, op.support());
  auto other = detail::region_offsets(g, rest);
  std::int64_t ds = static_cast<std::int64_t>(sup.size());
  const Matrix& m = op.matrix();
  Matrix out = Matrix::Zero(mat.rows(), mat.cols());
  for (std::int64_t t : other)
    for (std::int64_t r = 0; r < ds; ++r)
      for (std::int64_t c = 0; c < ds; ++c) {
        if (m(r, c) == Complex(0, 0)) continue;
        out.row(sup[r] + t) += m(r, c) * mat.row(sup[c] + t);
      }
  return out;
}

/// M <- M * embed(op).
inline Matrix apply_local_right(const LocalOperator& op, const ChainGeometry& g,
                                const Matrix& mat) {
  require(mat.cols() == g.total_dim(), "apply_local_right: dimension mismatch");
  Region rest = op.support().complement(g.num_sites());
  auto sup = detail::region_offsets(g, op.support());
  auto other = detail::region_offsets(g, rest);
  std::int64_t ds = static_cast<std::int64_t>(sup.size());
  const Matrix& m = op.matrix();
  Matrix out = Matrix::Zero(mat.rows(), mat.cols());
  for (std::int64_t t : other)
    for (std::int64_t c = 0; c < ds; ++c)
      for (std::int64_t r = 0; r < ds; ++r) {
        if (m(r, c) == Complex(0, 0)) continue;
        out.col(sup[c] + t) += m(r, c) * mat.col(sup[r] + t);
      }
  return out;
}

/// embed(op) * rho * embed(op)^dagger without building the embedding.
inline Matrix conjugate_by_local(const LocalOperator& op,
                                 const ChainGeometry& g, const Matrix& rho) {
  Matrix tmp = apply_local_left(op, g, rho);
  LocalOperator adj(g, op.support(), op.matrix().adjoint());
  return apply_local_right(adj, g, tmp);
}

inline Complex expectation(const LocalOperator& op, const PureStateVector& v) {
  return v.amplitudes().dot(apply_local(op, v.geometry(), v.amplitudes()));
}

inline Complex expectation(const LocalOperator& op, const DensityOperator& rho) {
  return apply_local_left(op, rho.geometry(), rho.matrix()).trace();
}

// ---------------------------------------------------------------------------
// State builders.

inline DensityOperator maximally_mixed(const ChainGeometry& g) {
  return DensityOperator::unchecked(
      g, Matrix::Identity(g.total_dim(), g.total_dim()) /
             static_cast<double>(g.total_dim()));
}

/// |+>^{x N}.
inline PureStateVector plus_product(int num_sites) {
  ChainGeometry g = ChainGeometry::uniform(num_sites);
  Vector v = Vector::Constant(g.total_dim(),
                              std::pow(2.0, -0.5 * num_sites));
  return PureStateVector(g, v);
}

/// (1 + P)/2^N with P the given Pauli string over the whole chain; for the
/// default axis 'x' this is the finite-size strongly symmetric partner of the
/// maximally mixed state.
inline DensityOperator string_projected(int num_sites, char axis = 'x') {
  ChainGeometry g = ChainGeometry::uniform(num_sites);
  LocalOperator s = pauli_string(g, Region::range(0, num_sites), axis);
  Matrix m = Matrix::Identity(g.total_dim(), g.total_dim()) + s.matrix();
  return DensityOperator::unchecked(g, m / static_cast<double>(g.total_dim()));
}

/// Pairwise mixture (p |++><++| + (1-p)|--><--|)^{x N/2} on an even chain.
inline DensityOperator paired_pm(int num_sites, double p) {
  require(num_sites >= 2 && num_sites % 2 == 0,
          "paired_pm: even number of sites required");
  require(p >= 0.0 && p <= 1.0, "paired_pm: p must be in [0,1]");
  Vector plus(2), minus(2);
  plus << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
  minus << 1 / std::sqrt(2.0), -1 / std::sqrt(2.0);
  Vector pp = tensor_vector(plus, plus), mm = tensor_vector(minus, minus);
  Matrix pair = p * (pp * pp.adjoint()) + (1 - p) * (mm * mm.adjoint());
  DensityOperator acc =
      DensityOperator::unchecked(ChainGeometry::uniform(2), pair);
  DensityOperator out = acc;
  for (int k = 2; k < num_sites; k += 2) out = tensor(out, acc);
  return out;
}

/// (|0...0><0...0| + |1...1><1...1|)/2.
inline DensityOperator ghz_mixture(int num_sites) {
  ChainGeometry g = ChainGeometry::uniform(num_sites);
  Matrix m = Matrix::Zero(g.total_dim(), g.total_dim());
  m(0, 0) = 0.5;
  m(g.total_dim() - 1, g.total_dim() - 1) = 0.5;
  return DensityOperator::unchecked(g, std::move(m));
}

}  // namespace symscope
