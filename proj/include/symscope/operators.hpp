#pragma once

#include <vector>

#include "symscope/chain.hpp"
#include "symscope/common.hpp"

namespace symscope {

namespace detail {

/// Embed a matrix acting on a subset of tensor factors into the full space,
/// padding the remaining factors with identity. `dims` are the local
/// dimensions of all factors (little-endian), `positions` the factor indices
/// (sorted) the matrix acts on.
inline Matrix embed_matrix(const std::vector<int>& dims,
                           const std::vector<int>& positions, const Matrix& m) {
  ChainGeometry g(dims);
  Region support(positions);
  std::int64_t ds = region_dim(g, support);
  require(m.rows() == ds && m.cols() == ds,
          "embed: matrix dimension inconsistent with support");
  Region rest = support.complement(g.num_sites());
  auto sup_off = region_offsets(g, support);
  auto rest_off = region_offsets(g, rest);
  Matrix full = Matrix::Zero(g.total_dim(), g.total_dim());
  for (std::int64_t r = 0; r < ds; ++r)
    for (std::int64_t c = 0; c < ds; ++c) {
      Complex v = m(r, c);
      if (v == Complex(0, 0)) continue;
      for (std::int64_t t : rest_off) full(sup_off[r] + t, sup_off[c] + t) = v;
    }
  return full;
}

}  // namespace detail

/// Operator supported on a subset of chain sites. The matrix is expressed in
/// the little-endian basis of the support (first support site fastest).
class LocalOperator {
 public:
  LocalOperator(const ChainGeometry& chain, Region support, Matrix m)
      : support_(std::move(support)), matrix_(std::move(m)) {
    check_region_in_chain(chain, support_, "LocalOperator");
    require(!support_.empty(), "LocalOperator: empty support");
    for (int s : support_.sites()) dims_.push_back(chain.local_dim(s));
    std::int64_t d = 1;
    for (int ld : dims_) d *= ld;
    require(matrix_.rows() == d && matrix_.cols() == d,
            "LocalOperator: matrix dimension inconsistent with support");
  }

  const Region& support() const { return support_; }
  const std::vector<int>& support_dims() const { return dims_; }
  const Matrix& matrix() const { return matrix_; }
  std::int64_t dim() const { return matrix_.rows(); }

  LocalOperator adjoint(const ChainGeometry& chain) const {
    return LocalOperator(chain, support_, matrix_.adjoint());
  }

 private:
  Region support_;
  std::vector<int> dims_;
  Matrix matrix_;
};

/// Identity padding of a local operator into the full chain.
inline Matrix embed(const LocalOperator& op, const ChainGeometry& chain) {
  check_region_in_chain(chain, op.support(), "embed");
  std::vector<int> positions = op.support().sites();
  return detail::embed_matrix(chain.local_dims(), positions, op.matrix());
}

/// Re-express `op` on the (larger) region `window`; identity on the rest.
inline LocalOperator embed_into(const LocalOperator& op,
                                const ChainGeometry& chain,
                                const Region& window) {
  require(window.contains(op.support()), "embed_into: window misses support");
  std::vector<int> wdims;
  for (int s : window.sites()) wdims.push_back(chain.local_dim(s));
  std::vector<int> positions;
  for (int s : op.support().sites()) positions.push_back(window.position_of(s));
  return LocalOperator(chain, window,
                       detail::embed_matrix(wdims, positions, op.matrix()));
}

/// Product a*b on the union support.
inline LocalOperator local_product(const LocalOperator& a,
                                   const LocalOperator& b,
                                   const ChainGeometry& chain) {
  Region u = a.support().united(b.support());
  LocalOperator ea = embed_into(a, chain, u);
  LocalOperator eb = embed_into(b, chain, u);
  return LocalOperator(chain, u, ea.matrix() * eb.matrix());
}

inline Matrix pauli_id() { return Matrix::Identity(2, 2); }
inline Matrix pauli_x() {
  Matrix m(2, 2);
  m << 0, 1, 1, 0;
  return m;
}
inline Matrix pauli_y() {
  Matrix m(2, 2);
  m << Complex(0, 0), Complex(0, -1), Complex(0, 1), Complex(0, 0);
  return m;
}
inline Matrix pauli_z() {
  Matrix m(2, 2);
  m << 1, 0, 0, -1;
  return m;
}

inline Matrix pauli_by_name(char name) {
  switch (name) {
    case 'i': case 'I': return pauli_id();
    case 'x': case 'X': return pauli_x();
    case 'y': case 'Y': return pauli_y();
    case 'z': case 'Z': return pauli_z();
    default: throw std::invalid_argument("unknown Pauli name");
  }
}

inline LocalOperator site_operator(const ChainGeometry& chain, int site,
                                   const Matrix& m) {
  return LocalOperator(chain, Region::single(site), m);
}

inline LocalOperator pauli_at(const ChainGeometry& chain, int site, char name) {
  require(chain.local_dim(site) == 2, "pauli_at: site is not a qubit");
  return site_operator(chain, site, pauli_by_name(name));
}

/// The same operator with its support shifted by `offset` sites.
inline LocalOperator translate(const LocalOperator& op,
                               const ChainGeometry& chain, int offset) {
  std::vector<int> sites;
  for (int s : op.support().sites()) sites.push_back(s + offset);
  Region moved(sites);
  check_region_in_chain(chain, moved, "translate");
  require(sites.front() >= 0, "translate: region exceeds chain");
  for (std::size_t i = 0; i < sites.size(); ++i)
    require(chain.local_dim(sites[i]) == op.support_dims()[i],
            "translate: local dimensions differ at target");
  return LocalOperator(chain, moved, op.matrix());
}

/// Product of the same single-qubit Pauli over a region (e.g. an X-string).
inline LocalOperator pauli_string(const ChainGeometry& chain,
                                  const Region& region, char name) {
  require(!region.empty(), "pauli_string: empty region");
  LocalOperator acc = pauli_at(chain, region.sites()[0], name);
  for (std::size_t i = 1; i < region.sites().size(); ++i)
    acc = local_product(acc, pauli_at(chain, region.sites()[i], name), chain);
  return acc;
}

}  // namespace symscope
