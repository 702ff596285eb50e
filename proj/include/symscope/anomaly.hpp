#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "symscope/chain.hpp"
#include "symscope/cochain.hpp"
#include "symscope/common.hpp"
#include "symscope/diagnostics.hpp"
#include "symscope/operators.hpp"
#include "symscope/states.hpp"
#include "symscope/symmetry.hpp"

namespace symscope {

/// Truncation of a symmetry action to the half chain [cut, N): on-site
/// factors and gates fully right of the cut are kept, everything else is
/// dropped. The truncated family is generally not a homomorphism; its failure
/// to compose, localized in a boundary window right of the cut, carries the
/// anomaly data.
class HalfChainAction {
 public:
  HalfChainAction(const SymmetryAction& action, int cut, int window_slack = 0)
      : group_(action.group()),
        half_(truncated_geometry(action.chain(), cut)),
        cut_(cut),
        radius_(action.radius()) {
    const ChainGeometry& full = action.chain();
    require(window_slack >= 0, "half_chain_restrict: negative window slack");
    int wlen = std::max(1, 2 * radius_) + window_slack;
    require(wlen <= half_.num_sites(),
            "half_chain_restrict: chain too short for the boundary window");
    window_full_ = Region::range(cut, cut + wlen);
    window_local_ = Region::range(0, wlen);

    if (const auto* os = std::get_if<OnSiteRealization>(&action.realization())) {
      OnSiteRealization t;
      for (const auto& element : os->site_unitaries)
        t.site_unitaries.emplace_back(element.begin() + cut, element.end());
      trunc_ = std::move(t);
    } else {
      const auto& cr = std::get<CircuitRealization>(action.realization());
      CircuitRealization t;
      t.radius = cr.radius;
      for (const auto& element_layers : cr.layers) {
        std::vector<CircuitLayer> kept_layers;
        for (const CircuitLayer& layer : element_layers) {
          CircuitLayer kept;
          for (const CircuitGate& gate : layer) {
            const auto& sites = gate.sites.sites();
            if (sites.empty() || sites.front() < cut) continue;
            std::vector<int> remapped;
            for (int s : sites) remapped.push_back(s - cut);
            kept.push_back({Region(std::move(remapped)), gate.matrix});
          }
          kept_layers.push_back(std::move(kept));
        }
        t.layers.push_back(std::move(kept_layers));
      }
      trunc_ = std::move(t);
    }
    validate(action);
  }

  const GroupTable& group() const { return group_; }
  const ChainGeometry& half_chain() const { return half_; }
  int cut() const { return cut_; }
  int radius() const { return radius_; }
  /// Boundary window in full-chain coordinates.
  const Region& window() const { return window_full_; }
  /// The same window in half-chain coordinates: the first sites.
  const Region& local_window() const { return window_local_; }
  std::int64_t window_dim() const {
    return detail::region_dim(half_, window_local_);
  }

  /// alpha^R_g applied to a half-chain operator.
  LocalOperator apply(int g, const LocalOperator& op,
                      bool inverse = false) const {
    return apply_realization(half_, trunc_, g, op, inverse);
  }

  /// Dense truncated unitary on the half chain.
  Matrix unitary(int g) const {
    return realization_unitary(half_, trunc_, g);
  }

 private:
  static ChainGeometry truncated_geometry(const ChainGeometry& full, int cut) {
    require(cut >= 0 && cut < full.num_sites(),
            "half_chain_restrict: cut outside chain");
    std::vector<int> dims;
    for (int s = cut; s < full.num_sites(); ++s)
      dims.push_back(full.local_dim(s));
    return ChainGeometry(std::move(dims));
  }

  void validate(const SymmetryAction& action) const {
    const ChainGeometry& full = action.chain();
    // The identity element must still act as the identity map after
    // truncation (dropped gates could otherwise break a cancelling circuit).
    int e = group_.identity();
    for (int s = 0; s < half_.num_sites(); ++s) {
      int d = half_.local_dim(s);
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
          Matrix unit = Matrix::Zero(d, d);
          unit(a, b) = 1.0;
          LocalOperator probe(half_, Region::single(s), unit);
          LocalOperator out = apply(e, probe);
          LocalOperator want = embed_into(probe, half_, out.support());
          require((out.matrix() - want.matrix()).cwiseAbs().maxCoeff() <=
                      kHomomorphismTol,
                  "half_chain_restrict: identity element no longer acts "
                  "trivially after truncation");
        }
    }
    // Deep-interior agreement: right of cut + radius the truncation is
    // invisible.
    for (int g = 0; g < group_.order(); ++g)
      for (int s = cut_ + radius_; s < full.num_sites(); ++s)
        for (char axis : {'x', 'y', 'z'}) {
          LocalOperator full_out =
              apply_action(action, g, pauli_at(full, s, axis));
          LocalOperator half_out =
              apply(g, pauli_at(half_, s - cut_, axis));
          std::vector<int> shifted;
          for (int x : half_out.support().sites()) shifted.push_back(x + cut_);
          LocalOperator lifted(full, Region(std::move(shifted)),
                               half_out.matrix());
          Region common = lifted.support().united(full_out.support());
          double diff = (embed_into(lifted, full, common).matrix() -
                         embed_into(full_out, full, common).matrix())
                            .cwiseAbs()
                            .maxCoeff();
          require(diff <= kHomomorphismTol,
                  "half_chain_restrict: truncated action disagrees with the "
                  "parent deep in the interior");
        }
  }

  GroupTable group_;
  ChainGeometry half_;
  int cut_;
  int radius_;
  Region window_full_{std::vector<int>{0}};
  Region window_local_{std::vector<int>{0}};
  Realization trunc_;
};

inline HalfChainAction half_chain_restrict(const SymmetryAction& action,
                                           int cut, int window_slack = 0) {
  return HalfChainAction(action, cut, window_slack);
}

/// Reconstruct V with beta(a) = V a V^dagger from the Choi form of the map:
/// for an inner automorphism C[(i,k),(j,l)] = beta(E_kl)(i,j) is rank one
/// with eigenvector vec(V). Gauge: first nonzero entry of V (row-major) made
/// positive real. Throws if the Choi rank exceeds one, which signals that the
/// map is not inner on this window.
inline Matrix recover_inner_unitary(
    const std::function<Matrix(const Matrix&)>& beta, std::int64_t dim,
    double tol = kInnerRecoveryTol) {
  require(dim > 0, "recover_inner_unitary: empty window");
  const std::int64_t d2 = dim * dim;
  Matrix choi = Matrix::Zero(d2, d2);
  for (std::int64_t k = 0; k < dim; ++k)
    for (std::int64_t l = 0; l < dim; ++l) {
      Matrix unit = Matrix::Zero(dim, dim);
      unit(k, l) = 1.0;
      Matrix moved = beta(unit);
      require(moved.rows() == dim && moved.cols() == dim,
              "recover_inner_unitary: map changes dimensions");
      for (std::int64_t i = 0; i < dim; ++i)
        for (std::int64_t j = 0; j < dim; ++j)
          choi(i + dim * k, j + dim * l) = moved(i, j);
    }
  choi = ((choi + choi.adjoint()) / 2.0).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> es(choi);
  double top = es.eigenvalues()(d2 - 1);
  double second = d2 > 1 ? es.eigenvalues()(d2 - 2) : 0.0;
  double bottom = es.eigenvalues()(0);
  require(top > 0, "recover_inner_unitary: map annihilates the window");
  if (std::abs(second) > tol * top || bottom < -tol * top)
    throw std::runtime_error(
        "recover_inner_unitary: Choi rank exceeds one; the map is not inner "
        "on this window (enlarge the window)");
  Vector vec = std::sqrt(top) * es.eigenvectors().col(d2 - 1);
  Matrix v(dim, dim);
  for (std::int64_t k = 0; k < dim; ++k)
    for (std::int64_t i = 0; i < dim; ++i) v(i, k) = vec(i + dim * k);
  double floor = 1e-6 * v.cwiseAbs().maxCoeff();
  for (std::int64_t i = 0; i < dim; ++i) {
    bool fixed = false;
    for (std::int64_t k = 0; k < dim; ++k)
      if (std::abs(v(i, k)) > floor) {
        v *= std::conj(v(i, k)) / std::abs(v(i, k));
        fixed = true;
        break;
      }
    if (fixed) break;
  }
  if (!detail::is_unitary(v, std::max(tol, kUnitarityTol)))
    throw std::runtime_error(
        "recover_inner_unitary: reconstructed matrix is not unitary");
  double residual = 0.0;
  for (std::int64_t k = 0; k < dim; ++k)
    for (std::int64_t l = 0; l < dim; ++l) {
      Matrix unit = Matrix::Zero(dim, dim);
      unit(k, l) = 1.0;
      residual = std::max(residual, (beta(unit) - v * unit * v.adjoint())
                                        .cwiseAbs()
                                        .maxCoeff());
    }
  if (residual > std::max(tol, kInnerRecoveryTol))
    throw std::runtime_error(
        "recover_inner_unitary: reconstruction residual too large");
  return v;
}

/// Boundary unitaries V_{g,h} on the window, defined by
/// alpha^R_g alpha^R_h = Ad_{V_{g,h}} alpha^R_{gh}, phase-gauged.
struct BoundaryCocycleData {
  GroupTable group;
  Region window;                       // full-chain coordinates
  std::vector<std::vector<Matrix>> v;  // [g][h]
  double max_residual = 0.0;           // window-escape residual of the data
};

inline BoundaryCocycleData boundary_cocycle_data(
    const HalfChainAction& half, double tol = kInnerRecoveryTol) {
  const GroupTable& group = half.group();
  const int m = group.order();
  const std::int64_t dw = half.window_dim();
  const std::int64_t dfull = half.half_chain().total_dim();
  const std::int64_t drest = dfull / dw;
  std::vector<Matrix> u(static_cast<std::size_t>(m));
  for (int g = 0; g < m; ++g) u[static_cast<std::size_t>(g)] = half.unitary(g);

  BoundaryCocycleData out{group, half.window(), {}, 0.0};
  out.v.assign(static_cast<std::size_t>(m),
               std::vector<Matrix>(static_cast<std::size_t>(m)));
  Matrix rest_id = Matrix::Identity(drest, drest);
  for (int g = 0; g < m; ++g)
    for (int h = 0; h < m; ++h) {
      Matrix defect = u[static_cast<std::size_t>(g)] *
                      u[static_cast<std::size_t>(h)] *
                      u[static_cast<std::size_t>(group.mult(g, h))].adjoint();
      auto beta = [&](const Matrix& a) {
        Matrix moved =
            defect * tensor_matrix(a, rest_id) * defect.adjoint();
        Matrix compressed = Matrix::Zero(dw, dw);
        for (std::int64_t i = 0; i < dw; ++i)
          for (std::int64_t j = 0; j < dw; ++j)
            for (std::int64_t r = 0; r < drest; ++r)
              compressed(i, j) += moved(i + dw * r, j + dw * r);
        compressed /= static_cast<double>(drest);
        out.max_residual = std::max(
            out.max_residual, (moved - tensor_matrix(compressed, rest_id))
                                  .cwiseAbs()
                                  .maxCoeff());
        return compressed;
      };
      out.v[static_cast<std::size_t>(g)][static_cast<std::size_t>(h)] =
          recover_inner_unitary(beta, dw, tol);
    }
  if (out.max_residual > tol)
    throw std::runtime_error(
        "boundary_cocycle_data: composition defect escapes the boundary "
        "window (enlarge the window)");
  return out;
}

/// omega_{g,h,k} = V_{g,h} V_{gh,k} V_{g,hk}^{-1} alpha^R_g(V_{h,k})^{-1},
/// a scalar on the half chain, snapped to an exact rational phase.
inline Cochain anomaly_3cocycle(const BoundaryCocycleData& data,
                                const HalfChainAction& half,
                                double tol = kInnerRecoveryTol,
                                long long max_den = 0) {
  const GroupTable& group = half.group();
  require(data.group == group, "anomaly_3cocycle: data/action group mismatch");
  const int m = group.order();
  if (max_den <= 0) max_den = 4LL * m * m;
  const std::int64_t dw = half.window_dim();
  const std::int64_t dfull = half.half_chain().total_dim();
  const std::int64_t drest = dfull / dw;
  Matrix rest_id = Matrix::Identity(drest, drest);
  std::vector<Matrix> u(static_cast<std::size_t>(m));
  for (int g = 0; g < m; ++g) u[static_cast<std::size_t>(g)] = half.unitary(g);
  auto lift = [&](const Matrix& v) { return tensor_matrix(v, rest_id); };
  auto vat = [&](int g, int h) -> const Matrix& {
    return data.v[static_cast<std::size_t>(g)][static_cast<std::size_t>(h)];
  };

  Cochain out(group, 3);
  for (int g = 0; g < m; ++g)
    for (int h = 0; h < m; ++h)
      for (int k = 0; k < m; ++k) {
        Matrix pushed = u[static_cast<std::size_t>(g)] * lift(vat(h, k)) *
                        u[static_cast<std::size_t>(g)].adjoint();
        Matrix w = lift(vat(g, h)) * lift(vat(group.mult(g, h), k)) *
                   lift(vat(g, group.mult(h, k))).adjoint() * pushed.adjoint();
        Complex c = w.trace() / static_cast<double>(dfull);
        bool scalar =
            std::abs(std::abs(c) - 1.0) <= tol &&
            (w - c * Matrix::Identity(dfull, dfull)).cwiseAbs().maxCoeff() <=
                10 * tol;
        if (!scalar)
          throw std::runtime_error(
              "anomaly_3cocycle: associator is not a scalar (window too "
              "small or invalid boundary data)");
        out.set({g, h, k}, Phase::from_unit(c, max_den));
      }
  require(is_cocycle(out),
          "anomaly_3cocycle: snapped phases violate the cocycle identity");
  return out;
}

/// Convenience pipeline: restrict, reconstruct boundary data, assemble omega.
inline Cochain anomaly_3cocycle(const SymmetryAction& action, int cut,
                                int window_slack = 0,
                                double tol = kInnerRecoveryTol) {
  HalfChainAction half(action, cut, window_slack);
  return anomaly_3cocycle(boundary_cocycle_data(half, tol), half, tol);
}

/// Joint report of the four obstruction conditions: strong symmetry,
/// clustering, the mutual-information boundedness proxy, and the anomaly
/// class. The four cannot all hold at once; a report that claims they do is
/// flagged as a toolkit inconsistency.
struct LsmObstructionReport {
  std::string status;  // NO-OBSTRUCTION | NOT-APPLICABLE | TOOLKIT-INCONSISTENCY
  bool anomaly_trivial = true;
  std::optional<Cochain> anomaly;
  double strong_defect = 0.0;
  std::string strong_verdict;      // STRONG | NOT-STRONG
  std::string clustering_verdict;  // VANISHING | PERSISTENT | INCONCLUSIVE
  std::vector<double> clustering_values;
  std::string mi_verdict;  // BOUNDED | LARGE
  std::vector<double> mi_values;
  std::vector<std::string> notes;
};

inline LsmObstructionReport lsm_obstruction_report(
    const DensityOperator& rho, const SymmetryAction& action,
    const LocalOperator& clustering_probe, int cut = -1,
    double mi_bound = 2.0 * std::numbers::ln2) {
  require(rho.geometry() == action.chain(),
          "lsm_obstruction_report: state/action chain mismatch");
  const ChainGeometry& chain = rho.geometry();
  const int n = chain.num_sites();
  LsmObstructionReport rep;

  constexpr double kStrongTol = 1e-8;
  rep.strong_defect = strong_symmetry_defect_finite(rho, action);
  rep.strong_verdict = rep.strong_defect <= kStrongTol ? "STRONG" : "NOT-STRONG";

  int reach = clustering_probe.support().sites().back();
  std::vector<int> distances;
  for (int d = 1; reach + d < n; ++d) distances.push_back(d);
  require(!distances.empty(),
          "lsm_obstruction_report: no room to translate the probe");
  DiagnosticReport cl =
      clustering_scan(rho, clustering_probe, clustering_probe, distances);
  rep.clustering_verdict = cl.verdict;
  rep.clustering_values = cl.values;

  for (int c = 1; c < n; ++c)
    rep.mi_values.push_back(mutual_information(rho, Region::range(0, c)).value);
  double mi_max = 0.0;
  for (double v : rep.mi_values) mi_max = std::max(mi_max, v);
  rep.mi_verdict = mi_max <= mi_bound ? "BOUNDED" : "LARGE";

  Cochain omega = anomaly_3cocycle(action, cut < 0 ? n / 2 : cut);
  rep.anomaly_trivial = is_coboundary(omega);
  rep.anomaly = std::move(omega);

  bool strong = rep.strong_verdict == "STRONG";
  bool clusters = rep.clustering_verdict == "VANISHING";
  bool bounded = rep.mi_verdict == "BOUNDED";
  if (strong && clusters && bounded) {
    if (rep.anomaly_trivial) {
      rep.status = "NO-OBSTRUCTION";
      rep.notes.push_back(
          "anomaly class trivial and all hypotheses hold: compatible");
    } else {
      rep.status = "TOOLKIT-INCONSISTENCY";
      rep.notes.push_back(
          "nontrivial anomaly with strong symmetry, clustering, and bounded "
          "mutual information: impossible configuration, check the toolkit");
    }
  } else {
    rep.status = "NOT-APPLICABLE";
    rep.notes.push_back("a hypothesis fails, so the theorem imposes nothing");
    if (!strong) rep.notes.push_back("strong symmetry fails at finite size");
    if (!clusters) rep.notes.push_back("clustering fails or is inconclusive");
    if (!bounded) rep.notes.push_back("mutual information exceeds the bound");
  }
  return rep;
}

}  // namespace symscope
