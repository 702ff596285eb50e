#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "symscope/chain.hpp"
#include "symscope/common.hpp"
#include "symscope/fidelity.hpp"
#include "symscope/operators.hpp"
#include "symscope/states.hpp"
#include "symscope/symmetry.hpp"

namespace symscope {

/// Nested family of windows Gamma_1 <= Gamma_2 <= ... used by the scans.
class WindowSchedule {
 public:
  explicit WindowSchedule(std::vector<Region> windows)
      : windows_(std::move(windows)) {
    require(!windows_.empty(), "WindowSchedule: no windows");
    for (std::size_t i = 0; i + 1 < windows_.size(); ++i)
      require(windows_[i + 1].contains(windows_[i]),
              "WindowSchedule: windows must be nested increasing");
    require(!windows_.front().empty(), "WindowSchedule: empty window");
  }

  /// Centered intervals of odd width, topped off with the full chain.
  static WindowSchedule centered(const ChainGeometry& chain) {
    int n = chain.num_sites();
    int c = n / 2;
    std::vector<Region> w;
    for (int width = 1; width <= n; width += 2) {
      int lo = c - width / 2;
      if (lo < 0 || lo + width > n) break;
      w.push_back(Region::range(lo, lo + width));
    }
    if (w.empty() || w.back().size() != n) w.push_back(Region::range(0, n));
    return WindowSchedule(std::move(w));
  }

  /// Grow one site at a time from the seed's span out to the full chain,
  /// alternating sides where possible.
  static WindowSchedule covering(const ChainGeometry& chain,
                                 const Region& seed) {
    require(!seed.empty(), "WindowSchedule: empty seed");
    check_region_in_chain(chain, seed, "WindowSchedule");
    int n = chain.num_sites();
    int lo = seed.sites().front();
    int hi = seed.sites().back() + 1;
    std::vector<Region> w = {Region::range(lo, hi)};
    bool grow_left = true;
    while (hi - lo < n) {
      if (grow_left && lo > 0)
        --lo;
      else if (hi < n)
        ++hi;
      else
        --lo;
      grow_left = !grow_left;
      w.push_back(Region::range(lo, hi));
    }
    return WindowSchedule(std::move(w));
  }

  const std::vector<Region>& windows() const { return windows_; }

  std::vector<int> sizes() const {
    std::vector<int> s;
    for (const Region& r : windows_) s.push_back(r.size());
    return s;
  }

 private:
  std::vector<Region> windows_;
};

struct DiagnosticThresholds {
  double vanish = 1e-8;
  double persist = 1e-3;
  double persist_relative_change = 0.10;
};

/// VANISHING: the last value is below the vanish threshold and the sequence
/// never increases. PERSISTENT: the last value is above the persist threshold
/// and has settled (relative change from the previous window within bound).
/// Everything else is INCONCLUSIVE.
inline std::string classify_sequence(const std::vector<double>& values,
                                     const DiagnosticThresholds& t) {
  require(!values.empty(), "classify_sequence: no values");
  double last = values.back();
  bool nonincreasing = true;
  for (std::size_t i = 0; i + 1 < values.size(); ++i)
    if (values[i + 1] > values[i] + 1e-12) nonincreasing = false;
  if (last <= t.vanish && nonincreasing) return "VANISHING";
  if (last >= t.persist) {
    if (values.size() == 1) return "PERSISTENT";
    double prev = values[values.size() - 2];
    if (std::abs(last - prev) <= t.persist_relative_change * std::abs(last))
      return "PERSISTENT";
  }
  return "INCONCLUSIVE";
}

struct DiagnosticReport {
  std::string diagnostic;
  /// Window sizes for window scans, distances for distance scans.
  std::vector<int> windows;
  std::vector<double> values;
  /// Values under the swapped adjoint convention, when applicable.
  std::vector<double> swapped_values;
  /// Named companion sequences (raw correlators etc.).
  std::vector<std::pair<std::string, std::vector<double>>> extra_series;
  std::vector<std::string> warnings;
  std::string verdict;
  DiagnosticThresholds thresholds;
  std::vector<std::pair<std::string, std::string>> conventions;
};

/// O rho O^dagger, unnormalized; trace equals the weight psi(O^dagger O).
inline DensityOperator charged_push(const DensityOperator& rho,
                                    const LocalOperator& op) {
  Matrix out = conjugate_by_local(op, rho.geometry(), rho.matrix());
  return DensityOperator::unchecked(rho.geometry(), std::move(out));
}

/// Fidelity between windowed restrictions of rho and O rho O^dagger. A
/// VANISHING sequence is the finite-size witness of strong symmetry, a
/// PERSISTENT one of its absence. The swapped convention O^dagger rho O is
/// reported alongside.
inline DiagnosticReport charge_coherence_scan(
    const DensityOperator& rho, const LocalOperator& op,
    const WindowSchedule& schedule, const SymmetryAction* action = nullptr) {
  DiagnosticReport rep;
  rep.diagnostic = "charge_coherence";
  rep.conventions = {{"psi_O", "O rho O_dagger"},
                     {"swapped", "O_dagger rho O"}};
  if (action != nullptr) {
    ChargeCheck check = is_charged(*action, op);
    if (!check.charged)
      rep.warnings.push_back(
          "probe operator is not charged; trivial component norm " +
          std::to_string(check.trivial_component_norm));
  }
  DensityOperator pushed = charged_push(rho, op);
  DensityOperator swapped =
      charged_push(rho, op.adjoint(rho.geometry()));
  for (const Region& w : schedule.windows()) {
    require(w.contains(op.support()),
            "charge_coherence_scan: window smaller than the probe support");
    DensityOperator base = restrict_state(rho, w);
    rep.windows.push_back(w.size());
    rep.values.push_back(fidelity(base, restrict_state(pushed, w)).value);
    rep.swapped_values.push_back(
        fidelity(base, restrict_state(swapped, w)).value);
  }
  rep.verdict = classify_sequence(rep.values, rep.thresholds);
  return rep;
}

/// Vectorization of sqrt(rho) on the doubled chain: sites 0..N-1 carry the
/// original system (restriction there reproduces rho), sites N..2N-1 the
/// conjugate copy.
inline PureStateVector canonical_purification(const DensityOperator& rho) {
  require(std::abs(rho.matrix().trace() - 1.0) <= 1e-8,
          "canonical_purification: state must be normalized");
  Matrix root = detail::psd_sqrt(rho.matrix());
  const ChainGeometry& g = rho.geometry();
  std::vector<int> dims = g.local_dims();
  dims.insert(dims.end(), g.local_dims().begin(), g.local_dims().end());
  ChainGeometry doubled(std::move(dims));
  std::int64_t d = g.total_dim();
  Vector v(d * d);
  for (std::int64_t j = 0; j < d; ++j)
    for (std::int64_t i = 0; i < d; ++i) v(i + d * j) = root(i, j);
  return PureStateVector(doubled, std::move(v));
}

namespace detail {

/// O at original site s times its conjugate at the copy of s.
inline LocalOperator doubled_probe(const LocalOperator& op,
                                   const ChainGeometry& doubled,
                                   int original_sites) {
  require(op.support().size() == 1, "doubled_probe: single-site probe");
  int s = op.support().sites()[0];
  return LocalOperator(doubled, Region({s, original_sites + s}),
                       tensor_matrix(op.matrix(), op.matrix().conjugate()));
}

}  // namespace detail

/// Connected (conj(O) x O)-correlator in the canonical purification versus
/// distance: |<D(x) D(x+d)> - |tr(rho O_x)|^2 |tr(rho O_{x+d})|^2|. The raw
/// two-point values and both one-point variants ride along as extra series.
inline DiagnosticReport purification_clustering_scan(
    const DensityOperator& rho, const LocalOperator& op,
    const std::vector<int>& distances) {
  require(op.support().size() == 1,
          "purification_clustering_scan: single-site probe required");
  require(!distances.empty(), "purification_clustering_scan: no distances");
  DiagnosticReport rep;
  rep.diagnostic = "purification_clustering";
  rep.conventions = {
      {"two_point", "<D(x) D(y)> with D = conj(O) x O on the purification"},
      {"connected", "two_point minus |tr(rho O_x)|^2 |tr(rho O_y)|^2"}};
  const ChainGeometry& g = rho.geometry();
  int n = g.num_sites();
  PureStateVector purif = canonical_purification(rho);
  LocalOperator dx = detail::doubled_probe(op, purif.geometry(), n);
  double disc_x = std::norm(expectation(op, rho));
  double one_x = expectation(dx, purif).real();
  std::vector<double> two_points, purif_one, state_one;
  for (int d : distances) {
    LocalOperator oy = translate(op, g, d);
    LocalOperator dy = detail::doubled_probe(oy, purif.geometry(), n);
    Complex two =
        expectation(local_product(dx, dy, purif.geometry()), purif);
    double disc_y = std::norm(expectation(oy, rho));
    rep.windows.push_back(d);
    rep.values.push_back(std::abs(two - Complex(disc_x * disc_y, 0)));
    two_points.push_back(two.real());
    purif_one.push_back(expectation(dy, purif).real());
    state_one.push_back(disc_x * disc_y);
  }
  rep.extra_series.push_back({"two_point", std::move(two_points)});
  rep.extra_series.push_back({"purification_one_point", std::move(purif_one)});
  rep.extra_series.push_back({"state_one_point_product",
                              std::move(state_one)});
  rep.extra_series.push_back({"purification_one_point_anchor", {one_x}});
  rep.verdict = classify_sequence(rep.values, rep.thresholds);
  return rep;
}

/// tr(O_x O_y rho (O_x O_y)^dagger rho) / tr(rho^2).
inline double renyi2_correlator(const DensityOperator& rho,
                                const LocalOperator& ox,
                                const LocalOperator& oy) {
  double purity = rho.matrix().squaredNorm();
  require(purity > 0, "renyi2_correlator: state has zero purity");
  LocalOperator prod = local_product(ox, oy, rho.geometry());
  Matrix moved = conjugate_by_local(prod, rho.geometry(), rho.matrix());
  Complex num = rho.matrix().conjugate().cwiseProduct(moved).sum();
  return num.real() / purity;
}

/// -tr(rho log rho) in natural log.
inline double von_neumann_entropy(const DensityOperator& rho) {
  require(std::abs(rho.matrix().trace() - 1.0) <= 1e-8,
          "von_neumann_entropy: state must be normalized");
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix(),
                                           Eigen::EigenvaluesOnly);
  double s = 0.0;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
    double p = es.eigenvalues()(i);
    if (p > 0) s -= p * std::log(p);
  }
  return s;
}

struct RelativeEntropyValue {
  double value = 0.0;
  bool support_violation = false;
};

/// S(rho || sigma) = tr(rho log rho) - tr(rho log sigma); infinite (with the
/// flag set) when rho has weight on sigma's null space.
inline RelativeEntropyValue relative_entropy(const DensityOperator& rho,
                                             const DensityOperator& sigma) {
  require(rho.geometry() == sigma.geometry(),
          "relative_entropy: geometry mismatch");
  require(std::abs(rho.matrix().trace() - 1.0) <= 1e-8 &&
              std::abs(sigma.matrix().trace() - 1.0) <= 1e-8,
          "relative_entropy: states must be normalized");
  Eigen::SelfAdjointEigenSolver<Matrix> er(rho.matrix());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sigma.matrix());
  const RealVector& p = er.eigenvalues();
  const RealVector& q = es.eigenvalues();
  double cut = 1e-12;
  double leak = 0.0;
  for (Eigen::Index j = 0; j < q.size(); ++j) {
    if (q(j) > cut) continue;
    leak += (es.eigenvectors().col(j).adjoint() * rho.matrix() *
             es.eigenvectors().col(j))(0)
                .real();
  }
  if (leak > 1e-10)
    return {std::numeric_limits<double>::infinity(), true};
  Matrix overlap = es.eigenvectors().adjoint() * er.eigenvectors();
  double value = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) <= cut) continue;
    value += p(i) * std::log(p(i));
    for (Eigen::Index j = 0; j < q.size(); ++j) {
      if (q(j) <= cut) continue;
      value -= p(i) * std::norm(overlap(j, i)) * std::log(q(j));
    }
  }
  return {value, false};
}

namespace detail {

/// rho re-expressed on the site order (gamma, complement).
inline Matrix reorder_to_bipartition(const DensityOperator& rho,
                                     const Region& gamma,
                                     const Region& comp) {
  const ChainGeometry& g = rho.geometry();
  auto offg = region_offsets(g, gamma);
  auto offc = region_offsets(g, comp);
  std::int64_t dg = static_cast<std::int64_t>(offg.size());
  std::int64_t dc = static_cast<std::int64_t>(offc.size());
  Matrix out(dg * dc, dg * dc);
  const Matrix& m = rho.matrix();
  for (std::int64_t bc = 0; bc < dc; ++bc)
    for (std::int64_t bg = 0; bg < dg; ++bg)
      for (std::int64_t cc = 0; cc < dc; ++cc)
        for (std::int64_t cg = 0; cg < dg; ++cg)
          out(bg + dg * bc, cg + dg * cc) =
              m(offg[bg] + offc[bc], offg[cg] + offc[cc]);
  return out;
}

}  // namespace detail

struct MutualInformationValue {
  double value = 0.0;
  double value_log2 = 0.0;
  double entropy_path = 0.0;
  double relative_entropy_path = 0.0;
};

/// I(Gamma; complement), computed both as S(rho_G) + S(rho_Gc) - S(rho) and
/// as S(rho || rho_G x rho_Gc); the two paths must agree to 1e-8.
inline MutualInformationValue mutual_information(const DensityOperator& rho,
                                                 const Region& gamma) {
  const ChainGeometry& g = rho.geometry();
  check_region_in_chain(g, gamma, "mutual_information");
  Region comp = gamma.complement(g.num_sites());
  require(!gamma.empty() && !comp.empty(),
          "mutual_information: bipartition required");
  DensityOperator a = restrict_state(rho, gamma);
  DensityOperator b = restrict_state(rho, comp);
  double entropy_path = von_neumann_entropy(a) + von_neumann_entropy(b) -
                        von_neumann_entropy(rho);
  DensityOperator reordered = DensityOperator::unchecked(
      concat_geometry(a.geometry(), b.geometry()),
      detail::reorder_to_bipartition(rho, gamma, comp));
  RelativeEntropyValue rel = relative_entropy(reordered, tensor(a, b));
  if (rel.support_violation ||
      std::abs(entropy_path - rel.value) > 1e-8)
    throw std::runtime_error(
        "mutual_information: computation paths disagree beyond 1e-8");
  MutualInformationValue out;
  out.value = entropy_path;
  out.value_log2 = entropy_path / std::log(2.0);
  out.entropy_path = entropy_path;
  out.relative_entropy_path = rel.value;
  return out;
}

/// |tr(rho a b_d) - tr(rho a) tr(rho b_d)| with b translated by each listed
/// distance.
inline DiagnosticReport clustering_scan(const DensityOperator& rho,
                                        const LocalOperator& a,
                                        const LocalOperator& b,
                                        const std::vector<int>& distances) {
  require(!distances.empty(), "clustering_scan: no distances");
  DiagnosticReport rep;
  rep.diagnostic = "operator_clustering";
  const ChainGeometry& g = rho.geometry();
  Complex ea = expectation(a, rho);
  for (int d : distances) {
    LocalOperator bd = translate(b, g, d);
    Complex eab = expectation(local_product(a, bd, g), rho);
    Complex eb = expectation(bd, rho);
    rep.windows.push_back(d);
    rep.values.push_back(std::abs(eab - ea * eb));
  }
  rep.verdict = classify_sequence(rep.values, rep.thresholds);
  return rep;
}

/// Trace distance between the joint state and its image under the action
/// applied on the system region only (identity elsewhere). Any strictly
/// positive value on any extension witnesses the absence of strong symmetry.
inline double extension_symmetry_defect(
    const DensityOperator& joint, const Region& system_region,
    const SymmetryAction& action, int g,
    const DensityOperator* expected_system = nullptr) {
  if (expected_system != nullptr) {
    double mismatch = trace_distance(restrict_state(joint, system_region),
                                     *expected_system);
    require(mismatch <= 1e-9,
            "extension_symmetry_defect: joint does not extend the target "
            "state");
  }
  Realization remapped = remap_realization(
      action.realization(), action.chain(), joint.geometry(), system_region);
  Matrix moved = realization_conjugate_state(joint.geometry(), remapped, g,
                                             joint.matrix());
  return trace_distance(joint.matrix(), moved);
}

/// Pure-witness fast path: T(|a><a|, |b><b|) = sqrt(1 - |<a|b>|^2).
inline double extension_symmetry_defect(
    const PureStateVector& joint, const Region& system_region,
    const SymmetryAction& action, int g,
    const DensityOperator* expected_system = nullptr) {
  if (expected_system != nullptr) {
    double mismatch = trace_distance(restrict_state(joint, system_region),
                                     *expected_system);
    require(mismatch <= 1e-9,
            "extension_symmetry_defect: joint does not extend the target "
            "state");
  }
  Realization remapped = remap_realization(
      action.realization(), action.chain(), joint.geometry(), system_region);
  Vector moved = realization_apply_vector(joint.geometry(), remapped, g,
                                          joint.amplitudes());
  double overlap = std::norm(joint.amplitudes().dot(moved));
  return std::sqrt(std::max(0.0, 1.0 - std::min(1.0, overlap)));
}

}  // namespace symscope
