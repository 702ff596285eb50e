#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "symscope/chain.hpp"
#include "symscope/common.hpp"
#include "symscope/diagnostics.hpp"
#include "symscope/operators.hpp"
#include "symscope/states.hpp"
#include "symscope/symmetry.hpp"

namespace symscope {

/// Trace drift allowed when a channel is applied to a state.
inline constexpr double kChannelTraceTol = 1e-10;
/// Commutator norm below which a dilation counts as strongly symmetric.
inline constexpr double kChannelSymmetryTol = 1e-9;

/// Quantum channel in Stinespring form: a bath prepared in a fixed state,
/// one joint unitary on [system, bath] (system sites first and fastest),
/// and a partial trace over the bath. Kraus operators are extracted once at
/// construction and reused by every application.
class Channel {
 public:
  static Channel from_matrix(ChainGeometry system, ChainGeometry bath,
                             DensityOperator bath_state, Matrix joint_unitary) {
    return Channel(std::move(system), std::move(bath), std::move(bath_state),
                   std::move(joint_unitary), {});
  }

  /// Gates are given in joint coordinates (system sites 0..N_sys-1, bath
  /// sites following) and multiplied in list order, first entry acting first.
  static Channel from_gates(ChainGeometry system, ChainGeometry bath,
                            DensityOperator bath_state,
                            std::vector<CircuitGate> gates) {
    ChainGeometry joint = concat_geometry(system, bath);
    Matrix w = Matrix::Identity(joint.total_dim(), joint.total_dim());
    for (const CircuitGate& gate : gates) {
      check_region_in_chain(joint, gate.sites, "Channel gate");
      require(detail::is_unitary(gate.matrix), "Channel: gate is not unitary");
      w = detail::embed_matrix(joint.local_dims(), gate.sites.sites(),
                               gate.matrix) *
          w;
    }
    return Channel(std::move(system), std::move(bath), std::move(bath_state),
                   std::move(w), std::move(gates));
  }

  /// Channel that leaves the system untouched (one idle bath qubit).
  static Channel identity(const ChainGeometry& system) {
    ChainGeometry bath = ChainGeometry::uniform(1);
    Matrix phi = Matrix::Zero(2, 2);
    phi(0, 0) = 1.0;
    Matrix w = Matrix::Identity(2 * system.total_dim(), 2 * system.total_dim());
    return from_matrix(system, bath, DensityOperator(bath, phi), std::move(w));
  }

  const ChainGeometry& system() const { return system_; }
  const ChainGeometry& bath() const { return bath_; }
  const ChainGeometry& joint() const { return joint_; }
  const DensityOperator& bath_state() const { return bath_state_; }
  const Matrix& unitary() const { return unitary_; }
  /// Empty unless the channel was built from a gate list.
  const std::vector<CircuitGate>& gates() const { return gates_; }
  const std::vector<Matrix>& kraus() const { return kraus_; }

 private:
  Channel(ChainGeometry system, ChainGeometry bath, DensityOperator bath_state,
          Matrix unitary, std::vector<CircuitGate> gates)
      : system_(std::move(system)),
        bath_(std::move(bath)),
        joint_(concat_geometry(system_, bath_)),
        bath_state_(std::move(bath_state)),
        unitary_(std::move(unitary)),
        gates_(std::move(gates)) {
    require(bath_state_.geometry() == bath_,
            "Channel: bath state does not live on the bath chain");
    require(joint_.total_dim() <= dimension_cap(),
            "Channel: joint dimension exceeds the cap");
    require(unitary_.rows() == joint_.total_dim() &&
                unitary_.cols() == joint_.total_dim(),
            "Channel: joint unitary does not match system x bath");
    require(detail::is_unitary(unitary_),
            "Channel: joint evolution is not unitary");
    build_kraus();
  }

  // A_{m,k} = sqrt(p_k) (I ox <m|) W (I ox |phi_k>) over bath eigenpairs.
  void build_kraus() {
    Eigen::SelfAdjointEigenSolver<Matrix> es(bath_state_.matrix());
    const std::int64_t ds = system_.total_dim();
    const std::int64_t db = bath_.total_dim();
    double top = es.eigenvalues().maxCoeff();
    for (std::int64_t k = 0; k < db; ++k) {
      double p = es.eigenvalues()(k);
      if (p <= 1e-12 * top) continue;
      Vector phi = es.eigenvectors().col(k);
      for (std::int64_t m = 0; m < db; ++m) {
        Matrix a = Matrix::Zero(ds, ds);
        for (std::int64_t n = 0; n < db; ++n) {
          if (phi(n) == Complex(0, 0)) continue;
          a += unitary_.block(ds * m, ds * n, ds, ds) * phi(n);
        }
        kraus_.push_back(std::sqrt(p) * a);
      }
    }
    Matrix sum = Matrix::Zero(ds, ds);
    for (const Matrix& a : kraus_) sum += a.adjoint() * a;
    double err = (sum - Matrix::Identity(ds, ds)).cwiseAbs().maxCoeff();
    require(err <= kChannelTraceTol * 10,
            "Channel: Kraus family is not trace preserving");
  }

  ChainGeometry system_;
  ChainGeometry bath_;
  ChainGeometry joint_;
  DensityOperator bath_state_;
  Matrix unitary_;
  std::vector<CircuitGate> gates_;
  std::vector<Matrix> kraus_;
};

inline const std::vector<Matrix>& kraus_operators(const Channel& ch) {
  return ch.kraus();
}

/// Choi matrix C = sum_k vec(A_k) vec(A_k)^dag with vec stacking columns
/// (vec(A)(a + d*i) = A(a, i)). Positive semidefinite and trace d for any
/// trace-preserving channel.
inline Matrix choi_matrix(const Channel& ch) {
  const std::int64_t d = ch.system().total_dim();
  Matrix c = Matrix::Zero(d * d, d * d);
  for (const Matrix& a : ch.kraus()) {
    Vector v(d * d);
    for (std::int64_t i = 0; i < d; ++i) v.segment(d * i, d) = a.col(i);
    c += v * v.adjoint();
  }
  return c;
}

inline DensityOperator apply_channel(const Channel& ch,
                                     const DensityOperator& rho) {
  require(rho.geometry() == ch.system(),
          "apply_channel: state does not live on the system chain");
  const std::int64_t d = ch.system().total_dim();
  Matrix out = Matrix::Zero(d, d);
  for (const Matrix& a : ch.kraus()) out += a * rho.matrix() * a.adjoint();
  require(std::abs(out.trace().real() - rho.matrix().trace().real()) <=
              kChannelTraceTol,
          "apply_channel: trace not preserved");
  return DensityOperator(ch.system(), std::move(out));
}

/// Pre-trace state W (rho ox Phi_B) W^dag on the joint chain.
inline DensityOperator joint_output(const Channel& ch,
                                    const DensityOperator& rho) {
  require(rho.geometry() == ch.system(),
          "joint_output: state does not live on the system chain");
  Matrix m = tensor(rho, ch.bath_state()).matrix();
  return DensityOperator(ch.joint(),
                         ch.unitary() * m * ch.unitary().adjoint());
}

/// Sequential composition: `first` acts on the state, then `second`. The
/// composite keeps both baths, ordered [system, bath_1, bath_2].
inline Channel compose_channels(const Channel& first, const Channel& second) {
  require(first.system() == second.system(),
          "compose_channels: system chains differ");
  ChainGeometry bath = concat_geometry(first.bath(), second.bath());
  ChainGeometry joint = concat_geometry(first.system(), bath);
  require(joint.total_dim() <= dimension_cap(),
          "compose_channels: combined dimension cap exceeded");
  const int ns = first.system().num_sites();
  const int nb1 = first.bath().num_sites();
  Matrix w1 = tensor_matrix(first.unitary(),
                            Matrix::Identity(second.bath().total_dim(),
                                             second.bath().total_dim()));
  std::vector<int> positions;
  for (int s = 0; s < ns; ++s) positions.push_back(s);
  for (int s = 0; s < second.bath().num_sites(); ++s)
    positions.push_back(ns + nb1 + s);
  Matrix w2 = detail::embed_matrix(joint.local_dims(), positions,
                                   second.unitary());
  std::vector<CircuitGate> gates;
  if (!first.gates().empty() && !second.gates().empty()) {
    gates = first.gates();
    for (CircuitGate gate : second.gates()) {
      std::vector<int> sites;
      for (int s : gate.sites.sites()) sites.push_back(s < ns ? s : s + nb1);
      gate.sites = Region(sites);
      gates.push_back(std::move(gate));
    }
  }
  DensityOperator bath_state = tensor(first.bath_state(), second.bath_state());
  if (!gates.empty())
    return Channel::from_gates(first.system(), std::move(bath),
                               std::move(bath_state), std::move(gates));
  return Channel::from_matrix(first.system(), std::move(bath),
                              std::move(bath_state), w2 * w1);
}

struct ChannelSymmetryReport {
  bool strongly_symmetric = false;
  double defect = 0.0;
};

/// A dilation is strongly symmetric when the joint unitary commutes with
/// U_g ox identity_bath for every group element; the defect is the largest
/// Frobenius commutator norm over non-identity elements.
inline ChannelSymmetryReport is_strongly_symmetric_channel(
    const Channel& ch, const SymmetryAction& action) {
  require(action.chain() == ch.system(),
          "is_strongly_symmetric_channel: action chain differs from system");
  const std::int64_t db = ch.bath().total_dim();
  Matrix idb = Matrix::Identity(db, db);
  double defect = 0.0;
  for (int g = 0; g < action.group().order(); ++g) {
    if (g == action.group().identity()) continue;
    Matrix lifted = tensor_matrix(action_unitary(action, g), idb);
    defect = std::max(defect,
                      (ch.unitary() * lifted - lifted * ch.unitary()).norm());
  }
  return {defect <= kChannelSymmetryTol, defect};
}

/// Dephasing bath of the cluster form: one bath qubit in |+> between every
/// neighbouring pair of system sites, coupled by a controlled-Z gate to each
/// of its two neighbours. The joint unitary commutes exactly with the system
/// X-string, and on a product |+> input the pre-trace state is the open
/// cluster state on the zigzag graph s_0 b_1 s_1 ... b_{N-1} s_{N-1}.
inline Channel cluster_dephasing_channel(int num_system_sites) {
  require(num_system_sites >= 2,
          "cluster_dephasing_channel: need at least two system sites");
  const int n = num_system_sites;
  ChainGeometry system = ChainGeometry::uniform(n);
  ChainGeometry bath = ChainGeometry::uniform(n - 1);
  Matrix cz = Matrix::Identity(4, 4);
  cz(3, 3) = -1.0;
  std::vector<CircuitGate> gates;
  for (int j = 1; j < n; ++j) {
    gates.push_back({Region({j - 1, n + j - 1}), cz});
    gates.push_back({Region({j, n + j - 1}), cz});
  }
  return Channel::from_gates(std::move(system), std::move(bath),
                             plus_product(n - 1).projector(),
                             std::move(gates));
}

/// Zigzag graph state on N system qubits interleaved with N+1 offset bath
/// qubits (system sites first in the chain ordering). Tracing out the bath
/// leaves the system exactly maximally mixed, yet the global vector is moved
/// by the system X-string: the standard witness that maximal mixing admits
/// non-invariant extensions.
inline PureStateVector cluster_extension_state(int num_system_sites) {
  require(num_system_sites >= 1,
          "cluster_extension_state: need at least one system site");
  const int n = num_system_sites;
  ChainGeometry chain = ChainGeometry::uniform(2 * n + 1);
  std::vector<std::pair<int, int>> edges;
  for (int j = 0; j < n; ++j) {
    edges.emplace_back(j, n + j);
    edges.emplace_back(j, n + j + 1);
  }
  const std::int64_t d = chain.total_dim();
  Vector v(d);
  const double amp = 1.0 / std::sqrt(static_cast<double>(d));
  for (std::int64_t z = 0; z < d; ++z) {
    int sign = 1;
    for (const auto& [p, q] : edges)
      if (((z >> p) & 1) && ((z >> q) & 1)) sign = -sign;
    v(z) = sign * amp;
  }
  return PureStateVector(std::move(chain), std::move(v));
}

struct IrreversibilityReport {
  double channel_defect;
  double input_strong_defect;
  /// Finite-size strong defect of the pre-trace output under the action
  /// extended by identity on the bath.
  double joint_strong_defect;
  /// Trace-distance motion of the retained joint state when the action is
  /// applied on the system factor alone (worst non-identity element).
  double retained_witness_defect;
  /// Same motion for a caller-supplied extension of the output's local data.
  std::optional<double> supplied_witness_defect;
  /// Charge-coherence scan of the traced output.
  DiagnosticReport coherence;
  DensityOperator joint_state;
  DensityOperator traced_output;
  std::string preservation_verdict;
};

/// Runs a strongly symmetric channel on a strongly symmetric input and
/// reports (i) the strong defect of the pre-trace output, (ii) the
/// charge-coherence scan of the traced output, and (iii) extension defects:
/// always for the retained joint state, and additionally for an optional
/// witness extension. A supplied witness must be locally indistinguishable
/// from the traced output (every proper window, trace distance <= 1e-9); it
/// need not match globally, which is exactly what makes a positive value a
/// witness that the local data alone cannot certify strong symmetry.
inline IrreversibilityReport irreversibility_experiment(
    const DensityOperator& rho_initial, const Channel& ch,
    const SymmetryAction& action, const LocalOperator& probe,
    const WindowSchedule& schedule,
    const PureStateVector* witness_extension = nullptr) {
  ChannelSymmetryReport sym = is_strongly_symmetric_channel(ch, action);
  require(sym.strongly_symmetric,
          "irreversibility_experiment: preconditions violated: channel is "
          "not strongly symmetric");
  double input_defect = strong_symmetry_defect_finite(rho_initial, action);
  require(input_defect <= 1e-8,
          "irreversibility_experiment: preconditions violated: input state "
          "is not strongly symmetric at finite size");

  DensityOperator joint = joint_output(ch, rho_initial);
  const int ns = ch.system().num_sites();
  Region system_region = Region::range(0, ns);
  DensityOperator traced = restrict_state(joint, system_region);

  SymmetryAction extended = extend_action_to_joint(action, ch.joint());
  double joint_defect = strong_symmetry_defect_finite(joint, extended);

  double retained = 0.0;
  for (int g = 0; g < action.group().order(); ++g) {
    if (g == action.group().identity()) continue;
    retained = std::max(
        retained, extension_symmetry_defect(joint, system_region, action, g));
  }

  std::optional<double> supplied;
  if (witness_extension != nullptr) {
    const ChainGeometry& wg = witness_extension->geometry();
    require(wg.num_sites() >= ns,
            "irreversibility_experiment: witness chain shorter than system");
    for (int s = 0; s < ns; ++s)
      require(wg.local_dim(s) == ch.system().local_dim(s),
              "irreversibility_experiment: witness system sites do not match");
    for (int len = 1; len < ns; ++len)
      for (int a = 0; a + len <= ns; ++a) {
        Region w = Region::range(a, a + len);
        require(trace_distance(restrict_state(*witness_extension, w),
                               restrict_state(traced, w)) <= 1e-9,
                "irreversibility_experiment: witness is locally "
                "distinguishable from the output");
      }
    double worst = 0.0;
    for (int g = 0; g < action.group().order(); ++g) {
      if (g == action.group().identity()) continue;
      worst = std::max(worst,
                       extension_symmetry_defect(*witness_extension,
                                                 system_region, action, g));
    }
    supplied = worst;
  }

  DiagnosticReport scan = charge_coherence_scan(traced, probe, schedule,
                                                &action);
  std::string verdict = joint_defect <= 1e-8 ? "PRESERVED" : "BROKEN";
  return IrreversibilityReport{sym.defect,
                               input_defect,
                               joint_defect,
                               retained,
                               supplied,
                               std::move(scan),
                               std::move(joint),
                               std::move(traced),
                               std::move(verdict)};
}

}  // namespace symscope
