#pragma once

#include <cmath>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "symscope/chain.hpp"
#include "symscope/common.hpp"
#include "symscope/group.hpp"
#include "symscope/operators.hpp"
#include "symscope/phase.hpp"
#include "symscope/states.hpp"

namespace symscope {

/// One unitary gate of a circuit layer.
struct CircuitGate {
  Region sites;
  Matrix matrix;
};

/// Gates of one layer must have pairwise disjoint supports.
using CircuitLayer = std::vector<CircuitGate>;

/// Per-element, per-site unitaries: site_unitaries[g][i] acts on site i.
struct OnSiteRealization {
  std::vector<std::vector<Matrix>> site_unitaries;
};

/// Per-element finite-depth circuits: layers[g] applied bottom (index 0)
/// first, i.e. U_g = L_{k-1} ... L_1 L_0.
struct CircuitRealization {
  std::vector<std::vector<CircuitLayer>> layers;
  int radius = 0;
};

using Realization = std::variant<OnSiteRealization, CircuitRealization>;

namespace detail {

inline bool is_unitary(const Matrix& m, double tol = kUnitarityTol) {
  if (m.rows() != m.cols()) return false;
  return (m.adjoint() * m - Matrix::Identity(m.rows(), m.cols()))
             .cwiseAbs()
             .maxCoeff() <= tol;
}

inline Matrix support_kron(const ChainGeometry& chain, const Region& support,
                           const std::vector<Matrix>& per_site) {
  Matrix acc = Matrix::Identity(1, 1);
  for (int s : support.sites()) acc = tensor_matrix(acc, per_site.at(s));
  (void)chain;
  return acc;
}

/// Unitary of one layer restricted to `window`, keeping only gates meeting
/// `touched` (gates disjoint from the light cone cancel under conjugation).
inline Matrix layer_window_unitary(const ChainGeometry& chain,
                                   const CircuitLayer& layer,
                                   const Region& window,
                                   const Region& touched) {
  std::int64_t d = region_dim(chain, window);
  Matrix u = Matrix::Identity(d, d);
  for (const CircuitGate& gate : layer) {
    if (!gate.sites.intersects(touched)) continue;
    LocalOperator g(chain, gate.sites, gate.matrix);
    u = embed_into(g, chain, window).matrix() * u;
  }
  return u;
}

}  // namespace detail

/// alpha_g(op) = U_g op U_g^dagger for the realized unitary; with
/// `inverse` set, conjugation by U_g^dagger instead. Circuit realizations are
/// applied layer by layer on the growing light cone only.
inline LocalOperator apply_realization(const ChainGeometry& chain,
                                       const Realization& real, int g,
                                       const LocalOperator& op,
                                       bool inverse = false) {
  if (const auto* os = std::get_if<OnSiteRealization>(&real)) {
    const auto& per_site = os->site_unitaries.at(g);
    Matrix u = detail::support_kron(chain, op.support(), per_site);
    if (inverse) u = u.adjoint().eval();
    return LocalOperator(chain, op.support(), u * op.matrix() * u.adjoint());
  }
  const auto& layers = std::get<CircuitRealization>(real).layers.at(g);
  LocalOperator cur = op;
  auto conjugate_layer = [&](const CircuitLayer& layer, bool adj) {
    Region window = cur.support();
    bool touched = false;
    for (const CircuitGate& gate : layer)
      if (gate.sites.intersects(cur.support())) {
        window = window.united(gate.sites);
        touched = true;
      }
    if (!touched) return;
    Matrix u = detail::layer_window_unitary(chain, layer, window,
                                            cur.support());
    if (adj) u = u.adjoint().eval();
    Matrix m = embed_into(cur, chain, window).matrix();
    cur = LocalOperator(chain, window, u * m * u.adjoint());
  };
  if (!inverse) {
    for (const CircuitLayer& layer : layers) conjugate_layer(layer, false);
  } else {
    for (auto it = layers.rbegin(); it != layers.rend(); ++it)
      conjugate_layer(*it, true);
  }
  return cur;
}

/// Dense full-chain unitary of element g.
inline Matrix realization_unitary(const ChainGeometry& chain,
                                  const Realization& real, int g) {
  if (const auto* os = std::get_if<OnSiteRealization>(&real)) {
    Matrix acc = Matrix::Identity(1, 1);
    for (const Matrix& u : os->site_unitaries.at(g)) acc = tensor_matrix(acc, u);
    return acc;
  }
  const auto& layers = std::get<CircuitRealization>(real).layers.at(g);
  Matrix acc = Matrix::Identity(chain.total_dim(), chain.total_dim());
  for (const CircuitLayer& layer : layers)
    for (const CircuitGate& gate : layer)
      acc = apply_local_left(LocalOperator(chain, gate.sites, gate.matrix),
                             chain, acc);
  return acc;
}

/// M <- U_g M (or U_g^dagger M) without forming the dense unitary.
inline Matrix realization_left_apply(const ChainGeometry& chain,
                                     const Realization& real, int g,
                                     Matrix m, bool inverse = false) {
  if (const auto* os = std::get_if<OnSiteRealization>(&real)) {
    const auto& per_site = os->site_unitaries.at(g);
    for (int s = 0; s < chain.num_sites(); ++s) {
      Matrix u = inverse ? per_site.at(s).adjoint() : per_site.at(s);
      m = apply_local_left(LocalOperator(chain, Region::single(s), u), chain,
                           m);
    }
    return m;
  }
  const auto& layers = std::get<CircuitRealization>(real).layers.at(g);
  auto apply_layer = [&](const CircuitLayer& layer) {
    for (const CircuitGate& gate : layer) {
      Matrix u = inverse ? gate.matrix.adjoint() : gate.matrix;
      m = apply_local_left(LocalOperator(chain, gate.sites, u), chain, m);
    }
  };
  if (!inverse) {
    for (const CircuitLayer& layer : layers) apply_layer(layer);
  } else {
    for (auto it = layers.rbegin(); it != layers.rend(); ++it)
      apply_layer(*it);
  }
  return m;
}

inline Vector realization_apply_vector(const ChainGeometry& chain,
                                       const Realization& real, int g,
                                       Vector v, bool inverse = false) {
  if (const auto* os = std::get_if<OnSiteRealization>(&real)) {
    const auto& per_site = os->site_unitaries.at(g);
    for (int s = 0; s < chain.num_sites(); ++s) {
      Matrix u = inverse ? per_site.at(s).adjoint() : per_site.at(s);
      v = apply_local(LocalOperator(chain, Region::single(s), u), chain, v);
    }
    return v;
  }
  const auto& layers = std::get<CircuitRealization>(real).layers.at(g);
  auto apply_layer = [&](const CircuitLayer& layer) {
    for (const CircuitGate& gate : layer) {
      Matrix u = inverse ? gate.matrix.adjoint() : gate.matrix;
      v = apply_local(LocalOperator(chain, gate.sites, u), chain, v);
    }
  };
  if (!inverse) {
    for (const CircuitLayer& layer : layers) apply_layer(layer);
  } else {
    for (auto it = layers.rbegin(); it != layers.rend(); ++it)
      apply_layer(*it);
  }
  return v;
}

/// U_g rho U_g^dagger on a full-chain matrix.
inline Matrix realization_conjugate_state(const ChainGeometry& chain,
                                          const Realization& real, int g,
                                          const Matrix& rho) {
  Matrix m = realization_left_apply(chain, real, g, rho, false);
  // Right-multiply by U_g^dagger = left-apply U_g to the adjoint, twice.
  m = realization_left_apply(chain, real, g, m.adjoint(), false);
  return m.adjoint();
}

/// Representation of a finite group on the chain, either strictly on-site or
/// as per-element finite-depth local circuits. Construction validates that
/// every piece is unitary, that the identity element realizes the identity
/// map, and that conjugation is a homomorphism on every single-site operator
/// basis (which generates the full operator algebra).
class SymmetryAction {
 public:
  static SymmetryAction on_site(GroupTable group, ChainGeometry chain,
                                std::vector<std::vector<Matrix>> site_unitaries) {
    return SymmetryAction(std::move(group), std::move(chain),
                          OnSiteRealization{std::move(site_unitaries)});
  }

  /// Same single-site unitary on every site.
  static SymmetryAction on_site_uniform(GroupTable group, ChainGeometry chain,
                                        std::vector<Matrix> per_element) {
    std::vector<std::vector<Matrix>> site_unitaries;
    for (const Matrix& u : per_element)
      site_unitaries.emplace_back(chain.num_sites(), u);
    return on_site(std::move(group), std::move(chain),
                   std::move(site_unitaries));
  }

  static SymmetryAction circuit(GroupTable group, ChainGeometry chain,
                                std::vector<std::vector<CircuitLayer>> layers,
                                int declared_radius = 0) {
    CircuitRealization real{std::move(layers), 0};
    int auto_radius = 0;
    for (const auto& element_layers : real.layers) {
      int r = 0;
      for (const CircuitLayer& layer : element_layers) {
        int ext = 0;
        for (const CircuitGate& gate : layer) {
          const auto& s = gate.sites.sites();
          if (!s.empty()) ext = std::max(ext, s.back() - s.front());
        }
        r += ext;
      }
      auto_radius = std::max(auto_radius, r);
    }
    real.radius = std::max(auto_radius, declared_radius);
    return SymmetryAction(std::move(group), std::move(chain), std::move(real));
  }

  const GroupTable& group() const { return group_; }
  const ChainGeometry& chain() const { return chain_; }
  const Realization& realization() const { return real_; }
  bool is_on_site() const {
    return std::holds_alternative<OnSiteRealization>(real_);
  }
  int radius() const {
    if (const auto* c = std::get_if<CircuitRealization>(&real_))
      return c->radius;
    return 0;
  }

 private:
  SymmetryAction(GroupTable group, ChainGeometry chain, Realization real)
      : group_(std::move(group)), chain_(std::move(chain)),
        real_(std::move(real)) {
    validate();
  }

  void validate() const {
    int n = group_.order();
    if (const auto* os = std::get_if<OnSiteRealization>(&real_)) {
      require(static_cast<int>(os->site_unitaries.size()) == n,
              "SymmetryAction: one unitary list per group element required");
      for (const auto& per_site : os->site_unitaries) {
        require(static_cast<int>(per_site.size()) == chain_.num_sites(),
                "SymmetryAction: one unitary per site required");
        for (int s = 0; s < chain_.num_sites(); ++s) {
          require(per_site[s].rows() == chain_.local_dim(s) &&
                      detail::is_unitary(per_site[s]),
                  "SymmetryAction: site unitary invalid");
        }
      }
    } else {
      const auto& cr = std::get<CircuitRealization>(real_);
      require(static_cast<int>(cr.layers.size()) == n,
              "SymmetryAction: one circuit per group element required");
      for (const auto& element_layers : cr.layers)
        for (const CircuitLayer& layer : element_layers) {
          Region used;
          for (const CircuitGate& gate : layer) {
            check_region_in_chain(chain_, gate.sites, "SymmetryAction gate");
            require(!used.intersects(gate.sites),
                    "SymmetryAction: overlapping gates within a layer");
            used = used.united(gate.sites);
            require(gate.matrix.rows() == detail::region_dim(chain_, gate.sites) &&
                        detail::is_unitary(gate.matrix),
                    "SymmetryAction: gate not unitary");
          }
        }
    }
    // Identity element must be the identity map on operators.
    int e = group_.identity();
    for (int s = 0; s < chain_.num_sites(); ++s) {
      int d = chain_.local_dim(s);
      for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
          Matrix unit = Matrix::Zero(d, d);
          unit(a, b) = 1;
          LocalOperator op(chain_, Region::single(s), unit);
          LocalOperator out = apply_realization(chain_, real_, e, op);
          LocalOperator ref = embed_into(op, chain_, out.support());
          require((out.matrix() - ref.matrix()).cwiseAbs().maxCoeff() <=
                      kHomomorphismTol,
                  "SymmetryAction: identity element is not the identity map");
        }
    }
    // Homomorphism on all single-site matrix units.
    for (int g = 0; g < n; ++g)
      for (int h = 0; h < n; ++h) {
        int gh = group_.mult(g, h);
        for (int s = 0; s < chain_.num_sites(); ++s) {
          int d = chain_.local_dim(s);
          for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) {
              Matrix unit = Matrix::Zero(d, d);
              unit(a, b) = 1;
              LocalOperator op(chain_, Region::single(s), unit);
              LocalOperator lhs = apply_realization(
                  chain_, real_, g, apply_realization(chain_, real_, h, op));
              LocalOperator rhs = apply_realization(chain_, real_, gh, op);
              Region w = lhs.support().united(rhs.support());
              Matrix diff = embed_into(lhs, chain_, w).matrix() -
                            embed_into(rhs, chain_, w).matrix();
              require(diff.cwiseAbs().maxCoeff() <= kHomomorphismTol,
                      "SymmetryAction: conjugations do not compose as the "
                      "group multiplication");
            }
        }
      }
  }

  GroupTable group_;
  ChainGeometry chain_;
  Realization real_;
};

inline LocalOperator apply_action(const SymmetryAction& action, int g,
                                  const LocalOperator& op) {
  return apply_realization(action.chain(), action.realization(), g, op);
}

inline Matrix action_unitary(const SymmetryAction& action, int g) {
  return realization_unitary(action.chain(), action.realization(), g);
}

/// (1/|G|) sum_g alpha_g(op), on the union of the individual supports.
inline LocalOperator group_average(const SymmetryAction& action,
                                   const LocalOperator& op) {
  int n = action.group().order();
  std::vector<LocalOperator> terms;
  Region window = op.support();
  for (int g = 0; g < n; ++g) {
    terms.push_back(apply_action(action, g, op));
    window = window.united(terms.back().support());
  }
  std::int64_t d = detail::region_dim(action.chain(), window);
  Matrix acc = Matrix::Zero(d, d);
  for (const LocalOperator& t : terms)
    acc += embed_into(t, action.chain(), window).matrix();
  return LocalOperator(action.chain(), window, acc / double(n));
}

struct ChargeCheck {
  bool charged = false;
  /// Frobenius norm of the symmetrized (trivial) component.
  double trivial_component_norm = 0.0;
};

/// An operator is charged when its group average vanishes.
inline ChargeCheck is_charged(const SymmetryAction& action,
                              const LocalOperator& op) {
  double scale = op.matrix().norm();
  require(scale > 0, "is_charged: zero operator");
  LocalOperator avg = group_average(action, op);
  ChargeCheck out;
  out.trivial_component_norm = avg.matrix().norm();
  out.charged = out.trivial_component_norm <= kChargeTol * scale;
  return out;
}

struct ChargeComponent {
  /// Exact character phases chi(g); empty for the nonabelian remainder term.
  std::vector<Phase> character;
  LocalOperator component;
};

struct ChargeDecomposition {
  std::vector<ChargeComponent> components;
  double residual_norm = 0.0;
};

/// Isotypic decomposition O = sum_chi O_chi with
/// O_chi = (1/|G|) sum_g conj(chi(g)) alpha_g(O) for abelian groups. For a
/// nonabelian group only the trivial/remainder split is produced.
inline ChargeDecomposition charge_decompose(const SymmetryAction& action,
                                            const LocalOperator& op) {
  const GroupTable& G = action.group();
  int n = G.order();
  std::vector<LocalOperator> orbit;
  Region window = op.support();
  for (int g = 0; g < n; ++g) {
    orbit.push_back(apply_action(action, g, op));
    window = window.united(orbit.back().support());
  }
  std::int64_t d = detail::region_dim(action.chain(), window);
  std::vector<Matrix> embedded;
  for (const LocalOperator& t : orbit)
    embedded.push_back(embed_into(t, action.chain(), window).matrix());
  Matrix original = embed_into(op, action.chain(), window).matrix();

  ChargeDecomposition out;
  Matrix total = Matrix::Zero(d, d);
  if (G.is_abelian()) {
    for (const auto& chi : G.characters()) {
      Matrix acc = Matrix::Zero(d, d);
      for (int g = 0; g < n; ++g) acc += std::conj(chi[g].unit()) * embedded[g];
      acc /= double(n);
      total += acc;
      out.components.push_back(
          {chi, LocalOperator(action.chain(), window, std::move(acc))});
    }
  } else {
    Matrix trivial = Matrix::Zero(d, d);
    for (int g = 0; g < n; ++g) trivial += embedded[g];
    trivial /= double(n);
    total = original;
    std::vector<Phase> trivial_chi(n);
    out.components.push_back(
        {trivial_chi, LocalOperator(action.chain(), window, trivial)});
    out.components.push_back(
        {{}, LocalOperator(action.chain(), window, original - trivial)});
  }
  out.residual_norm = (original - total).norm();
  return out;
}

/// T(rho, U_g rho U_g^dagger): zero iff rho commutes with the realization.
inline double weak_symmetry_defect(const DensityOperator& rho,
                                   const SymmetryAction& action, int g) {
  require(rho.geometry() == action.chain(),
          "weak_symmetry_defect: chain mismatch");
  Matrix rotated = realization_conjugate_state(action.chain(),
                                               action.realization(), g,
                                               rho.matrix());
  return trace_distance(rho.matrix(), rotated);
}

/// min over phases of ||U_g rho - e^{i theta} rho||_F / ||rho||_F. Vanishes
/// exactly when rho is an eigenoperator of left multiplication by U_g, the
/// finite-size criterion for strong symmetry.
inline double strong_symmetry_defect_finite(const DensityOperator& rho,
                                            const SymmetryAction& action,
                                            int g) {
  require(rho.geometry() == action.chain(),
          "strong_symmetry_defect_finite: chain mismatch");
  double n2 = rho.matrix().squaredNorm();
  require(n2 > 0, "strong_symmetry_defect_finite: zero state");
  Matrix moved = realization_left_apply(action.chain(), action.realization(),
                                        g, rho.matrix());
  Complex overlap = (rho.matrix().conjugate().cwiseProduct(moved)).sum();
  // min_theta ||U rho - e^{i theta} rho|| is attained at theta = arg(overlap);
  // forming the residual directly avoids the cancellation in 2(n2 - |s|),
  // which would square-root-amplify roundoff for states with defect 0.
  Complex phase = overlap == Complex(0.0, 0.0)
                      ? Complex(1.0, 0.0)
                      : overlap / std::abs(overlap);
  moved -= phase * rho.matrix();
  return moved.norm() / std::sqrt(n2);
}

/// Worst case over the nonidentity elements.
inline double strong_symmetry_defect_finite(const DensityOperator& rho,
                                            const SymmetryAction& action) {
  double worst = 0.0;
  for (int g = 0; g < action.group().order(); ++g) {
    if (g == action.group().identity()) continue;
    worst = std::max(worst, strong_symmetry_defect_finite(rho, action, g));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Stock actions.

/// Z2 generated by prod_i X_i.
inline SymmetryAction x_string_action(const ChainGeometry& chain) {
  return SymmetryAction::on_site_uniform(GroupTable::cyclic(2), chain,
                                         {pauli_id(), pauli_x()});
}

/// Z2 x Z2 generated by prod_i X_i and prod_i Z_i (element a + 2b realizes
/// X^a Z^b on every site).
inline SymmetryAction xz_string_action(const ChainGeometry& chain) {
  Matrix xz = pauli_x() * pauli_z();
  return SymmetryAction::on_site_uniform(
      GroupTable::klein_four(), chain,
      {pauli_id(), pauli_x(), pauli_z(), xz});
}

/// The same action viewed on a longer chain whose first sites are the
/// original system; the added sites are acted on trivially.
inline SymmetryAction extend_action_to_joint(const SymmetryAction& action,
                                             const ChainGeometry& joint) {
  const ChainGeometry& sys = action.chain();
  require(joint.num_sites() >= sys.num_sites(),
          "extend_action_to_joint: joint chain shorter than system");
  for (int s = 0; s < sys.num_sites(); ++s)
    require(joint.local_dim(s) == sys.local_dim(s),
            "extend_action_to_joint: system sites must prefix the joint chain");
  int n = action.group().order();
  if (const auto* os = std::get_if<OnSiteRealization>(&action.realization())) {
    std::vector<std::vector<Matrix>> site_unitaries(os->site_unitaries);
    for (auto& per_site : site_unitaries)
      for (int s = sys.num_sites(); s < joint.num_sites(); ++s)
        per_site.push_back(Matrix::Identity(joint.local_dim(s),
                                            joint.local_dim(s)));
    return SymmetryAction::on_site(action.group(), joint,
                                   std::move(site_unitaries));
  }
  const auto& cr = std::get<CircuitRealization>(action.realization());
  (void)n;
  return SymmetryAction::circuit(action.group(), joint, cr.layers, cr.radius);
}

/// Re-address a realization onto `region` of a larger chain: action site k
/// becomes target site region.sites()[k], all other target sites are acted on
/// trivially. The region's ascending order keeps the little-endian gate bases
/// unchanged.
inline Realization remap_realization(const Realization& real,
                                     const ChainGeometry& source,
                                     const ChainGeometry& target,
                                     const Region& region) {
  require(region.size() == source.num_sites(),
          "remap_realization: region size must match the source chain");
  check_region_in_chain(target, region, "remap_realization");
  for (int k = 0; k < region.size(); ++k)
    require(target.local_dim(region.sites()[k]) == source.local_dim(k),
            "remap_realization: local dimension mismatch");
  if (const auto* os = std::get_if<OnSiteRealization>(&real)) {
    OnSiteRealization out;
    for (const auto& per_site : os->site_unitaries) {
      std::vector<Matrix> mapped;
      for (int s = 0; s < target.num_sites(); ++s)
        mapped.push_back(Matrix::Identity(target.local_dim(s),
                                          target.local_dim(s)));
      for (int k = 0; k < region.size(); ++k)
        mapped[region.sites()[k]] = per_site.at(k);
      out.site_unitaries.push_back(std::move(mapped));
    }
    return out;
  }
  const auto& cr = std::get<CircuitRealization>(real);
  CircuitRealization out;
  out.radius = cr.radius;
  for (const auto& element_layers : cr.layers) {
    std::vector<CircuitLayer> mapped_layers;
    for (const CircuitLayer& layer : element_layers) {
      CircuitLayer mapped;
      for (const CircuitGate& gate : layer) {
        std::vector<int> sites;
        for (int s : gate.sites.sites()) sites.push_back(region.sites().at(s));
        mapped.push_back({Region(std::move(sites)), gate.matrix});
      }
      mapped_layers.push_back(std::move(mapped));
    }
    out.layers.push_back(std::move(mapped_layers));
  }
  return out;
}

/// On-site action conjugated by a fixed local circuit C: each element is
/// realized as C u_g C^dagger, yielding an equivalent but non-on-site
/// realization with the conjugator's light cone.
inline SymmetryAction conjugated_on_site_action(
    const GroupTable& group, const ChainGeometry& chain,
    const std::vector<Matrix>& per_element,
    const std::vector<CircuitLayer>& conjugator) {
  std::vector<std::vector<CircuitLayer>> layers;
  for (const Matrix& u : per_element) {
    std::vector<CircuitLayer> element_layers(conjugator.rbegin(),
                                             conjugator.rend());
    for (auto& layer : element_layers)
      for (auto& gate : layer) gate.matrix = gate.matrix.adjoint().eval();
    CircuitLayer middle;
    for (int s = 0; s < chain.num_sites(); ++s)
      middle.push_back({Region::single(s), u});
    element_layers.push_back(std::move(middle));
    element_layers.insert(element_layers.end(), conjugator.begin(),
                          conjugator.end());
    layers.push_back(std::move(element_layers));
  }
  return SymmetryAction::circuit(group, chain, std::move(layers));
}

}  // namespace symscope
