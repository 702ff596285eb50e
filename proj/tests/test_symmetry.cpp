#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "symscope/group.hpp"
#include "symscope/states.hpp"
#include "symscope/symmetry.hpp"
#include "test_util.hpp"

namespace symscope {
namespace {

TEST(GroupTable, Cyclic4Basics) {
  GroupTable g = GroupTable::cyclic(4);
  EXPECT_EQ(g.order(), 4);
  EXPECT_EQ(g.identity(), 0);
  EXPECT_EQ(g.mult(1, 3), 0);
  EXPECT_EQ(g.mult(2, 3), 1);
  EXPECT_EQ(g.inverse(1), 3);
  EXPECT_EQ(g.inverse(2), 2);
  EXPECT_EQ(g.element_order(1), 4);
  EXPECT_EQ(g.element_order(2), 2);
  EXPECT_EQ(g.exponent(), 4);
  EXPECT_TRUE(g.is_abelian());
}

TEST(GroupTable, KleinFourStructure) {
  GroupTable g = GroupTable::klein_four();
  EXPECT_EQ(g.order(), 4);
  EXPECT_EQ(g.exponent(), 2);
  for (int a = 1; a < 4; ++a) EXPECT_EQ(g.element_order(a), 2);
  EXPECT_EQ(g.mult(1, 2), 3);
  EXPECT_EQ(g.mult(3, 3), 0);
  EXPECT_EQ(g.mult(1, 3), 2);
}

TEST(GroupTable, DirectProductOfZ2Z3IsZ6) {
  GroupTable g = GroupTable::direct_product(GroupTable::cyclic(2),
                                            GroupTable::cyclic(3));
  EXPECT_EQ(g.order(), 6);
  EXPECT_TRUE(g.is_abelian());
  EXPECT_EQ(g.exponent(), 6);
  std::vector<int> orders;
  for (int e = 0; e < 6; ++e) orders.push_back(g.element_order(e));
  std::sort(orders.begin(), orders.end());
  EXPECT_EQ(orders, (std::vector<int>{1, 2, 3, 3, 6, 6}));
}

TEST(GroupTable, RejectsNonLatinSquare) {
  EXPECT_THROW(GroupTable({{0, 0}, {1, 1}}), std::invalid_argument);
}

TEST(GroupTable, RejectsMissingIdentity) {
  EXPECT_THROW(GroupTable({{0, 1, 2}, {2, 0, 1}, {1, 2, 0}}),
               std::invalid_argument);
}

TEST(GroupTable, RejectsNonAssociativeLoop) {
  EXPECT_THROW(GroupTable({{0, 1, 2, 3, 4},
                           {1, 0, 3, 4, 2},
                           {2, 3, 4, 0, 1},
                           {3, 4, 1, 2, 0},
                           {4, 2, 0, 1, 3}}),
               std::invalid_argument);
}

TEST(GroupTable, CharactersOfCyclic4) {
  auto chars = GroupTable::cyclic(4).characters();
  ASSERT_EQ(chars.size(), 4u);
  auto phases = [](int k) {
    std::vector<Phase> v;
    for (int j = 0; j < 4; ++j) v.push_back(Phase::of(k * j, 4));
    return v;
  };
  EXPECT_EQ(chars[0], phases(0));
  EXPECT_EQ(chars[1], phases(1));
  EXPECT_EQ(chars[2], phases(2));
  EXPECT_EQ(chars[3], phases(3));
}

TEST(GroupTable, CharactersOfKleinFour) {
  auto chars = GroupTable::klein_four().characters();
  ASSERT_EQ(chars.size(), 4u);
  auto chi = [](int c, int d) {
    std::vector<Phase> v;
    for (int e = 0; e < 4; ++e) {
      int a = e % 2, b = e / 2;
      v.push_back(Phase::of(c * a + d * b, 2));
    }
    return v;
  };
  EXPECT_EQ(chars[0], chi(0, 0));
  EXPECT_EQ(chars[1], chi(0, 1));
  EXPECT_EQ(chars[2], chi(1, 0));
  EXPECT_EQ(chars[3], chi(1, 1));
}

TEST(GroupTable, CharacterOrthogonality) {
  for (const GroupTable& g :
       {GroupTable::cyclic(6), GroupTable::klein_four()}) {
    auto chars = g.characters();
    int n = g.order();
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        Complex acc(0, 0);
        for (int e = 0; e < n; ++e)
          acc += chars[i][e].unit() * std::conj(chars[j][e].unit());
        EXPECT_NEAR(std::abs(acc - Complex(i == j ? n : 0, 0)), 0.0, 1e-12);
      }
  }
}

// ---------------------------------------------------------------------------

ChainGeometry qubits(int n) { return ChainGeometry::uniform(n); }

TEST(SymmetryAction, XStringConjugatesPaulis) {
  ChainGeometry chain = qubits(3);
  SymmetryAction act = x_string_action(chain);
  LocalOperator z = pauli_at(chain, 1, 'z');
  LocalOperator out = apply_action(act, 1, z);
  EXPECT_EQ(out.support(), z.support());
  EXPECT_LE((out.matrix() + z.matrix()).cwiseAbs().maxCoeff(), 1e-14);
  LocalOperator x = pauli_at(chain, 1, 'x');
  EXPECT_LE((apply_action(act, 1, x).matrix() - x.matrix())
                .cwiseAbs()
                .maxCoeff(),
            1e-14);
  LocalOperator y = pauli_at(chain, 1, 'y');
  EXPECT_LE((apply_action(act, 1, y).matrix() + y.matrix())
                .cwiseAbs()
                .maxCoeff(),
            1e-14);
}

TEST(SymmetryAction, RejectsNonUnitaryRealization) {
  Matrix bad(2, 2);
  bad << 1, 1, 0, 1;
  EXPECT_THROW(SymmetryAction::on_site_uniform(GroupTable::cyclic(2),
                                               qubits(2), {pauli_id(), bad}),
               std::invalid_argument);
}

TEST(SymmetryAction, RejectsNonHomomorphicRealization) {
  Matrix s(2, 2);
  s << 1, 0, 0, Complex(0, 1);
  EXPECT_THROW(SymmetryAction::on_site_uniform(GroupTable::cyclic(2),
                                               qubits(2), {pauli_id(), s}),
               std::invalid_argument);
}

TEST(SymmetryAction, RejectsNonIdentityIdentityElement) {
  EXPECT_THROW(SymmetryAction::on_site_uniform(GroupTable::cyclic(2),
                                               qubits(2),
                                               {pauli_x(), pauli_id()}),
               std::invalid_argument);
}

Matrix cz_gate() {
  Matrix m = Matrix::Identity(4, 4);
  m(3, 3) = -1;
  return m;
}

std::vector<CircuitLayer> brickwork_cz(int n) {
  CircuitLayer even, odd;
  for (int i = 0; i + 1 < n; i += 2)
    even.push_back({Region::range(i, i + 2), cz_gate()});
  for (int i = 1; i + 1 < n; i += 2)
    odd.push_back({Region::range(i, i + 2), cz_gate()});
  return {even, odd};
}

TEST(SymmetryAction, CircuitRealizationOfXString) {
  ChainGeometry chain = qubits(4);
  CircuitLayer flips;
  for (int i = 0; i < 4; ++i) flips.push_back({Region::single(i), pauli_x()});
  SymmetryAction circuit = SymmetryAction::circuit(
      GroupTable::cyclic(2), chain, {{}, {flips}});
  SymmetryAction onsite = x_string_action(chain);
  LocalOperator op = pauli_at(chain, 2, 'z');
  LocalOperator a = apply_action(circuit, 1, op);
  LocalOperator b = apply_action(onsite, 1, op);
  Region w = a.support().united(b.support());
  EXPECT_LE(testutil::max_abs_diff(embed_into(a, chain, w).matrix(),
                                   embed_into(b, chain, w).matrix()),
            1e-12);
  EXPECT_EQ(circuit.radius(), 0);
}

TEST(SymmetryAction, ConjugatedActionMatchesDenseOracle) {
  ChainGeometry chain = qubits(6);
  SymmetryAction act = conjugated_on_site_action(
      GroupTable::cyclic(2), chain, {pauli_id(), pauli_x()},
      brickwork_cz(6));
  const auto& layers = std::get<CircuitRealization>(act.realization()).layers;
  std::mt19937_64 rng(11);
  for (int g = 0; g < 2; ++g) {
    Matrix u = Matrix::Identity(chain.total_dim(), chain.total_dim());
    for (const CircuitLayer& layer : layers[g])
      for (const CircuitGate& gate : layer)
        u = embed(LocalOperator(chain, gate.sites, gate.matrix), chain) * u;
    EXPECT_LE(testutil::max_abs_diff(action_unitary(act, g), u), 1e-12);
    for (int trial = 0; trial < 10; ++trial) {
      std::uniform_int_distribution<int> site(0, 4);
      int s = site(rng);
      Region supp = trial % 2 ? Region::single(s) : Region::range(s, s + 2);
      Matrix m = testutil::random_complex(rng, 1 << supp.size(),
                                          1 << supp.size());
      LocalOperator op(chain, supp, m);
      LocalOperator moved = apply_action(act, g, op);
      Matrix expect = u * embed(op, chain) * u.adjoint();
      EXPECT_LE(testutil::max_abs_diff(embed(moved, chain), expect), 1e-10);
    }
  }
}

TEST(SymmetryAction, CzCircuitActionGrowsXIntoZXZ) {
  // The CZ brickwork squares to the identity, so it realizes a Z2 action.
  ChainGeometry chain = qubits(6);
  SymmetryAction act = SymmetryAction::circuit(GroupTable::cyclic(2), chain,
                                               {{}, brickwork_cz(6)});
  EXPECT_GE(act.radius(), 1);
  LocalOperator x2 = pauli_at(chain, 2, 'x');
  LocalOperator out = apply_action(act, 1, x2);
  LocalOperator want = local_product(
      pauli_at(chain, 1, 'z'),
      local_product(x2, pauli_at(chain, 3, 'z'), chain), chain);
  Region w = out.support().united(want.support());
  EXPECT_LE(testutil::max_abs_diff(embed_into(out, chain, w).matrix(),
                                   embed_into(want, chain, w).matrix()),
            1e-12);
}

TEST(SymmetryAction, ConjugatedXStringFixesXAndStillChargesZ) {
  ChainGeometry chain = qubits(6);
  SymmetryAction act = conjugated_on_site_action(
      GroupTable::cyclic(2), chain, {pauli_id(), pauli_x()},
      brickwork_cz(6));
  EXPECT_GE(act.radius(), 1);
  LocalOperator x2 = pauli_at(chain, 2, 'x');
  LocalOperator out = apply_action(act, 1, x2);
  LocalOperator want = embed_into(x2, chain, out.support());
  EXPECT_LE(testutil::max_abs_diff(out.matrix(), want.matrix()), 1e-12);
  LocalOperator z1 = pauli_at(chain, 1, 'z');
  LocalOperator zout = apply_action(act, 1, z1);
  LocalOperator zwant = embed_into(z1, chain, zout.support());
  EXPECT_LE(testutil::max_abs_diff(zout.matrix(), -zwant.matrix()), 1e-12);
  EXPECT_TRUE(is_charged(act, z1).charged);
}

TEST(SymmetryAction, GroupLawOnRandomOperators) {
  ChainGeometry chain = qubits(5);
  SymmetryAction onsite = xz_string_action(chain);
  SymmetryAction circuit = conjugated_on_site_action(
      GroupTable::cyclic(2), chain, {pauli_id(), pauli_x()},
      brickwork_cz(5));
  std::mt19937_64 rng(7);
  auto check = [&](const SymmetryAction& act) {
    int n = act.group().order();
    std::uniform_int_distribution<int> elem(0, n - 1);
    std::uniform_int_distribution<int> site(0, 3);
    for (int trial = 0; trial < 100; ++trial) {
      int g = elem(rng), h = elem(rng);
      int s = site(rng);
      Region supp = trial % 2 ? Region::single(s) : Region::range(s, s + 2);
      LocalOperator op(chain, supp,
                       testutil::random_complex(rng, 1 << supp.size(),
                                                1 << supp.size()));
      LocalOperator lhs = apply_action(act, g, apply_action(act, h, op));
      LocalOperator rhs = apply_action(act, act.group().mult(g, h), op);
      Region w = lhs.support().united(rhs.support());
      EXPECT_LE(
          testutil::max_abs_diff(embed_into(lhs, chain, w).matrix(),
                                 embed_into(rhs, chain, w).matrix()),
          1e-9);
    }
  };
  check(onsite);
  check(circuit);
}

TEST(SymmetryAction, GroupAverageProjects) {
  ChainGeometry chain = qubits(3);
  SymmetryAction act = x_string_action(chain);
  LocalOperator z = pauli_at(chain, 1, 'z');
  EXPECT_LE(group_average(act, z).matrix().cwiseAbs().maxCoeff(), 1e-14);
  LocalOperator x = pauli_at(chain, 1, 'x');
  EXPECT_LE((group_average(act, x).matrix() - x.matrix())
                .cwiseAbs()
                .maxCoeff(),
            1e-14);
  std::mt19937_64 rng(3);
  LocalOperator op(chain, Region::range(0, 2),
                   testutil::random_complex(rng, 4, 4));
  LocalOperator once = group_average(act, op);
  LocalOperator twice = group_average(act, once);
  EXPECT_LE(testutil::max_abs_diff(once.matrix(), twice.matrix()), 1e-12);
}

TEST(SymmetryAction, ChargeDetection) {
  ChainGeometry chain = qubits(2);
  SymmetryAction x_act = x_string_action(chain);
  SymmetryAction xz_act = xz_string_action(chain);
  EXPECT_TRUE(is_charged(x_act, pauli_at(chain, 0, 'z')).charged);
  EXPECT_FALSE(is_charged(x_act, pauli_at(chain, 0, 'x')).charged);
  Matrix raising(2, 2);
  raising << 0, 1, 0, 0;
  LocalOperator sp(chain, Region::single(0), raising);
  ChargeCheck under_x = is_charged(x_act, sp);
  EXPECT_FALSE(under_x.charged);
  EXPECT_NEAR(under_x.trivial_component_norm, std::sqrt(2.0) / 2, 1e-12);
  EXPECT_TRUE(is_charged(xz_act, sp).charged);
  EXPECT_THROW(
      is_charged(x_act, LocalOperator(chain, Region::single(0),
                                      Matrix::Zero(2, 2))),
      std::invalid_argument);
}

TEST(SymmetryAction, ChargeDecomposeReconstructsAndTransforms) {
  ChainGeometry chain = qubits(4);
  SymmetryAction act = xz_string_action(chain);
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 25; ++trial) {
    LocalOperator op(chain, Region::range(1, 3),
                     testutil::random_complex(rng, 4, 4));
    ChargeDecomposition dec = charge_decompose(act, op);
    ASSERT_EQ(dec.components.size(), 4u);
    EXPECT_LE(dec.residual_norm, 1e-12);
    Region w = dec.components[0].component.support();
    Matrix sum = Matrix::Zero(1 << w.size(), 1 << w.size());
    for (const auto& c : dec.components) sum += c.component.matrix();
    EXPECT_LE(testutil::max_abs_diff(
                  sum, embed_into(op, chain, w).matrix()),
              1e-10);
    for (const auto& c : dec.components)
      for (int g = 0; g < 4; ++g) {
        LocalOperator moved = apply_action(act, g, c.component);
        Matrix want = c.character[g].unit() * c.component.matrix();
        EXPECT_LE(testutil::max_abs_diff(moved.matrix(), want), 1e-9);
      }
  }
}

TEST(SymmetryAction, ChargeDecomposeSortsPaulisIntoCharacters) {
  ChainGeometry chain = qubits(1);
  SymmetryAction act = xz_string_action(chain);
  auto character_of = [&](const LocalOperator& op) {
    ChargeDecomposition dec = charge_decompose(act, op);
    std::vector<Phase> best;
    double best_norm = -1;
    for (const auto& c : dec.components) {
      double n = c.component.matrix().norm();
      if (n > best_norm) {
        best_norm = n;
        best = c.character;
      }
    }
    return best;
  };
  // chi(g) records the sign picked up under conjugation by X^a Z^b.
  std::vector<Phase> z_chi = {Phase(), Phase::of(1, 2), Phase(),
                              Phase::of(1, 2)};
  std::vector<Phase> x_chi = {Phase(), Phase(), Phase::of(1, 2),
                              Phase::of(1, 2)};
  EXPECT_EQ(character_of(pauli_at(chain, 0, 'z')), z_chi);
  EXPECT_EQ(character_of(pauli_at(chain, 0, 'x')), x_chi);
}

TEST(SymmetryDefects, WeakDefectExamples) {
  ChainGeometry chain = qubits(3);
  SymmetryAction act = x_string_action(chain);
  EXPECT_NEAR(weak_symmetry_defect(maximally_mixed(chain), act, 1), 0, 1e-12);
  EXPECT_NEAR(weak_symmetry_defect(string_projected(3), act, 1), 0, 1e-12);
  Vector zero = Vector::Zero(8);
  zero(0) = 1;
  DensityOperator all_zero = PureStateVector(chain, zero).projector();
  EXPECT_NEAR(weak_symmetry_defect(all_zero, act, 1), 1.0, 1e-12);
  DensityOperator plus = plus_product(3).projector();
  EXPECT_NEAR(weak_symmetry_defect(plus, act, 1), 0, 1e-12);
  ChainGeometry chain4 = qubits(4);
  SymmetryAction act4 = x_string_action(chain4);
  EXPECT_NEAR(weak_symmetry_defect(paired_pm(4, 0.3), act4, 1), 0, 1e-12);
  EXPECT_NEAR(weak_symmetry_defect(ghz_mixture(4), act4, 1), 0, 1e-12);
}

TEST(SymmetryDefects, StrongDefectSeparatesTheTwoLocallyIdenticalStates) {
  ChainGeometry chain = qubits(3);
  SymmetryAction act = x_string_action(chain);
  double mixed = strong_symmetry_defect_finite(maximally_mixed(chain), act, 1);
  EXPECT_NEAR(mixed, std::sqrt(2.0), 1e-12);
  EXPECT_GE(mixed, 0.5);
  EXPECT_NEAR(strong_symmetry_defect_finite(string_projected(3), act, 1), 0,
              1e-12);
}

TEST(SymmetryDefects, StrongDefectExamples) {
  ChainGeometry chain = qubits(3);
  SymmetryAction act = x_string_action(chain);
  Vector zero = Vector::Zero(8);
  zero(0) = 1;
  DensityOperator all_zero = PureStateVector(chain, zero).projector();
  EXPECT_NEAR(strong_symmetry_defect_finite(all_zero, act, 1), std::sqrt(2.0),
              1e-12);
  DensityOperator plus = plus_product(3).projector();
  EXPECT_NEAR(strong_symmetry_defect_finite(plus, act, 1), 0, 1e-12);
  ChainGeometry chain4 = qubits(4);
  SymmetryAction act4 = x_string_action(chain4);
  EXPECT_NEAR(strong_symmetry_defect_finite(paired_pm(4, 0.7), act4, 1), 0,
              1e-10);
  EXPECT_NEAR(strong_symmetry_defect_finite(ghz_mixture(4), act4, 1),
              std::sqrt(2.0), 1e-12);
}

TEST(SymmetryDefects, StringProjectedIsStrongOnlyForTheXSubgroup) {
  ChainGeometry chain = qubits(3);
  SymmetryAction act = xz_string_action(chain);
  DensityOperator rho = string_projected(3);
  EXPECT_NEAR(strong_symmetry_defect_finite(rho, act, 1), 0, 1e-12);
  EXPECT_NEAR(strong_symmetry_defect_finite(rho, act, 2), std::sqrt(2.0),
              1e-12);
  EXPECT_NEAR(strong_symmetry_defect_finite(rho, act), std::sqrt(2.0), 1e-12);
}

TEST(SymmetryDefects, WeakDefectMonotoneUnderRestriction) {
  ChainGeometry chain = qubits(4);
  SymmetryAction act = xz_string_action(chain);
  std::mt19937_64 rng(23);
  Region window = Region::range(1, 3);
  ChainGeometry sub = qubits(2);
  SymmetryAction sub_act = xz_string_action(sub);
  for (int trial = 0; trial < 30; ++trial) {
    DensityOperator rho(chain, testutil::random_density_matrix(rng, 16));
    for (int g = 0; g < 4; ++g) {
      double full = weak_symmetry_defect(rho, act, g);
      double part =
          weak_symmetry_defect(restrict_state(rho, window), sub_act, g);
      EXPECT_LE(part, full + 1e-10);
    }
  }
}

TEST(SymmetryDefects, DefectsScaleInvariant) {
  ChainGeometry chain = qubits(3);
  SymmetryAction act = x_string_action(chain);
  std::mt19937_64 rng(29);
  Matrix m = testutil::random_density_matrix(rng, 8);
  DensityOperator rho(chain, m);
  DensityOperator scaled(chain, 3.7 * m);
  EXPECT_NEAR(strong_symmetry_defect_finite(rho, act, 1),
              strong_symmetry_defect_finite(scaled, act, 1), 1e-12);
}

TEST(SymmetryDefects, ExtensionToJointChainPreservesDefects) {
  ChainGeometry sys = qubits(3);
  ChainGeometry joint = qubits(5);
  SymmetryAction act = x_string_action(sys);
  SymmetryAction ext = extend_action_to_joint(act, joint);
  EXPECT_LE(testutil::max_abs_diff(
                action_unitary(ext, 1),
                tensor_matrix(action_unitary(act, 1),
                              Matrix::Identity(4, 4))),
            1e-14);
  std::mt19937_64 rng(31);
  DensityOperator bath(qubits(2), testutil::random_density_matrix(rng, 4));
  DensityOperator sys_rho = string_projected(3);
  DensityOperator joint_rho = tensor(sys_rho, bath);
  EXPECT_NEAR(strong_symmetry_defect_finite(joint_rho, ext, 1),
              strong_symmetry_defect_finite(sys_rho, act, 1), 1e-10);
  DensityOperator mixed_joint = tensor(maximally_mixed(sys), bath);
  EXPECT_NEAR(strong_symmetry_defect_finite(mixed_joint, ext, 1),
              std::sqrt(2.0), 1e-10);
}

TEST(SymmetryAction, LightConeStaysWithinRadius) {
  ChainGeometry chain = qubits(6);
  SymmetryAction act = conjugated_on_site_action(
      GroupTable::cyclic(2), chain, {pauli_id(), pauli_x()},
      brickwork_cz(6));
  int r = act.radius();
  LocalOperator op = pauli_at(chain, 3, 'y');
  LocalOperator out = apply_action(act, 1, op);
  for (int s : out.support().sites()) {
    EXPECT_GE(s, 3 - r);
    EXPECT_LE(s, 3 + r);
  }
}

}  // namespace
}  // namespace symscope
