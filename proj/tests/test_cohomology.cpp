#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "symscope/cochain.hpp"
#include "symscope/group.hpp"
#include "symscope/operators.hpp"
#include "symscope/phase.hpp"
#include "symscope/smith.hpp"
#include "test_util.hpp"

namespace symscope {
namespace {

// Bareiss fraction-free determinant; entries stay exact in wide arithmetic.
__int128 int_det(const IntMatrix& m) {
  const int n = static_cast<int>(m.rows());
  std::vector<std::vector<__int128>> a(n, std::vector<__int128>(n));
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a[i][j] = m(i, j);
  __int128 prev = 1;
  int sign = 1;
  for (int k = 0; k + 1 < n; ++k) {
    if (a[k][k] == 0) {
      int swap = -1;
      for (int i = k + 1; i < n; ++i)
        if (a[i][k] != 0) { swap = i; break; }
      if (swap < 0) return 0;
      std::swap(a[k], a[swap]);
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i)
      for (int j = k + 1; j < n; ++j)
        a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
    prev = a[k][k];
  }
  return sign * a[n - 1][n - 1];
}

void expect_valid_smith(const IntMatrix& a, const SmithDecomposition& d) {
  ASSERT_EQ(d.u.rows(), a.rows());
  ASSERT_EQ(d.v.rows(), a.cols());
  __int128 du = int_det(d.u), dv = int_det(d.v);
  EXPECT_TRUE(du == 1 || du == -1);
  EXPECT_TRUE(dv == 1 || dv == -1);
  for (Eigen::Index i = 0; i < d.s.rows(); ++i)
    for (Eigen::Index j = 0; j < d.s.cols(); ++j)
      if (i != j) EXPECT_EQ(d.s(i, j), 0);
  Eigen::Index k = std::min(d.s.rows(), d.s.cols());
  for (Eigen::Index i = 0; i + 1 < k; ++i) {
    EXPECT_GE(d.s(i, i), 0);
    if (d.s(i + 1, i + 1) != 0) {
      ASSERT_NE(d.s(i, i), 0);
      EXPECT_EQ(d.s(i + 1, i + 1) % d.s(i, i), 0);
    }
  }
  // u * a * v == s is re-verified inside smith_normal_form; spot-check rank.
  int rank = 0;
  for (Eigen::Index i = 0; i < k; ++i)
    if (d.s(i, i) != 0) ++rank;
  EXPECT_EQ(rank, d.rank);
}

Phase random_phase(std::mt19937_64& rng, long long max_den) {
  std::uniform_int_distribution<long long> den_d(1, max_den);
  long long den = den_d(rng);
  std::uniform_int_distribution<long long> num_d(0, den - 1);
  return Phase::of(num_d(rng), den);
}

Cochain random_cochain(std::mt19937_64& rng, const GroupTable& g, int degree,
                       long long max_den) {
  Cochain c(g, degree);
  std::vector<Phase> vals(c.size());
  for (Phase& p : vals) p = random_phase(rng, max_den);
  return Cochain::from_values(g, degree, std::move(vals));
}

Matrix conj_y() {
  Matrix m(2, 2);
  m << Complex(0, 0), Complex(0, 1), Complex(0, -1), Complex(0, 0);
  return m;
}

// {1, X, Z, XZ-like} indexed by the Klein labels a + 2b; the (1,1) element
// uses the real-squaring y so every element squares to +1.
std::vector<Matrix> pauli_projective_rep() {
  return {Matrix::Identity(2, 2), pauli_x(), pauli_z(), conj_y()};
}

TEST(Smith, KnownDiagonalForms) {
  IntMatrix a(2, 2);
  a << 2, 0, 0, 3;
  SmithDecomposition d = smith_normal_form(a);
  expect_valid_smith(a, d);
  EXPECT_EQ(d.s(0, 0), 1);
  EXPECT_EQ(d.s(1, 1), 6);
  EXPECT_EQ(d.rank, 2);

  IntMatrix b(2, 2);
  b << 2, 4, 6, 8;
  d = smith_normal_form(b);
  expect_valid_smith(b, d);
  EXPECT_EQ(d.s(0, 0), 2);
  EXPECT_EQ(d.s(1, 1), 4);

  IntMatrix z = IntMatrix::Zero(3, 2);
  d = smith_normal_form(z);
  expect_valid_smith(z, d);
  EXPECT_EQ(d.rank, 0);
}

TEST(Smith, RandomMatricesFactorExactly) {
  std::mt19937_64 rng(41);
  std::uniform_int_distribution<long long> entry(-9, 9);
  std::vector<std::pair<int, int>> shapes = {{3, 5}, {4, 4}, {6, 3}, {1, 4}};
  for (int trial = 0; trial < 50; ++trial) {
    auto [m, n] = shapes[trial % shapes.size()];
    IntMatrix a(m, n);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < n; ++j) a(i, j) = entry(rng);
    SmithDecomposition d = smith_normal_form(a);
    expect_valid_smith(a, d);
  }
}

// ---------------------------------------------------------------------------

TEST(Coboundary, SquaredIsZero) {
  std::mt19937_64 rng(42);
  std::vector<GroupTable> groups = {GroupTable::cyclic(2), GroupTable::cyclic(4),
                                    GroupTable::klein_four()};
  for (const GroupTable& g : groups)
    for (int degree = 0; degree <= 3; ++degree) {
      Cochain w = random_cochain(rng, g, degree, 8);
      EXPECT_TRUE(coboundary(coboundary(w)).is_zero())
          << "order " << g.order() << " degree " << degree;
    }
}

TEST(Coboundary, QuarterTurnOneCochainOnZ2) {
  GroupTable z2 = GroupTable::cyclic(2);
  Cochain eta =
      Cochain::from_values(z2, 1, {Phase(), Phase::of(1, 4)});
  Cochain d = coboundary(eta);
  EXPECT_EQ(d.at({0, 0}), Phase());
  EXPECT_EQ(d.at({0, 1}), Phase());
  EXPECT_EQ(d.at({1, 0}), Phase());
  EXPECT_EQ(d.at({1, 1}), Phase::of(1, 2));
  EXPECT_TRUE(is_cocycle(d));
  TrivializationResult r = trivialize(d);
  ASSERT_TRUE(r.trivial);
  EXPECT_EQ(coboundary(*r.witness), d);
}

TEST(Coboundary, MatrixMatchesEvaluation) {
  std::mt19937_64 rng(43);
  GroupTable g = GroupTable::klein_four();
  for (int degree = 1; degree <= 3; ++degree) {
    Cochain eta = random_cochain(rng, g, degree - 1, 6);
    IntMatrix d = coboundary_matrix(g, degree);
    Cochain direct = coboundary(eta);
    for (Eigen::Index row = 0; row < d.rows(); ++row) {
      Phase acc;
      for (Eigen::Index col = 0; col < d.cols(); ++col)
        acc = acc + eta.values()[static_cast<std::size_t>(col)].times(d(row, col));
      EXPECT_EQ(acc, direct.values()[static_cast<std::size_t>(row)]);
    }
  }
}

TEST(Trivialize, DegreeOneIsZeroCheck) {
  GroupTable z2 = GroupTable::cyclic(2);
  EXPECT_TRUE(is_coboundary(Cochain(z2, 1)));
  // The sign character is a cocycle but never a coboundary: constants have
  // vanishing coboundary.
  Cochain sign = Cochain::from_values(z2, 1, {Phase(), Phase::of(1, 2)});
  EXPECT_TRUE(is_cocycle(sign));
  EXPECT_FALSE(is_coboundary(sign));
}

TEST(Trivialize, RandomCoboundariesHaveVerifiedWitnesses) {
  std::mt19937_64 rng(44);
  std::vector<GroupTable> groups = {GroupTable::cyclic(4),
                                    GroupTable::klein_four()};
  for (const GroupTable& g : groups)
    for (int degree = 2; degree <= 3; ++degree) {
      CoboundarySolver solver(g, degree);
      for (int trial = 0; trial < 10; ++trial) {
        Cochain eta = random_cochain(rng, g, degree - 1, 6);
        Cochain w = coboundary(eta);
        TrivializationResult r = solver.trivialize(w);
        ASSERT_TRUE(r.trivial);
        EXPECT_EQ(coboundary(*r.witness), w);
      }
    }
}

TEST(Trivialize, RejectsMismatchedInput) {
  CoboundarySolver solver(GroupTable::cyclic(2), 2);
  EXPECT_THROW(solver.trivialize(Cochain(GroupTable::cyclic(2), 3)),
               std::invalid_argument);
  EXPECT_THROW(solver.trivialize(Cochain(GroupTable::cyclic(4), 2)),
               std::invalid_argument);
}

// ---------------------------------------------------------------------------

TEST(ProjectiveRep, PauliRepYieldsNontrivialKleinCocycle) {
  GroupTable klein = GroupTable::klein_four();
  Cochain w = projective_2cocycle(klein, pauli_projective_rep());
  EXPECT_TRUE(is_cocycle(w));
  EXPECT_TRUE(w.is_normalized());
  // X then Z lands on the real-squaring y with phase +i; the reversed order
  // picks up -i, and every element squares cleanly to the identity.
  EXPECT_EQ(w.at({1, 2}), Phase::of(1, 4));
  EXPECT_EQ(w.at({2, 1}), Phase::of(3, 4));
  EXPECT_EQ(w.at({3, 1}), Phase::of(1, 4));
  EXPECT_EQ(w.at({1, 3}), Phase::of(3, 4));
  EXPECT_EQ(w.at({2, 3}), Phase::of(1, 4));
  EXPECT_EQ(w.at({3, 2}), Phase::of(3, 4));
  for (int g = 0; g < 4; ++g) EXPECT_EQ(w.at({g, g}), Phase());
  EXPECT_FALSE(is_coboundary(w));
  // Doubling the class kills it: the second cohomology of the Klein group
  // has exponent two.
  EXPECT_TRUE(is_coboundary(w.times(2)));
}

TEST(ProjectiveRep, ScalarOnIdentityIsDividedOut) {
  GroupTable klein = GroupTable::klein_four();
  std::vector<Matrix> rep = pauli_projective_rep();
  Cochain base = projective_2cocycle(klein, rep);
  rep[0] *= Complex(0, 1);
  EXPECT_EQ(projective_2cocycle(klein, rep), base);
}

TEST(ProjectiveRep, RephasingShiftsByACoboundary) {
  std::mt19937_64 rng(45);
  GroupTable klein = GroupTable::klein_four();
  Cochain base = projective_2cocycle(klein, pauli_projective_rep());
  std::uniform_int_distribution<long long> eighths(0, 7);
  for (int trial = 0; trial < 50; ++trial) {
    // Dyadic rephasings keep the shifted denominators within the snap bound.
    Cochain beta(klein, 1);
    for (int g = 0; g < 4; ++g) beta.set({g}, Phase::of(eighths(rng), 8));
    // A phase on the identity is divided out during extraction, so pin it to
    // zero for the exact shift identity.
    beta.set({klein.identity()}, Phase());
    std::vector<Matrix> rep = pauli_projective_rep();
    for (int g = 0; g < 4; ++g) rep[g] *= beta.at({g}).unit();
    Cochain w = projective_2cocycle(klein, rep);
    EXPECT_EQ(w, base + coboundary(beta));
    EXPECT_TRUE(same_class(w, base));
    EXPECT_FALSE(is_coboundary(w));
  }
  // With an identity phase present the extracted cocycle differs from
  // base + coboundary(beta), but the class survives.
  Cochain beta(klein, 1);
  for (int g = 0; g < 4; ++g) beta.set({g}, Phase::of(eighths(rng), 8));
  beta.set({klein.identity()}, Phase::of(1, 3));
  std::vector<Matrix> rep = pauli_projective_rep();
  for (int g = 0; g < 4; ++g) rep[g] *= beta.at({g}).unit();
  EXPECT_TRUE(same_class(projective_2cocycle(klein, rep), base));
}

TEST(ProjectiveRep, RejectsNonProjectiveMatrices) {
  GroupTable z2 = GroupTable::cyclic(2);
  Matrix skew(2, 2);
  skew << Complex(1, 0), Complex(0, 0), Complex(0, 0), Complex(0, 1);
  EXPECT_THROW(
      projective_2cocycle(z2, {Matrix::Identity(2, 2), skew}),
      std::invalid_argument);
}

// ---------------------------------------------------------------------------

TEST(CohomologyCount, KleinSecondGroupHasTwoClasses) {
  GroupTable klein = GroupTable::klein_four();
  const int e = klein.identity();
  Cochain shape(klein, 2);
  std::vector<std::size_t> free_slots;
  std::vector<int> args(2);
  for (std::size_t idx = 0; idx < shape.size(); ++idx) {
    shape.decode(idx, args);
    if (args[0] != e && args[1] != e) free_slots.push_back(idx);
  }
  ASSERT_EQ(free_slots.size(), 9u);

  // Integer prefilter: with all values in quarter turns, the cocycle
  // condition is an exact linear system mod 4.
  IntMatrix d3 = coboundary_matrix(klein, 3);
  std::vector<long long> quarters(shape.size(), 0);
  std::vector<Cochain> cocycles;
  std::size_t total = 1;
  for (std::size_t i = 0; i < free_slots.size(); ++i) total *= 4;
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t rest = code;
    for (std::size_t slot : free_slots) {
      quarters[slot] = static_cast<long long>(rest % 4);
      rest /= 4;
    }
    bool closed = true;
    for (Eigen::Index row = 0; row < d3.rows() && closed; ++row) {
      long long acc = 0;
      for (Eigen::Index col = 0; col < d3.cols(); ++col)
        acc += d3(row, col) * quarters[static_cast<std::size_t>(col)];
      closed = acc % 4 == 0;
    }
    if (!closed) continue;
    std::vector<Phase> vals(shape.size());
    for (std::size_t i = 0; i < vals.size(); ++i)
      vals[i] = Phase::of(quarters[i], 4);
    cocycles.push_back(Cochain::from_values(klein, 2, std::move(vals)));
  }
  ASSERT_FALSE(cocycles.empty());

  CoboundarySolver solver(klein, 2);
  std::vector<Cochain> reps;
  for (const Cochain& w : cocycles) {
    bool known = false;
    for (const Cochain& rep : reps)
      if (solver.trivialize(w - rep).trivial) { known = true; break; }
    if (!known) reps.push_back(w);
  }
  EXPECT_EQ(reps.size(), 2u);

  Cochain pauli = projective_2cocycle(klein, pauli_projective_rep());
  int matched = 0;
  for (const Cochain& rep : reps)
    if (solver.trivialize(pauli - rep).trivial) ++matched;
  EXPECT_EQ(matched, 1);
}

TEST(CohomologyCount, ThirdGroupOfZ2HasTwoClasses) {
  GroupTable z2 = GroupTable::cyclic(2);
  std::vector<Cochain> cocycles;
  for (int k = 0; k < 4; ++k) {
    Cochain w(z2, 3);
    w.set({1, 1, 1}, Phase::of(k, 4));
    if (is_cocycle(w)) cocycles.push_back(w);
  }
  // Only the half-turn closes: the quarter-turn picks up 2 w(1,1,1) != 0
  // under the coboundary.
  ASSERT_EQ(cocycles.size(), 2u);
  EXPECT_EQ(cocycles[0].at({1, 1, 1}), Phase());
  EXPECT_EQ(cocycles[1].at({1, 1, 1}), Phase::of(1, 2));
  EXPECT_TRUE(is_coboundary(cocycles[0]));
  EXPECT_FALSE(is_coboundary(cocycles[1]));
  EXPECT_FALSE(same_class(cocycles[0], cocycles[1]));
}

}  // namespace
}  // namespace symscope
