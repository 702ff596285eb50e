#include <gtest/gtest.h>

#include <random>

#include "symscope/states.hpp"
#include "test_util.hpp"

namespace symscope {
namespace {

using testutil::max_abs_diff;

Vector plus_vec() {
  Vector v(2);
  v << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
  return v;
}

TEST(ChainGeometry, StridesAreLittleEndian) {
  ChainGeometry g({2, 3, 2});
  EXPECT_EQ(g.total_dim(), 12);
  EXPECT_EQ(g.stride(0), 1);
  EXPECT_EQ(g.stride(1), 2);
  EXPECT_EQ(g.stride(2), 6);
}

TEST(ChainGeometry, RejectsDimensionsAboveCap) {
  EXPECT_NO_THROW(ChainGeometry::uniform(13));
  EXPECT_THROW(ChainGeometry::uniform(14), std::invalid_argument);
}

TEST(Region, ComplementAndContainment) {
  Region r({4, 1, 1, 2});
  EXPECT_EQ(r.sites(), (std::vector<int>{1, 2, 4}));
  Region c = r.complement(6);
  EXPECT_EQ(c.sites(), (std::vector<int>{0, 3, 5}));
  EXPECT_TRUE(r.contains(Region({1, 4})));
  EXPECT_FALSE(r.contains(Region({0})));
  EXPECT_EQ(r.position_of(4), 2);
}

TEST(Tensor, IdentityCase) {
  DensityOperator a = maximally_mixed(ChainGeometry::uniform(1));
  DensityOperator ab = tensor(a, a);
  EXPECT_LT(max_abs_diff(ab.matrix(), Matrix::Identity(4, 4) / 4.0), 1e-15);
}

TEST(Tensor, ProductOfProjectors) {
  Vector p = plus_vec();
  DensityOperator plus = DensityOperator(
      ChainGeometry::uniform(1), p * p.adjoint());
  DensityOperator both = tensor(plus, plus);
  Vector pp = tensor_vector(p, p);
  EXPECT_LT(max_abs_diff(both.matrix(), pp * pp.adjoint()), 1e-15);
}

TEST(Tensor, TraceMultiplies) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    DensityOperator a(ChainGeometry::uniform(1),
                      testutil::random_psd(rng, 2));
    DensityOperator b(ChainGeometry::uniform(2),
                      testutil::random_psd(rng, 4));
    EXPECT_NEAR(tensor(a, b).trace(), a.trace() * b.trace(), 1e-9);
  }
}

TEST(Restrict, SingleSiteOfStringProjectedMatchesMaximallyMixed) {
  const int n = 4;
  DensityOperator rho1 = maximally_mixed(ChainGeometry::uniform(n));
  DensityOperator rho2 = string_projected(n, 'x');
  for (int site = 0; site < n; ++site) {
    DensityOperator r2 = restrict_state(rho2, Region::single(site));
    DensityOperator r1 = restrict_state(rho1, Region::single(site));
    EXPECT_LT(max_abs_diff(r2.matrix(), Matrix::Identity(2, 2) / 2.0), 1e-14);
    EXPECT_LT(trace_distance(r1, r2), 1e-14);
  }
}

TEST(Restrict, ProductStateFactors) {
  Vector p = plus_vec();
  Vector pp = tensor_vector(p, p);
  DensityOperator rho(ChainGeometry::uniform(2), pp * pp.adjoint());
  DensityOperator r = restrict_state(rho, Region::single(0));
  EXPECT_LT(max_abs_diff(r.matrix(), p * p.adjoint()), 1e-14);
}

TEST(Restrict, MaximallyEntangledPairGivesMixedMarginal) {
  Vector bell = Vector::Zero(4);
  bell(0) = 1 / std::sqrt(2.0);
  bell(3) = 1 / std::sqrt(2.0);
  DensityOperator rho(ChainGeometry::uniform(2), bell * bell.adjoint());
  DensityOperator r = restrict_state(rho, Region::single(0));
  EXPECT_LT(max_abs_diff(r.matrix(), Matrix::Identity(2, 2) / 2.0), 1e-14);
}

TEST(Restrict, EmptyRegionGivesScalarTrace) {
  std::mt19937_64 rng(3);
  DensityOperator rho(ChainGeometry::uniform(2), testutil::random_psd(rng, 4));
  DensityOperator s = restrict_state(rho, Region());
  EXPECT_EQ(s.matrix().rows(), 1);
  EXPECT_NEAR(s.trace(), rho.trace(), 1e-10);
}

TEST(Restrict, TensorMarginalRecoversFactor) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    DensityOperator a(ChainGeometry::uniform(1), testutil::random_psd(rng, 2));
    DensityOperator b(ChainGeometry::uniform(2), testutil::random_psd(rng, 4));
    DensityOperator ab = tensor(a, b);
    DensityOperator back = restrict_state(ab, Region::single(0));
    EXPECT_LT(max_abs_diff(back.matrix(), a.matrix() * b.trace()), 1e-10);
  }
}

TEST(Restrict, TracePreservingAndPsdPreserving) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 1000; ++trial) {
    DensityOperator rho(ChainGeometry::uniform(2),
                        testutil::random_psd(rng, 4));
    Region gamma = (trial % 2 == 0) ? Region::single(0) : Region::single(1);
    DensityOperator r = restrict_state(rho, gamma);
    EXPECT_NEAR(r.trace(), rho.trace(), 1e-10 * std::max(1.0, rho.trace()));
    Eigen::SelfAdjointEigenSolver<Matrix> es(r.matrix(), Eigen::EigenvaluesOnly);
    EXPECT_GT(es.eigenvalues().minCoeff(), -1e-12 * std::max(1.0, rho.trace()));
  }
}

TEST(Restrict, NestedRestrictionComposes) {
  std::mt19937_64 rng(17);
  DensityOperator rho(ChainGeometry::uniform(3),
                      testutil::random_psd(rng, 8));
  Region gamma({0, 2});
  DensityOperator mid = restrict_state(rho, gamma);
  // Site 2 of the parent chain sits at position 1 of the restricted chain.
  DensityOperator twice = restrict_state(mid, Region::single(1));
  DensityOperator direct = restrict_state(rho, Region::single(2));
  EXPECT_LT(max_abs_diff(twice.matrix(), direct.matrix()), 1e-12);
}

TEST(Embed, SingleSitePadding) {
  ChainGeometry g = ChainGeometry::uniform(2);
  Matrix full = embed(pauli_at(g, 0, 'z'), g);
  EXPECT_LT(max_abs_diff(full, tensor_matrix(pauli_z(), pauli_id())), 1e-15);
  Matrix full1 = embed(pauli_at(g, 1, 'z'), g);
  EXPECT_LT(max_abs_diff(full1, tensor_matrix(pauli_id(), pauli_z())), 1e-15);
}

TEST(Embed, DisjointSupportsCommute) {
  std::mt19937_64 rng(19);
  ChainGeometry g = ChainGeometry::uniform(3);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix a = testutil::random_complex(rng, 2, 2);
    Matrix b = testutil::random_complex(rng, 2, 2);
    Matrix ea = embed(site_operator(g, 0, a), g);
    Matrix eb = embed(site_operator(g, 2, b), g);
    EXPECT_LT(max_abs_diff(ea * eb, eb * ea), 1e-12);
  }
}

TEST(Embed, IdentityMapsToIdentity) {
  ChainGeometry g = ChainGeometry::uniform(3);
  LocalOperator op(g, Region({0, 1, 2}), Matrix::Identity(8, 8));
  EXPECT_LT(max_abs_diff(embed(op, g), Matrix::Identity(8, 8)), 1e-15);
}

TEST(Embed, NonContiguousSupport) {
  ChainGeometry g = ChainGeometry::uniform(3);
  LocalOperator zz = local_product(pauli_at(g, 0, 'z'), pauli_at(g, 2, 'z'), g);
  Matrix expected = tensor_matrix(tensor_matrix(pauli_z(), pauli_id()),
                                  pauli_z());
  EXPECT_LT(max_abs_diff(embed(zz, g), expected), 1e-15);
}

TEST(Distances, ZeroOnEqualStates) {
  std::mt19937_64 rng(23);
  DensityOperator rho(ChainGeometry::uniform(2),
                      testutil::random_density_matrix(rng, 4));
  EXPECT_NEAR(trace_distance(rho, rho), 0.0, 1e-14);
  EXPECT_NEAR(operator_norm_distance(rho, rho), 0.0, 1e-14);
}

TEST(Distances, OrthogonalPureStatesAtUnitDistance) {
  Matrix zero = Matrix::Zero(2, 2), one = Matrix::Zero(2, 2);
  zero(0, 0) = 1;
  one(1, 1) = 1;
  ChainGeometry g = ChainGeometry::uniform(1);
  EXPECT_NEAR(trace_distance(DensityOperator(g, zero), DensityOperator(g, one)),
              1.0, 1e-14);
}

TEST(Distances, TriangleInequality) {
  std::mt19937_64 rng(29);
  ChainGeometry g = ChainGeometry::uniform(2);
  for (int trial = 0; trial < 100; ++trial) {
    DensityOperator a(g, testutil::random_density_matrix(rng, 4));
    DensityOperator b(g, testutil::random_density_matrix(rng, 4));
    DensityOperator c(g, testutil::random_density_matrix(rng, 4));
    EXPECT_LE(trace_distance(a, c),
              trace_distance(a, b) + trace_distance(b, c) + 1e-12);
  }
}

TEST(DensityOperator, RejectsNonHermitian) {
  Matrix m(2, 2);
  m << 1, 1, 0, 1;
  EXPECT_THROW(DensityOperator(ChainGeometry::uniform(1), m),
               std::invalid_argument);
}

TEST(DensityOperator, RejectsNegativeBeyondClip) {
  Matrix m = Matrix::Identity(2, 2);
  m(1, 1) = -1e-6;
  EXPECT_THROW(DensityOperator(ChainGeometry::uniform(1), m),
               std::invalid_argument);
}

TEST(DensityOperator, ClipsNegativeDust) {
  reset_psd_clip_count();
  Matrix m = Matrix::Identity(2, 2);
  m(1, 1) = -1e-12;
  DensityOperator rho(ChainGeometry::uniform(1), m);
  EXPECT_EQ(psd_clip_count(), 1);
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix(), Eigen::EigenvaluesOnly);
  EXPECT_GE(es.eigenvalues().minCoeff(), 0.0);
}

TEST(DensityOperator, ValidatorIsIdempotent) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    Matrix m = testutil::random_psd(rng, 4);
    DensityOperator once(ChainGeometry::uniform(2), m);
    EXPECT_NO_THROW(DensityOperator(ChainGeometry::uniform(2), once.matrix()));
  }
}

TEST(ApplyLocal, MatchesEmbeddedAction) {
  std::mt19937_64 rng(37);
  ChainGeometry g = ChainGeometry::uniform(3);
  for (int trial = 0; trial < 20; ++trial) {
    Matrix a = testutil::random_complex(rng, 4, 4);
    LocalOperator op(g, Region({0, 2}), a);
    Vector v = testutil::random_state_vector(rng, 8);
    Vector fast = apply_local(op, g, v);
    Vector slow = embed(op, g) * v;
    EXPECT_LT((fast - slow).cwiseAbs().maxCoeff(), 1e-12);

    Matrix rho = testutil::random_psd(rng, 8);
    Matrix conj_fast = conjugate_by_local(op, g, rho);
    Matrix e = embed(op, g);
    EXPECT_LT(max_abs_diff(conj_fast, e * rho * e.adjoint()), 1e-10);
  }
}

TEST(Builders, PairedPmIsNormalizedAndPsd) {
  DensityOperator rho = paired_pm(4, 0.3);
  EXPECT_NEAR(rho.trace(), 1.0, 1e-12);
  Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix(), Eigen::EigenvaluesOnly);
  EXPECT_GE(es.eigenvalues().minCoeff(), -1e-14);
}

TEST(Builders, GhzMixtureHasTwoPointMasses) {
  DensityOperator rho = ghz_mixture(3);
  EXPECT_NEAR(rho.matrix()(0, 0).real(), 0.5, 1e-15);
  EXPECT_NEAR(rho.matrix()(7, 7).real(), 0.5, 1e-15);
  EXPECT_NEAR(rho.trace(), 1.0, 1e-15);
}

TEST(Builders, StringProjectedIsIdempotentProjectorScaled) {
  DensityOperator rho = string_projected(3, 'x');
  // (1+X)/2 is a projector; rho = P/2^{N-1}.
  Matrix p = rho.matrix() * 4.0;
  EXPECT_LT(max_abs_diff(p * p, p), 1e-12);
  EXPECT_NEAR(rho.trace(), 1.0, 1e-12);
}

}  // namespace
}  // namespace symscope
