#include <gtest/gtest.h>

#include "oracles.hpp"

using namespace odmd;

TEST(Pinv, IdentityIsItsOwnInverse) {
  const ComplexMatrix i3 = ComplexMatrix::Identity(3, 3);
  EXPECT_LT((pinv(i3) - i3).norm(), 1e-15);
}

TEST(Pinv, SingularDiagonal) {
  ComplexMatrix a = ComplexMatrix::Zero(2, 2);
  a(0, 0) = 2.0;
  ComplexMatrix expected = ComplexMatrix::Zero(2, 2);
  expected(0, 0) = 0.5;
  EXPECT_LT((pinv(a) - expected).norm(), 1e-15);
}

TEST(Pinv, RandomTallFullRankReproduces) {
  std::mt19937_64 rng(1);
  const ComplexMatrix a = oracle::random_complex(5, 3, rng);
  EXPECT_LT((a * pinv(a) * a - a).norm(), 1e-12 * a.norm());
}

TEST(Pinv, PenroseConditionsOnRandomShapes) {
  std::mt19937_64 rng(2);
  for (auto [r, c] : {std::pair<Index, Index>{4, 4}, {16, 3}, {3, 16}, {64, 8}, {128, 16}}) {
    const ComplexMatrix a = oracle::random_complex(r, c, rng);
    EXPECT_LT(oracle::penrose_violation(a, pinv(a)), 1e-10) << r << "x" << c;
  }
}

TEST(Pinv, PenroseConditionsRankDeficient) {
  std::mt19937_64 rng(3);
  const ComplexMatrix a = oracle::random_complex(20, 3, rng) * oracle::random_complex(3, 6, rng);
  EXPECT_EQ(factor_range(a).rank(), 3);
  EXPECT_LT(oracle::penrose_violation(a, pinv(a)), 1e-10);
}

TEST(Pinv, RejectsNonFinite) {
  ComplexMatrix a = ComplexMatrix::Identity(2, 2);
  a(0, 1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(pinv(a), InvalidInput);
}

TEST(ProjectorResidual, FullRangeGivesZero) {
  std::mt19937_64 rng(4);
  const RealMatrix k = oracle::random_real(2, 3, rng);
  EXPECT_LT(projector_residual(ComplexMatrix::Identity(2, 2), k).norm(), 1e-15);
}

TEST(ProjectorResidual, OrthogonalInputUnchanged) {
  ComplexMatrix phi(2, 1);
  phi << 1.0, 1.0;
  RealMatrix k(2, 1);
  k << 1.0, -1.0;
  EXPECT_LT((projector_residual(phi, k) - k.cast<Complex>()).norm(), 1e-15);
}

TEST(ProjectorResidual, ResultOrthogonalToRange) {
  std::mt19937_64 rng(5);
  const ComplexMatrix phi = oracle::random_complex(8, 3, rng);
  const RealMatrix k = oracle::random_real(8, 4, rng);
  EXPECT_LT((phi.adjoint() * projector_residual(phi, k)).norm(), 1e-12);
}

TEST(ProjectorResidual, ShapeMismatchThrows) {
  EXPECT_THROW(projector_residual(ComplexMatrix::Identity(3, 3), RealMatrix::Zero(2, 2)), ShapeError);
}

TEST(ProjectorResidual, ComplementIsIdempotentAndHermitian) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 5; ++trial) {
    const ComplexMatrix phi = oracle::random_complex(12, 4, rng);
    const ComplexMatrix q = ComplexMatrix::Identity(12, 12) - phi * pinv(phi);
    EXPECT_LT((q * q - q).norm(), 1e-10);
    EXPECT_LT((q.adjoint() - q).norm(), 1e-10);
  }
}

TEST(Norms, Basics) {
  EXPECT_EQ(frob_norm(RealMatrix::Zero(3, 2)), 0.0);
  EXPECT_NEAR(frob_norm(RealMatrix::Identity(2, 2)), std::sqrt(2.0), 1e-15);
  std::mt19937_64 rng(7);
  const ComplexMatrix a = oracle::random_complex(5, 4, rng);
  double sum = 0.0;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j) sum += std::norm(a(i, j));
  EXPECT_NEAR(frob_norm(a), std::sqrt(sum), 1e-13);
  EXPECT_NEAR(l2_norm(a.col(0)), std::sqrt(a.col(0).cwiseAbs2().sum()), 1e-13);
}

// The real gradient of K -> 1/2 ||A K||_F^2 over real K is Re(A^H A K).
TEST(RealGradient, MatchesFiniteDifferences) {
  std::mt19937_64 rng(8);
  const ComplexMatrix a = oracle::random_complex(6, 4, rng);
  const RealMatrix k = oracle::random_real(4, 3, rng);
  const RealMatrix analytic = (a.adjoint() * a * k.cast<Complex>()).real();
  const RealMatrix fd = oracle::fd_matrix_gradient(
      [&](const RealMatrix& x) { return 0.5 * (a * x.cast<Complex>()).squaredNorm(); }, k);
  EXPECT_LT((fd - analytic).norm() / analytic.norm(), 1e-6);
}

TEST(RelativeChange, Conventions) {
  EXPECT_EQ(relative_change(0.0, 0.0), 0.0);
  EXPECT_TRUE(std::isinf(relative_change(1.0, 0.0)));
  EXPECT_EQ(relative_change(1.0, 4.0), 0.25);
}
