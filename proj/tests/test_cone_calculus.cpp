#include <gtest/gtest.h>

#include <cmath>

#include "conic/cone_calculus.hpp"
#include "conic/random.hpp"
#include "oracles.hpp"

using namespace conic;

namespace {

Eigen::Matrix2d flat(double l) {
  Eigen::Matrix2d lam;
  lam << 0, l, l, 0;
  return lam;
}

TEST(DualMembership, InteriorWithSlackAtPairZeroOne) {
  const auto r = dual_membership(Eigen::Vector2d(1.0, 1.05), flat(0.1), 0.0);
  EXPECT_EQ(r.status, DualStatus::Interior);
  EXPECT_NEAR(r.pair_slack, 0.05, 1e-15);
  EXPECT_EQ(r.x, 0);
  EXPECT_EQ(r.y, 1);
}

TEST(DualMembership, BoundaryAndOutside) {
  const auto b = dual_membership(Eigen::Vector2d(1.0, 1.1), flat(0.1), 0.0);
  EXPECT_EQ(b.status, DualStatus::Boundary);
  EXPECT_NEAR(b.pair_slack, 0.0, 1e-15);
  EXPECT_EQ(dual_membership(Eigen::Vector2d(1.0, 1.2), flat(0.1), 0.0).status, DualStatus::Outside);
  EXPECT_EQ(dual_membership(Eigen::Vector2d(-0.1, 0.0), flat(0.1), 0.0).status, DualStatus::Outside);
}

TEST(DualMembership, MarginAndErrors) {
  const Eigen::Vector2d f(1.0, 1.05);
  EXPECT_EQ(dual_membership(f, flat(0.1), 0.06).status, DualStatus::Boundary);
  EXPECT_THROW(dual_membership(f, flat(0.1), -1e-3), ParameterError);
  EXPECT_THROW(dual_membership(Eigen::Vector3d(1, 1, 1), flat(0.1), 0.0), StructuralError);
  EXPECT_DOUBLE_EQ(default_margin(Eigen::Vector2d(3.0, 1.0)), 3e-6);
}

TEST(Liquidation, PureNumeraire) {
  const auto l = liquidation_value(Eigen::Vector2d(1.0, 0.0), flat(0.1));
  EXPECT_NEAR(l.value, 1.0, 1e-12);
  EXPECT_NEAR(l.dual_value, 1.0, 1e-12);
}

TEST(Liquidation, LongAndShortRiskyAsset) {
  const auto longp = liquidation_value(Eigen::Vector2d(0.0, 1.0), flat(0.1));
  EXPECT_NEAR(longp.value, 1.0 / 1.1, 1e-12);
  EXPECT_NEAR(longp.dual_weight(1), 1.0 / 1.1, 1e-12);
  EXPECT_NEAR(longp.dual_weight(0), 1.0, 1e-15);
  const auto shortp = liquidation_value(Eigen::Vector2d(0.0, -1.0), flat(0.1));
  EXPECT_NEAR(shortp.value, -1.1, 1e-12);
  EXPECT_NEAR(shortp.dual_weight(1), 1.1, 1e-12);
}

TEST(Liquidation, MatchesTwoAssetClosedForm) {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::MatrixXd lam = oracle::random_costs(rng, 2);
    const Eigen::Vector2d nu(rng.uniform(-2, 2), rng.uniform(-2, 2));
    const auto l = liquidation_value(nu, lam);
    EXPECT_NEAR(l.value, oracle::liquidation_two_assets(nu, lam), 1e-12);
    EXPECT_TRUE(l.consistent(1e-8));
  }
}

TEST(Liquidation, StructuralErrors) {
  EXPECT_THROW(liquidation_value(Eigen::Vector3d(1, 0, 0), flat(0.1)), StructuralError);
  EXPECT_THROW(liquidation_value(Eigen::Vector2d(1, 0), flat(0.1), 2), StructuralError);
}

TEST(Solvency, CoveredShortIsSolventWithOneTransfer) {
  Eigen::Matrix2d lam = flat(0.1);
  const auto r = solvency_membership(Eigen::Vector2d(-1.0, 1.2), lam);
  ASSERT_TRUE(r.solvent);
  EXPECT_NEAR(r.transfers(1, 0), 1.0, 1e-12);
  EXPECT_NEAR(r.transfers(0, 1), 0.0, 1e-12);
  const Eigen::VectorXd post = Eigen::Vector2d(-1.0, 1.2) + transfer_effect(r.transfers, lam);
  EXPECT_GE(post.minCoeff(), -1e-12);
}

TEST(Solvency, UndercoveredShortHasCertificate) {
  const Eigen::Vector2d nu(-1.0, 1.05);
  const auto r = solvency_membership(nu, flat(0.1));
  ASSERT_FALSE(r.solvent);
  EXPECT_NEAR(r.certificate(0), 1.0, 1e-12);
  EXPECT_NEAR(r.certificate(1), 1.0 / 1.1, 1e-12);
  EXPECT_LT(nu.dot(r.certificate), 0.0);
  EXPECT_TRUE(dual_membership(r.certificate, flat(0.1), 0.0).member());
}

TEST(Solvency, NonnegativePortfolioNeedsNoTransfer) {
  Rng rng(1);
  const auto r = solvency_membership(Eigen::Vector3d(0.0, 2.0, 0.5), oracle::random_admissible_costs(rng, 3));
  ASSERT_TRUE(r.solvent);
  EXPECT_EQ(r.transfers.cwiseAbs().maxCoeff(), 0.0);
}

TEST(LiquidityFloor, Examples) {
  EXPECT_DOUBLE_EQ(liquidity_floor(flat(0.1)), 1.0 / 1.1);
  Eigen::Matrix3d lam;
  lam << 0, 0.3, 0.3, 0.1, 0, 0.3, 0.25, 0.3, 0;
  ASSERT_TRUE(validate_costs(CostSurface::constant(lam), true).ok());
  EXPECT_NEAR(liquidity_floor(lam), 0.8, 1e-15);
  const Eigen::Vector3d nu(0.0, 1.0, 1.0);
  EXPECT_GE(liquidation_value(nu, lam).value, 0.8 * 2.0 - 1e-9);
}

// Property sweeps over random admissible surfaces.
class ConeProperties : public ::testing::Test {
 protected:
  Rng rng{2024};
};

TEST_F(ConeProperties, CashTranslationHomogeneityConcavity) {
  for (int trial = 0; trial < 150; ++trial) {
    const int n = 2 + int(rng.below(5));
    const Eigen::MatrixXd lam = oracle::random_admissible_costs(rng, n);
    const Eigen::VectorXd a = oracle::random_vector(rng, n, -1, 1), b = oracle::random_vector(rng, n, -1, 1);
    const double la = liquidation_value(a, lam).value, lb = liquidation_value(b, lam).value;
    const double w = rng.uniform(-2, 2), alpha = rng.uniform(0, 3);
    Eigen::VectorXd shifted = a;
    shifted(0) -= w;
    EXPECT_NEAR(liquidation_value(shifted, lam).value, la - w, 1e-9);
    EXPECT_NEAR(liquidation_value(Eigen::VectorXd(alpha * a), lam).value, alpha * la, 1e-9);
    EXPECT_GE(liquidation_value(Eigen::VectorXd(a + b), lam).value, la + lb - 1e-9);
  }
}

TEST_F(ConeProperties, SolventPortfoliosPriceNonnegativelyUnderDualElements) {
  for (int trial = 0; trial < 150; ++trial) {
    const int n = 2 + int(rng.below(4));
    const Eigen::MatrixXd lam = oracle::random_admissible_costs(rng, n);
    const Eigen::VectorXd nu = oracle::random_vector(rng, n, -1, 1.5);
    const auto s = solvency_membership(nu, lam);
    if (s.solvent) {
      // A dual element: the normalized minimizer of a random liquidation problem.
      const Eigen::VectorXd f = liquidation_value(oracle::random_vector(rng, n, -1, 1), lam).dual_weight;
      ASSERT_TRUE(dual_membership(f, lam, 0.0).member());
      EXPECT_GE(nu.dot(f), -1e-9);
      const Eigen::VectorXd post = nu + transfer_effect(s.transfers, lam);
      EXPECT_GE(post.minCoeff(), -1e-9);
    } else {
      EXPECT_TRUE(dual_membership(s.certificate, lam, 0.0).member());
      EXPECT_LT(nu.dot(s.certificate), 0.0);
    }
  }
}

TEST_F(ConeProperties, FloorBoundsNonnegativePortfolios) {
  for (int trial = 0; trial < 150; ++trial) {
    const int n = 2 + int(rng.below(6));
    const Eigen::MatrixXd lam = oracle::random_admissible_costs(rng, n);
    const Eigen::VectorXd nu = oracle::random_vector(rng, n, 0, 2);
    EXPECT_GE(liquidation_value(nu, lam).value, liquidity_floor(lam) * nu.sum() - 1e-9);
  }
}

TEST_F(ConeProperties, AgreesWithGridOracleOnTwoAssets) {
  int decided = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const Eigen::MatrixXd lam = oracle::random_admissible_costs(rng, 2);
    Eigen::VectorXd nu = oracle::random_vector(rng, 2, -1, 1);
    nu /= nu.cwiseAbs().sum();
    const auto grid = oracle::grid_solvency(nu, lam, 10.0, 200001);
    const bool solvent = solvency_membership(nu, lam).solvent;
    if (grid.best >= 0.0) {
      EXPECT_TRUE(solvent);
      ++decided;
    } else if (grid.best < -grid.resolution) {
      EXPECT_FALSE(solvent);
      ++decided;
    }
  }
  EXPECT_GT(decided, 90);
}

}  // namespace
