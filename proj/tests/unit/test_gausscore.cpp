#include "oracles.hpp"
#include "samplers.hpp"
#include "witsopt/errors.hpp"
#include "witsopt/gausscore.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace witsopt;

namespace {

const ModelParams kRef{0.8, 0.1};
constexpr std::array<Var, 4> kK{Var::X0, Var::W1, Var::W2, Var::U1};

double rel(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

}  // namespace

TEST(ModelParams, RejectsNonPositive) {
  EXPECT_THROW(ModelParams::make(0.0, 0.1), InvalidParams);
  EXPECT_THROW(ModelParams::make(0.8, -1.0), InvalidParams);
  EXPECT_THROW(ModelParams::make(NAN, 0.1), InvalidParams);
  EXPECT_NO_THROW(ModelParams::make(0.8, 0.1));
}

TEST(CorrelationPoint, RangeAndDerivedCorrelation) {
  EXPECT_THROW(CorrelationPoint::make(1.1, 0, 0, 0), InvalidPoint);
  EXPECT_THROW(CorrelationPoint::make(0, NAN, 0, 0), InvalidPoint);
  const auto p = CorrelationPoint::make(0.5, -0.4, 0.3, 0.2);
  EXPECT_DOUBLE_EQ(p.w2_u1(), 0.5 * -0.4 + 0.3 * 0.2);
  EXPECT_EQ(CorrelationPoint::x0_w1(), 0.0);
  EXPECT_TRUE(lex_less({0, 0, 0, 0}, {0, 0, 0, 1e-9}));
  EXPECT_FALSE(lex_less({0, 1, 0, 0}, {0, 0, 1, 1}));
}

TEST(JointCovariance, MatchesEntrywiseConstruction) {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 200; ++i) {
    const auto d = sampler::model(rng);
    const auto pt = sampler::case2_point(rng, d.power, d.params.source_var, d.params.noise_var);
    const CovMatrix c = build_joint_covariance(pt, d.power, d.params);
    const Eigen::MatrixXd ref = oracle::joint_covariance(pt.x0_w2, pt.x0_u1, pt.w1_w2, pt.w1_u1,
                                                         d.power, d.params.source_var,
                                                         d.params.noise_var);
    EXPECT_LT((c.entries() - ref).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(JointCovariance, ZeroPointDeterminant) {
  const CovMatrix c = build_joint_covariance({0, 0, 0, 0}, 0.3, kRef);
  EXPECT_NEAR(c.block(kK).determinant(), 0.24, 1e-14);
}

TEST(JointCovariance, DeterminantIdentities) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 500; ++i) {
    const auto d = sampler::model(rng);
    const double q = d.params.source_var, n = d.params.noise_var, p = d.power;
    const auto pt = sampler::case2_point(rng, p, q, n);
    const CovMatrix c = build_joint_covariance(pt, p, d.params);
    const double aux = -1 + pt.x0_w2 * pt.x0_w2 + pt.w1_w2 * pt.w1_w2;
    const double u1x = -1 + pt.x0_u1 * pt.x0_u1 + pt.w1_u1 * pt.w1_u1;
    const double det_k = q * p * aux * u1x;
    EXPECT_LT(std::abs(c.block(kK).determinant() - det_k), 1e-10 * std::abs(det_k) + 1e-15);
    // K2 drops U1 and adds Y1
    const std::array<Var, 4> k2{Var::X0, Var::W1, Var::W2, Var::Y1};
    const double det_k2 = q * aux * (p * u1x - n);
    EXPECT_LT(std::abs(c.block(k2).determinant() - det_k2), 1e-10 * std::abs(det_k2) + 1e-15);
  }
}

TEST(JointCovariance, RejectsNonPsdPoint) {
  // rho2^2 + rho4^2 > 1 together with a small U1 correlation: det(K2) < 0
  EXPECT_THROW(build_joint_covariance({0.9, 0.0, 0.9, 0.0}, 0.3, kRef), NotPsd);
  EXPECT_NO_THROW(build_joint_covariance_unchecked({0.9, 0.0, 0.9, 0.0}, 0.3, kRef));
  EXPECT_THROW(build_joint_covariance({0, 0, 0, 0}, -0.1, kRef), InvalidParams);
}

TEST(CovMatrixApi, LabelsAndBlocks) {
  const CovMatrix c = build_joint_covariance({0.2, -0.3, 0.1, 0.4}, 0.3, kRef);
  EXPECT_EQ(c.size(), 6u);
  EXPECT_TRUE(c.contains(Var::Y1));
  EXPECT_FALSE(c.contains(Var::U2));
  EXPECT_THROW(c.index_of(Var::U2), std::out_of_range);
  const std::array<Var, 2> order{Var::Y1, Var::X0};
  const CovMatrix s = c.sub(order);
  EXPECT_EQ(s.labels()[0], Var::Y1);
  EXPECT_DOUBLE_EQ(s(Var::Y1, Var::X0), c(Var::X0, Var::Y1));
  EXPECT_TRUE(c.is_psd());
}

TEST(LogDet, RegularizationPolicy) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(3, 3);
  EXPECT_NEAR(regularized_logdet(m), 0.0, 1e-15);
  EXPECT_EQ(regularized_logdet(Eigen::MatrixXd(0, 0)), 0.0);
  // rank deficient: shifted by 1e-12 tr, finite result
  Eigen::MatrixXd singular(2, 2);
  singular << 1.0, 1.0, 1.0, 1.0;
  const double ld = regularized_logdet(singular);
  EXPECT_TRUE(std::isfinite(ld));
  EXPECT_NEAR(ld, std::log(2.0) + std::log(2e-12), 1e-3);
  Eigen::MatrixXd indefinite(2, 2);
  indefinite << 1.0, 0.0, 0.0, -0.1;
  EXPECT_THROW(regularized_logdet(indefinite), SingularCovariance);
}

TEST(MutualInformation, AwgnIdentity) {
  const CovMatrix c = build_joint_covariance({0, 0, 0, 0}, 0.0, kRef);
  EXPECT_NEAR(gaussian_mi(c, {Var::X0}, {Var::Y1}), 0.5 * std::log(9.0), 1e-12);
}

TEST(MutualInformation, IndependentBlocksGiveZero) {
  const CovMatrix c = build_joint_covariance({0, 0, 0, 0}, 0.3, kRef);
  EXPECT_NEAR(gaussian_mi(c, {Var::W1}, {Var::X0, Var::U1}), 0.0, 1e-15);
  EXPECT_NEAR(conditional_mi(c, {Var::W2}, {Var::X0}, {}), 0.0, 1e-15);
  EXPECT_NEAR(conditional_mi(c, {Var::W2}, {Var::X0}, {Var::W1, Var::Y1}), 0.0, 1e-15);
}

TEST(MutualInformation, SymmetricAndNonnegative) {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 200; ++i) {
    const auto d = sampler::model(rng);
    const auto pt = sampler::case2_point(rng, d.power, d.params.source_var, d.params.noise_var);
    const CovMatrix c = build_joint_covariance(pt, d.power, d.params);
    const double ab = gaussian_mi(c, {Var::W1, Var::W2}, {Var::Y1, Var::X0});
    const double ba = gaussian_mi(c, {Var::Y1, Var::X0}, {Var::W1, Var::W2});
    EXPECT_LE(std::abs(ab - ba), 1e-12);
    EXPECT_GE(ab, 0.0);
  }
}

TEST(MutualInformation, ArgumentChecks) {
  const CovMatrix c = build_joint_covariance({0, 0, 0, 0}, 0.3, kRef);
  EXPECT_THROW(gaussian_mi(c, {Var::X0}, {Var::X0}), std::invalid_argument);
  EXPECT_THROW(gaussian_mi(c, {}, {Var::X0}), std::invalid_argument);
  EXPECT_THROW(conditional_mi(c, {Var::X0}, {Var::W1}, {Var::W1}), std::invalid_argument);
}

TEST(MutualInformation, ChainRuleIdentity) {
  std::mt19937_64 rng(14);
  for (int i = 0; i < 300; ++i) {
    const auto d = sampler::model(rng);
    const auto pt = sampler::case2_point(rng, d.power, d.params.source_var, d.params.noise_var);
    const CovMatrix c = build_joint_covariance(pt, d.power, d.params);
    const double lhs = gaussian_mi(c, {Var::W1, Var::W2}, {Var::Y1}) -
                       conditional_mi(c, {Var::W2}, {Var::X0}, {Var::W1});
    const double rhs = gaussian_mi(c, {Var::W1}, {Var::Y1}) -
                       conditional_mi(c, {Var::W2}, {Var::X0}, {Var::W1, Var::Y1});
    EXPECT_NEAR(lhs, rhs, 1e-9);
    EXPECT_NEAR(conditional_mi(c, {Var::W2}, {Var::Y1}, {Var::X0, Var::W1}), 0.0, 1e-9);
  }
}

// The structural chains of the Gaussian scheme. Deterministic components
// (X1 given X0, U1; U2 given W1, W2, Y1) make the log-det form ill-posed, so
// those are checked through the conditional cross-covariance instead.
TEST(MutualInformation, StructuralMarkovChains) {
  std::mt19937_64 rng(15);
  for (int i = 0; i < 200; ++i) {
    const auto d = sampler::model(rng);
    const auto pt = sampler::case2_point(rng, d.power, d.params.source_var, d.params.noise_var);
    const CovMatrix c = build_joint_covariance(pt, d.power, d.params);

    EXPECT_NEAR(c(Var::X0, Var::W1), 0.0, 0.0);
    EXPECT_NEAR(conditional_mi(c, {Var::U1}, {Var::W2}, {Var::X0, Var::W1}), 0.0, 1e-9);
    EXPECT_NEAR(conditional_mi(c, {Var::Y1}, {Var::W1, Var::W2}, {Var::X0, Var::U1}), 0.0, 1e-9);
    EXPECT_LT(oracle::conditional_cross_cov(c, {Var::X1, Var::Y1}, {Var::W1, Var::W2},
                                            {Var::X0, Var::U1})
                  .cwiseAbs()
                  .maxCoeff(),
              1e-9);

    // U2 = MMSE estimate of X1 from (W1, W2, Y1)
    const std::array<Var, 3> view{Var::W1, Var::W2, Var::Y1};
    const Eigen::VectorXd coef = mmse_coefficients(c, Var::X1, view);
    Eigen::MatrixXd ext(7, 7);
    ext.topLeftCorner(6, 6) = c.entries();
    std::vector<Var> labels = c.labels();
    labels.push_back(Var::U2);
    for (int j = 0; j < 6; ++j) {
      double s = 0.0;
      for (int k = 0; k < 3; ++k) s += coef[k] * c(view[k], labels[j]);
      ext(6, j) = ext(j, 6) = s;
    }
    double vu = 0.0;
    for (int k = 0; k < 3; ++k)
      for (int l = 0; l < 3; ++l) vu += coef[k] * coef[l] * c(view[k], view[l]);
    ext(6, 6) = vu;
    const CovMatrix full(labels, ext);
    EXPECT_LT(oracle::conditional_cross_cov(full, {Var::U2}, {Var::X0, Var::U1, Var::X1},
                                            {Var::W1, Var::W2, Var::Y1})
                  .cwiseAbs()
                  .maxCoeff(),
              1e-9);
  }
}

TEST(Schur, ScalarCases) {
  const CovMatrix c = build_joint_covariance({0, 0, 0, 0}, 0.3, kRef);
  EXPECT_NEAR(schur_mmse(c, Var::X1, {}), 1.1, 1e-15);
  EXPECT_NEAR(schur_mmse(c, Var::X1, {Var::Y1}), 1.1 * 0.1 / 1.2, 1e-14);
  EXPECT_NEAR(schur_mmse(c, Var::X1, {Var::W1, Var::W2, Var::Y1}), 1.1 * 0.1 / 1.2, 1e-14);
  EXPECT_THROW(schur_mmse(c, Var::X1, {Var::X1}), std::invalid_argument);
}

TEST(Schur, CoefficientsReproduceMmse) {
  const CovMatrix c = build_joint_covariance({0.3, -0.6, 0.2, 0.5}, 0.3, kRef);
  const std::array<Var, 3> view{Var::W1, Var::W2, Var::Y1};
  const Eigen::VectorXd a = mmse_coefficients(c, Var::X1, view);
  const Eigen::MatrixXd s = c.block(view);
  Eigen::Vector3d cx;
  for (int k = 0; k < 3; ++k) cx[k] = c(Var::X1, view[k]);
  const double mse = c(Var::X1, Var::X1) - 2.0 * a.dot(cx) + a.dot(s * a);
  EXPECT_NEAR(mse, schur_mmse(c, Var::X1, view), 1e-13);
}

TEST(MarkovTriple, Examples) {
  const CovMatrix m = markov_triple_covariance(1, 1, 1, 0.5, 0.6);
  EXPECT_NEAR(m(Var::X, Var::Z), 0.30, 1e-15);
  const CovMatrix z = markov_triple_covariance(2, 3, 4, 0.0, 0.7);
  EXPECT_EQ(z(Var::X, Var::Z), 0.0);
  EXPECT_THROW(markov_triple_covariance(0, 1, 1, 0, 0), InvalidParams);
  EXPECT_THROW(markov_triple_covariance(1, 1, 1, 2, 0), InvalidPoint);
}

TEST(MarkovTriple, RandomizedProperties) {
  std::mt19937_64 rng(16);
  std::uniform_real_distribution<double> var(0.05, 5.0), corr(-0.99, 0.99);
  for (int i = 0; i < 1000; ++i) {
    const double vx = var(rng), vy = var(rng), vz = var(rng);
    const double r1 = corr(rng), r3 = corr(rng);
    const CovMatrix m = markov_triple_covariance(vx, vy, vz, r1, r3);
    EXPECT_LE(rel(m(Var::X, Var::Z), r1 * r3 * std::sqrt(vx * vz)), 1e-15);
    EXPECT_NEAR(conditional_mi(m, {Var::X}, {Var::Z}, {Var::Y}), 0.0, 1e-9);
    const std::array<Var, 2> xy{Var::X, Var::Y}, yz{Var::Y, Var::Z};
    const double resid = m.block(xy).determinant() * m.block(yz).determinant() -
                         vy * m.entries().determinant();
    EXPECT_NEAR(resid, 0.0, 1e-9);
  }
}

TEST(Units, NatsToBits) { EXPECT_NEAR(nats_to_bits(std::log(2.0)), 1.0, 1e-15); }
