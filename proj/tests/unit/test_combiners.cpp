#include <cmath>

#include <gtest/gtest.h>

#include "glmcomb/asymptotics.hpp"
#include "glmcomb/combiners.hpp"

using namespace glmcomb;

namespace {

// Posterior mean over x in {+1, -1} from the bivariate Gaussian likelihood.
double binary_oracle(double p, const JointParams& jp, double xl, double xs) {
  const Eigen::Matrix2d S = noise_covariance(jp);
  const Eigen::Matrix2d Si = S.inverse();
  auto lik = [&](double x) {
    Eigen::Vector2d r(xl - jp.rho_l * x, xs - jp.rho_s * x);
    return std::exp(-0.5 * r.dot(Si * r));
  };
  const double a = p * lik(1.0), b = (1 - p) * lik(-1.0);
  return (a - b) / (a + b);
}

}  // namespace

TEST(Combiner, GaussianPriorIsLinear) {
  const JointParams jp{0.4, 0.7, 0.35};
  const Eigen::Matrix2d S = noise_covariance(jp);
  // E[X | obs] = rho^T (rho rho^T + S)^{-1} obs for X ~ N(0,1)
  const Eigen::Vector2d rho(jp.rho_l, jp.rho_s);
  const Eigen::Matrix2d C = rho * rho.transpose() + S;
  for (auto [xl, xs] : {std::pair{0.3, -1.2}, {2.0, 0.5}, {-0.7, -0.1}}) {
    const double oracle = rho.dot(C.ldlt().solve(Eigen::Vector2d(xl, xs)));
    EXPECT_NEAR(bayes_combiner(SignalPrior::gaussian_sphere(), jp, xl, xs), oracle, 1e-12);
  }
}

TEST(Combiner, NoiseCovarianceMatchesJointModel) {
  const JointParams jp{0.4, 0.7, 0.35};
  const Eigen::Matrix2d S = noise_covariance(jp);
  EXPECT_NEAR(S(0, 0), 1 - 0.16, 1e-15);
  EXPECT_NEAR(S(1, 1), 1 - 0.49, 1e-15);
  EXPECT_NEAR(S(0, 1), 0.35 - 0.28, 1e-15);
}

TEST(Combiner, BinaryPriorAgainstPosteriorOracle) {
  const JointParams jp{0.35, 0.6, 0.3};
  for (double p : {0.1, 0.3, 0.5}) {
    for (auto [xl, xs] : {std::pair{0.3, -1.2}, {2.0, 0.5}, {-0.7, -0.1}}) {
      EXPECT_NEAR(bayes_combiner(SignalPrior::binary(p), jp, xl, xs),
                  binary_oracle(p, jp, xl, xs), 1e-12);
    }
  }
}

TEST(Combiner, BinaryPriorWithoutSpectralCoordinate) {
  const JointParams jp{0.3, 0.0, 0.0};
  const double p = 0.3, xl = 0.8;
  const double expect =
      std::tanh(0.5 * std::log(p / (1 - p)) + 0.3 * xl / (1 - 0.09));
  EXPECT_NEAR(bayes_combiner(SignalPrior::binary(p), jp, xl, 123.0), expect, 1e-13);
}

TEST(Combiner, NoInformationGivesPriorMean) {
  EXPECT_DOUBLE_EQ(bayes_combiner(SignalPrior::binary(0.3), {0, 0, 0}, 1.0, 2.0), -0.4);
}

TEST(RhoStarBayes, GaussianPriorMatchesLinearOptimum) {
  const JointParams jp{0.42, 0.81, 0.45};
  const auto mc = rho_star_bayes(SignalPrior::gaussian_sphere(), jp, 400000, 5);
  const double f = optimal_theta(jp.rho_l, jp.rho_s, jp.q).f_theta_star;
  EXPECT_LE(std::abs(mc.value - f), 3.0 * mc.std_error);
}

TEST(RhoStarBayes, DeterministicInSeed) {
  const JointParams jp{0.3, 0.5, 0.2};
  const auto a = rho_star_bayes(SignalPrior::binary(0.3), jp, 100000, 7);
  const auto b = rho_star_bayes(SignalPrior::binary(0.3), jp, 100000, 7);
  EXPECT_EQ(a.value, b.value);
  EXPECT_EQ(a.samples, 100000);
}

TEST(RhoStarBayes, BinaryBeatsLinearWhenSpectralIsUseless) {
  const JointParams jp{0.12, 0.0, 0.0};
  const auto mc = rho_star_bayes(SignalPrior::binary(0.3), jp, 200000, 3);
  EXPECT_GT(mc.value, 0.12 + 0.1);
}
