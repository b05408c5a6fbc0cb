#include <cmath>

#include <gtest/gtest.h>

#include "glmcomb/error.hpp"
#include "glmcomb/estimators.hpp"
#include "glmcomb/rng.hpp"

using namespace glmcomb;

namespace {

Instance small_instance(int d, double delta, std::uint64_t seed) {
  return sample_instance(SignalPrior::gaussian_sphere(),
                         make_channel("0.3x+x^2", std::sqrt(0.2)), d, delta, seed);
}

}  // namespace

TEST(Linear, MatchesExplicitSum) {
  const Instance inst = small_instance(40, 3.0, 1);
  const Eigen::VectorXd xl = linear_estimate(inst, identity_preprocessor());
  for (Eigen::Index j = 0; j < inst.d(); ++j) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < inst.n(); ++i) s += inst.A(i, j) * inst.y(i);
    EXPECT_NEAR(xl(j), std::sqrt(40.0) / inst.n() * s, 1e-12);
  }
}

TEST(Spectral, MatchesDenseEigensolver) {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Instance inst = small_instance(30, 4.0, seed);
    const Eigen::VectorXd z = apply_preprocessor(clip_preprocessor(3.5), inst.y);
    SpectralOptions so;
    so.start_seed = seed;
    so.max_iter = 100000;
    const auto rep = spectral_estimate(inst.A, z, so);
    ASSERT_TRUE(rep.converged);
    const Eigen::MatrixXd D = inst.A.transpose() * z.asDiagonal() * inst.A;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D);
    EXPECT_NEAR(rep.eigval1, es.eigenvalues()(29), 1e-9);
    EXPECT_GT(std::abs(rep.eigvec.dot(es.eigenvectors().col(29))), 1 - 1e-9);
    EXPECT_NEAR(rep.eigvec.norm(), 1.0, 1e-14);
  }
}

TEST(Spectral, SecondEigenvalue) {
  const Instance inst = small_instance(25, 4.0, 3);
  const Eigen::VectorXd z = apply_preprocessor(clip_preprocessor(3.5), inst.y);
  SpectralOptions so;
  so.second_eigenvalue = true;
  so.max_iter = 200000;
  const auto rep = spectral_estimate(inst.A, z, so);
  const Eigen::MatrixXd D = inst.A.transpose() * z.asDiagonal() * inst.A;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D, Eigen::EigenvaluesOnly);
  ASSERT_TRUE(rep.eigval2.has_value());
  EXPECT_NEAR(*rep.eigval2, es.eigenvalues()(23), 1e-6);
}

TEST(Spectral, NonConvergenceIsReported) {
  const Instance inst = small_instance(200, 2.0, 5);
  const auto rep = spectral_estimate(inst, clip_preprocessor(3.5), 1e-14, 3);
  EXPECT_FALSE(rep.converged);
  EXPECT_EQ(rep.iterations, 3);
}

TEST(Spectral, DeterministicForSeed) {
  const Instance inst = small_instance(60, 3.0, 8);
  const auto a = spectral_estimate(inst, clip_preprocessor(3.5));
  const auto b = spectral_estimate(inst, clip_preprocessor(3.5));
  EXPECT_EQ(a.eigvec, b.eigvec);
}

TEST(Combine, SignResolutionAndEndpoints) {
  Eigen::VectorXd xl(3), xs(3);
  xl << 1, 2, 0;
  xs << -1, 0, 0;
  EXPECT_GT(xl.dot(resolve_sign(xl, xs, 0.4)), 0.0);
  EXPECT_LT(xl.dot(resolve_sign(xl, xs, -0.4)), 0.0);
  EXPECT_EQ(resolve_sign(xl, xs, 0.0), xs);
  EXPECT_TRUE(combine_linear(xl, xs, kInf).isApprox(xl / xl.norm()));
  EXPECT_TRUE(combine_linear(xl, xs, -kInf).isApprox(-xl / xl.norm()));
  EXPECT_EQ(combine_linear(xl, xs, 0.0), xs);
  EXPECT_TRUE(combine_linear(xl, xs, 2.0).isApprox(2.0 * xl / xl.norm() + xs));
}

TEST(Correlation, ScaleInvariantAndBounded) {
  Eigen::VectorXd a(3), b(3);
  a << 1, 2, 3;
  b << -2, -4, -6;
  EXPECT_DOUBLE_EQ(normalized_correlation(a, b), 1.0);
  EXPECT_THROW(normalized_correlation(a, Eigen::VectorXd::Zero(3)), DomainError);
}
