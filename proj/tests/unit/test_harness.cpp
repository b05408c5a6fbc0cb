#include <cmath>

#include <gtest/gtest.h>

#include "glmcomb/error.hpp"
#include "glmcomb/harness.hpp"

using namespace glmcomb;

namespace {

ExperimentConfig small_config() {
  ExperimentConfig c;
  c.d = 50;
  c.delta_grid = {3.0, 6.0};
  c.replicates = 2;
  c.bayes_samples = 20000;
  c.estimators = {"linear", "spectral", "combined_linear", "combined_bayes"};
  return c;
}

}  // namespace

TEST(Sweep, ProducesEveryRecord) {
  const ExperimentResult r = run_sweep(small_config());
  EXPECT_EQ(r.records.size(), 2u * 2u * 4u);
  ASSERT_EQ(r.summaries.size(), 2u);
  for (const auto& s : r.summaries) {
    EXPECT_EQ(s.failures, 0);
    EXPECT_EQ(s.stats.size(), 4u);
    EXPECT_NEAR(s.delta_n, s.delta, 1.0 / 50);
    for (const auto& st : s.stats) EXPECT_EQ(st.count, 2);
  }
  for (const auto& rec : r.records) {
    EXPECT_GE(rec.correlation, 0.0);
    EXPECT_LE(rec.correlation, 1.0);
  }
}

TEST(Sweep, IndependentOfWorkerCount) {
  ExperimentConfig c = small_config();
  c.gd_steps = 3;
  c.gd_normalize = true;
  const ExperimentResult a = run_sweep(c, 1);
  const ExperimentResult b = run_sweep(c, 3);
  ASSERT_EQ(a.records.size(), b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    EXPECT_EQ(a.records[i].estimator, b.records[i].estimator);
    EXPECT_EQ(a.records[i].replicate, b.records[i].replicate);
    EXPECT_EQ(a.records[i].correlation, b.records[i].correlation);
    EXPECT_EQ(a.records[i].norm, b.records[i].norm);
  }
  ASSERT_EQ(a.gd.size(), b.gd.size());
  for (std::size_t i = 0; i < a.gd.size(); ++i) {
    EXPECT_EQ(a.gd[i].init, b.gd[i].init);
    EXPECT_EQ(a.gd[i].correlation, b.gd[i].correlation);
  }
}

TEST(Sweep, GdTracesCarryInitialization) {
  ExperimentConfig c = small_config();
  c.estimators = {"linear", "spectral"};
  c.gd_steps = 2;
  c.gd_normalize = true;
  const ExperimentResult r = run_sweep(c);
  ASSERT_EQ(r.gd.size(), 2u * 2u * 2u);
  for (const auto& g : r.gd) {
    EXPECT_TRUE(g.init == "linear" || g.init == "spectral");
    EXPECT_EQ(g.correlation.size(), 3u);
  }
}

TEST(GradientDescent, StationaryAtTruthWithoutNoise) {
  const Channel ch = make_channel("x", 0.0);
  const Instance inst = sample_instance(SignalPrior::gaussian_sphere(), ch, 40, 4.0, 3);
  const GdTrace tr = gd_refine(inst, ch, inst.x, 10, 0.5, true);
  ASSERT_FALSE(tr.diverged);
  for (double c : tr.correlation) EXPECT_NEAR(c, 1.0, 1e-12);
}

TEST(GradientDescent, ConvergesToLeastSquaresOnLinearChannel) {
  const int d = 20;
  const Channel ch = make_channel("x", std::sqrt(0.1));
  const Instance inst = sample_instance(SignalPrior::gaussian_sphere(), ch, d, 5.0, 4);
  const Eigen::VectorXd ls = inst.A.colPivHouseholderQr().solve(inst.y);
  const double target = std::abs(ls.dot(inst.x)) / (ls.norm() * inst.x.norm());
  const GdTrace tr = gd_refine(inst, ch, Eigen::VectorXd::Ones(d), 4000, 0.5, true);
  ASSERT_FALSE(tr.diverged);
  EXPECT_GT(tr.correlation.back(), tr.correlation.front());
  EXPECT_NEAR(tr.correlation.back(), target, 1e-8);
}

TEST(GradientDescent, RejectsZeroStart) {
  const Channel ch = make_channel("x", 0.1);
  const Instance inst = sample_instance(SignalPrior::gaussian_sphere(), ch, 10, 2.0, 1);
  EXPECT_THROW(gd_refine(inst, ch, Eigen::VectorXd::Zero(10), 3, 0.5, true), DomainError);
}

TEST(PercentageGain, TrivialCasesAndErrors) {
  AsymptoticPrediction p;
  p.rho_l = 0.4;
  p.rho_s = 0.8;
  p.f_theta_star = 0.8;
  EXPECT_DOUBLE_EQ(percentage_gain(p), 0.0);
  p.f_theta_star = 1.0;
  EXPECT_DOUBLE_EQ(percentage_gain(p), 25.0);
  p.rho_star_bayes = 0.88;
  EXPECT_NEAR(percentage_gain(p, true), 10.0, 1e-12);
  p.rho_l = 0.0;
  p.rho_s = 0.0;
  EXPECT_THROW(percentage_gain(p), DomainError);
}
