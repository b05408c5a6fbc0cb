#include "glmcomb/combiners.hpp"

#include <algorithm>
#include <cmath>

#include "glmcomb/error.hpp"
#include "glmcomb/rng.hpp"

namespace glmcomb {

namespace {

constexpr double kSingular = 1e-10;

double one_coordinate(const SignalPrior& prior, double rho, double x) {
  if (prior.kind == PriorKind::gaussian_sphere) return rho * x;
  const double half_logit = 0.5 * std::log(prior.p / (1.0 - prior.p));
  const double v = 1.0 - rho * rho;
  if (v <= 1e-14) return rho * x > 0 ? 1.0 : (rho * x < 0 ? -1.0 : std::tanh(half_logit));
  return std::tanh(half_logit + rho * x / v);
}

}  // namespace

Eigen::Matrix2d noise_covariance(const JointParams& p) {
  Eigen::Matrix2d s;
  s << 1.0 - p.rho_l * p.rho_l, p.q - p.rho_l * p.rho_s, p.q - p.rho_l * p.rho_s,
      1.0 - p.rho_s * p.rho_s;
  return s;
}

double bayes_combiner(const SignalPrior& prior, const JointParams& p, double xl, double xs) {
  if (p.rho_l == 0.0 && p.rho_s == 0.0) return prior.mean();
  if (p.rho_l == 0.0) return one_coordinate(prior, p.rho_s, xs);
  if (p.rho_s == 0.0) return one_coordinate(prior, p.rho_l, xl);

  const Eigen::Matrix2d S = noise_covariance(p);
  const double det = S.determinant();
  if (det <= kSingular) {
    return std::abs(p.rho_l) >= std::abs(p.rho_s) ? one_coordinate(prior, p.rho_l, xl)
                                                  : one_coordinate(prior, p.rho_s, xs);
  }
  if (prior.kind == PriorKind::gaussian_sphere) {
    // X ~ N(0,1): (X_L, X_s) has covariance [[1, q], [q, 1]].
    return ((p.rho_l - p.q * p.rho_s) * xl + (p.rho_s - p.q * p.rho_l) * xs) / (1.0 - p.q * p.q);
  }
  // Posterior log-odds of X = +1 is logit(p) + 2 rho' S^{-1} x.
  const double a = (S(1, 1) * p.rho_l - S(0, 1) * p.rho_s) / det;
  const double b = (S(0, 0) * p.rho_s - S(0, 1) * p.rho_l) / det;
  return std::tanh(0.5 * std::log(prior.p / (1.0 - prior.p)) + a * xl + b * xs);
}

MonteCarloEstimate rho_star_bayes(const SignalPrior& prior, const JointParams& p,
                                  long long samples, std::uint64_t seed) {
  prior.validate();
  if (samples < 2) throw DomainError("rho_star_bayes needs at least two samples");
  const Eigen::Matrix2d S = noise_covariance(p);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(S);
  if (es.eigenvalues().minCoeff() < -kSingular) {
    throw DomainError("noise covariance is not positive semidefinite");
  }
  // symmetric square root tolerates the singular case
  const Eigen::Vector2d ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  const Eigen::Matrix2d R = es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();

  constexpr long long kBlock = 65536;
  double sa = 0, sb = 0, saa = 0, sbb = 0, sab = 0;
  for (long long start = 0, blk = 0; start < samples; start += kBlock, ++blk) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(blk)));
    const long long stop = std::min(samples, start + kBlock);
    for (long long i = start; i < stop; ++i) {
      double x;
      if (prior.kind == PriorKind::binary) {
        x = rng.uniform() < prior.p ? 1.0 : -1.0;
      } else {
        x = rng.normal();
      }
      const Eigen::Vector2d e(rng.normal(), rng.normal());
      const Eigen::Vector2d w = R * e;
      const double f = bayes_combiner(prior, p, p.rho_l * x + w(0), p.rho_s * x + w(1));
      const double a = x * f, b = f * f;
      sa += a;
      sb += b;
      saa += a * a;
      sbb += b * b;
      sab += a * b;
    }
  }
  const double N = static_cast<double>(samples);
  const double ma = sa / N, mb = sb / N;
  MonteCarloEstimate out;
  out.samples = samples;
  if (mb <= 0.0) return out;  // constant zero estimator
  out.value = std::abs(ma) / std::sqrt(mb);
  // delta method on |A| / sqrt(B)
  const double vaa = saa / N - ma * ma, vbb = sbb / N - mb * mb, vab = sab / N - ma * mb;
  const double ga = (ma >= 0 ? 1.0 : -1.0) / std::sqrt(mb);
  const double gb = -0.5 * std::abs(ma) / (mb * std::sqrt(mb));
  const double var = ga * ga * vaa + gb * gb * vbb + 2.0 * ga * gb * vab;
  out.std_error = std::sqrt(std::max(var, 0.0) / N);
  return out;
}

}  // namespace glmcomb
