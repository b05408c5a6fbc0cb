#pragma once

#include <cstdint>

#include <Eigen/Dense>

#include "glmcomb/channels.hpp"

namespace glmcomb {

/// Parameters of the limiting scalar model X_L = rho_l X + W_L, X_s = rho_s X + W_s.
struct JointParams {
  double rho_l = 0.0;
  double rho_s = 0.0;
  double q = 0.0;
};

/// Covariance of (W_L, W_s).
Eigen::Matrix2d noise_covariance(const JointParams& p);

/// Conditional mean E[X | X_L = xl, X_s = xs]. Coordinates with zero
/// correlation are dropped; a singular noise covariance falls back to the
/// more informative coordinate.
double bayes_combiner(const SignalPrior& prior, const JointParams& p, double xl, double xs);

struct MonteCarloEstimate {
  double value = 0.0;
  double std_error = 0.0;
  long long samples = 0;
};

/// |E{X F*}| / sqrt(E{F*^2}) by scalar Monte Carlo. The sample is split into
/// fixed blocks with derived seeds, so the result depends only on (samples, seed).
MonteCarloEstimate rho_star_bayes(const SignalPrior& prior, const JointParams& p,
                                  long long samples = 1'000'000, std::uint64_t seed = 1);

}  // namespace glmcomb
