#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "glmcomb/channels.hpp"
#include "glmcomb/combiners.hpp"
#include "glmcomb/preprocessor.hpp"
#include "glmcomb/quadrature.hpp"

namespace glmcomb {

struct LinearPrediction {
  double rho_l = 0.0;  // signed
  double n_l = 0.0;
  double e_gz = 0.0;   // E{G Z_L}
  double e_z2 = 0.0;   // E{Z_L^2}
};

LinearPrediction rho_linear(const Channel& channel, const Preprocessor& t_l, double delta,
                            int order = kDefaultOrder);

struct SpectralFixedPoint {
  double delta = 0.0;
  double tau = 0.0;
  double bar_lambda = 0.0;
  double lambda_star = 0.0;
  double psi_prime_at_star = 0.0;
  double phi_prime_at_star = 0.0;
  double zeta_at_star = 0.0;  // psi(max(lambda*, bar_lambda))
  double zeta_at_bar = 0.0;   // psi(bar_lambda)
  double residual = 0.0;      // zeta(lambda*) - phi(lambda*)
  bool above_threshold = false;
};

/// psi, phi and their derivatives for Z_s = T_s(Y) on a fixed quadrature rule.
class SpectralFunctions {
 public:
  SpectralFunctions(const Channel& channel, const Preprocessor& t_s, double delta,
                    int order = kDefaultOrder);

  double tau() const { return tau_; }
  double delta() const { return delta_; }
  double psi(double lambda) const;
  double phi(double lambda) const;
  double psi_prime(double lambda) const;
  double phi_prime(double lambda) const;

 private:
  void check(double lambda) const;
  std::vector<double> z_, g2_, w_;
  double tau_ = 0.0;
  double delta_ = 0.0;
};

/// Throws DomainError on an infinite support bound or Z_s = 0 a.s., and
/// NumericalError when no sign change of zeta - phi is found below tau * 1e6.
SpectralFixedPoint spectral_fixed_point(const Channel& channel, const Preprocessor& t_s,
                                        double delta, int order = kDefaultOrder);

double rho_spectral(const SpectralFixedPoint& fp);

struct CrossCorrelation {
  double q = 0.0;          // defining form
  double q_compact = 0.0;  // rho_L rho_s E{Z_L G / (1 - Z_s/lambda*)} / E{Z_L G}
};

/// Throws when the two forms disagree by more than 1e-8 or E{Z_L G} = 0.
CrossCorrelation cross_correlation_q(const Channel& channel, const Preprocessor& t_l,
                                     const Preprocessor& t_s, double delta,
                                     const SpectralFixedPoint& fp, int order = kDefaultOrder);

struct ThetaOptimum {
  double theta_star = 0.0;  // may be +-inf
  double f_theta_star = 0.0;
};

/// Requires |q| < 1.
ThetaOptimum optimal_theta(double rho_l, double rho_s, double q);
/// (theta rho_l + rho_s) / sqrt(1 + theta^2 + 2 theta q); +-rho_l at theta = +-inf.
double f_theta(double rho_l, double rho_s, double q, double theta);

struct EigenvalueLimits {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};

EigenvalueLimits predicted_eigenvalues(const SpectralFixedPoint& fp);

struct AsymptoticPrediction {
  double delta = 0.0;
  double rho_l = 0.0;
  double n_l = 0.0;
  double rho_s = 0.0;
  double q = 0.0;
  double theta_star = 0.0;
  double f_theta_star = 0.0;
  std::optional<double> rho_star_bayes;
  std::optional<double> rho_star_bayes_se;
  double lambda1_dn = 0.0;
  double lambda2_dn = 0.0;
  double rho_max = 0.0;
  double p = 0.0;  // ratio of the weaker to the stronger correlation
  SpectralFixedPoint fixed_point;
  bool below_threshold() const { return !fixed_point.above_threshold; }
};

struct PredictOptions {
  int order = kDefaultOrder;
  long long bayes_samples = 0;  // 0 skips the Monte Carlo for rho*
  std::uint64_t bayes_seed = 1;
};

AsymptoticPrediction predict(const SignalPrior& prior, const Channel& channel,
                             const Preprocessor& t_l, const Preprocessor& t_s, double delta,
                             const PredictOptions& opts = {});

}  // namespace glmcomb
