#pragma once

#include <functional>
#include <string>
#include <vector>

#include "glmcomb/channels.hpp"
#include "glmcomb/preprocessor.hpp"

namespace glmcomb {

/// Quadrature over the output variable: sum_k weight[k] F(y[k], mu(y[k]))
/// approximates the integral of F over y.
struct DensityTable {
  std::vector<double> y;
  std::vector<double> weight;
  std::vector<double> mu0, mu1, mu2;
  double y_min = 0.0;
  double y_max = 0.0;
  double mass_defect = 0.0;  // |1 - integral of mu0|

  double integrate(const std::function<double(double y, double m0, double m1, double m2)>& f) const;
};

/// Continuous noisy channels use composite Gauss-Legendre on the truncated
/// range [min f - 8 sigma, max f + 8 sigma] (f over |g| <= 8), split at `y_kinks`.
/// Noiseless channels integrate over G; discrete channels sum over outcomes.
DensityTable density_table(const Channel& channel, const std::vector<double>& y_kinks = {});

inline constexpr int kTabulationPoints = 4096;

Preprocessor optimal_tl(const Channel& channel);
double rho_l_star(const Channel& channel, double delta);

Preprocessor optimal_ts(const Channel& channel);

struct SpectralOptimum {
  double rho = 0.0;
  double beta_delta = 0.0;  // +inf at delta = delta*
  double residual = 0.0;    // h(beta) - 1/delta
};

SpectralOptimum rho_s_star(const Channel& channel, double delta);

struct DeltaStar {
  double value = 0.0;
  bool infinite = false;
};

DeltaStar delta_star(const Channel& channel);

/// h(t) = integral of (mu2 - mu0)^2 / (mu0 + mu2 / t)
double h_function(const DensityTable& table, double t);

enum class Winner { linear, spectral, tie };
std::string to_string(Winner w);

struct PreprocOptResult {
  double rho_l_star = 0.0;
  double rho_s_star = 0.0;
  double beta_delta = 0.0;
  double gamma_delta = 0.0;
  double delta_star = 0.0;
  bool delta_star_infinite = false;
  Winner winner = Winner::tie;
};

PreprocOptResult linear_vs_spectral(const Channel& channel, double delta);

struct CombinedObjective {
  double f2 = 0.0;        // F^2(theta*) from the output-integral form
  double f2_direct = 0.0; // same quantity from the asymptotics path
  double s = 0.0;
  double a = 0.0;
  double b = 0.0;
};

/// Throws NumericalError when the two evaluations differ by more than 1e-6.
CombinedObjective combined_objective(const Channel& channel, const Preprocessor& t_l,
                                     const Preprocessor& t_s, double delta);

}  // namespace glmcomb
