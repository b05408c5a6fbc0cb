#pragma once

#include <cstdint>
#include <optional>

#include <Eigen/Dense>

#include "glmcomb/channels.hpp"
#include "glmcomb/combiners.hpp"
#include "glmcomb/preprocessor.hpp"

namespace glmcomb {

Eigen::VectorXd apply_preprocessor(const Preprocessor& t, const Eigen::VectorXd& y);

/// (sqrt(d)/n) A^T T_L(y)
Eigen::VectorXd linear_estimate(const Instance& inst, const Preprocessor& t_l);

struct SpectralSolveReport {
  Eigen::VectorXd eigvec;  // unit norm
  double eigval1 = 0.0;
  std::optional<double> eigval2;
  int iterations = 0;
  double residual = 0.0;  // ||D v - lambda v|| / max(1, |lambda|)
  double shift = 0.0;
  int restarts = 0;
  bool converged = false;
};

struct SpectralOptions {
  double tol = 1e-10;
  int max_iter = 5000;
  bool second_eigenvalue = false;
  std::uint64_t start_seed = 0;
};

/// Shifted power iteration on v -> A^T (z .* (A v)) + s v, s = max(0, -min z).
/// Non-convergence is reported through `converged`, never hidden.
SpectralSolveReport spectral_estimate(const Eigen::MatrixXd& A, const Eigen::VectorXd& z,
                                      const SpectralOptions& opts = {});
SpectralSolveReport spectral_estimate(const Instance& inst, const Preprocessor& t_s,
                                      double tol = 1e-10, int max_iter = 5000,
                                      bool second_eigenvalue = false);

/// Flip x_s so that <x_l, x_s> has the sign of q; unchanged when q = 0.
Eigen::VectorXd resolve_sign(const Eigen::VectorXd& x_l, const Eigen::VectorXd& x_s,
                             double q_predicted);

/// theta x_l/||x_l|| + x_s, or +-x_l/||x_l|| for theta = +-inf.
Eigen::VectorXd combine_linear(const Eigen::VectorXd& x_l, const Eigen::VectorXd& x_s,
                               double theta);

/// Componentwise conditional mean on the rescaled coordinates
/// x^L = sqrt(d) x_l/n_L and x^s = sqrt(d) x_s.
Eigen::VectorXd combine_bayes(const Eigen::VectorXd& x_l_scaled,
                              const Eigen::VectorXd& x_s_scaled, const SignalPrior& prior,
                              const JointParams& params);

/// |<a, b>| / (||a|| ||b||)
double normalized_correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

}  // namespace glmcomb
