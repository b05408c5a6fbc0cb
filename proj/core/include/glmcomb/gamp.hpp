#pragma once

#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "glmcomb/channels.hpp"
#include "glmcomb/preprocessor.hpp"
#include "glmcomb/quadrature.hpp"

namespace glmcomb {

/// Moments of the auxiliary variable Z = T(Y) entering the recursion.
struct SeMoments {
  double e_z = 0.0;       // E{Z}
  double e_zg2 = 0.0;     // E{Z G^2}
  double e_z2 = 0.0;      // E{Z^2}
  double e_z2g2 = 0.0;    // E{Z^2 G^2}
  double e_tlg = 0.0;     // E{T_L G}
  double e_tl2 = 0.0;     // E{T_L^2}
  double e_tlzg = 0.0;    // E{T_L Z G}
};

SeMoments se_moments(const Channel& channel, const Preprocessor& t_l, const Preprocessor& t,
                     int order = kDefaultOrder);

struct SeFixedPoint {
  double mu_v_tilde = 0.0;
  double sigma_v_tilde = 0.0;
  double beta_tilde = 0.0;
  bool trivial = false;  // hypotheses fail: (0, E{Z^2}) is returned
};

SeFixedPoint se_fixed_point(const SeMoments& m, double delta);
SeFixedPoint se_fixed_point(const Channel& channel, const Preprocessor& t, double delta,
                            int order = kDefaultOrder);

struct SeStep {
  double mu_u = 0.0;
  double sigma2_u = 0.0;
  double mu_v = 0.0;
  double sigma2_v = 0.0;
  double beta = 0.0;
  double corr_v1 = 1.0;  // E{W_{V,1} W_{V,t}}
};

struct StateEvolutionTrace {
  std::vector<SeStep> steps;  // steps[0] is t = 1
  SeFixedPoint fixed_point;
  double corr_v1_limit = 0.0;  // E{W_{V,1} W_{V,inf}}
  int converged_at = -1;       // first t with |beta_t^2 - beta_{t-1}^2| < 1e-12
};

StateEvolutionTrace se_run(const SeMoments& m, double delta, int steps);
StateEvolutionTrace se_run(const Channel& channel, const Preprocessor& t_l,
                           const Preprocessor& t, double delta, int steps,
                           int order = kDefaultOrder);

/// Z~ = T_s/(lambda* - T_s), the auxiliary preprocessor that makes the GAMP
/// power method track the spectral estimator.
Preprocessor ztilde_preprocessor(const Preprocessor& t_s, double lambda_star);

enum class OnsagerMode { limit, empirical };

struct GampConfig {
  Channel channel;  // needed for the state-evolution constants beta_t
  Preprocessor t_l;
  Preprocessor t_s;
  double lambda_star = 0.0;
  int max_t = 200;
  double delta = 0.0;  // used for the state evolution; the iteration uses n/d
  OnsagerMode onsager = OnsagerMode::limit;
  int order = kDefaultOrder;
};

struct GampRow {
  int t = 0;
  double diff_u = 0.0;  // ||u^t - u^{t-1}||^2 / n
  double diff_v = 0.0;  // ||v^{t+1} - v^t||^2 / d
  double overlap = 0.0; // <v^t, x> / d
  double se_mu_v = 0.0;
  double se_sigma_v = 0.0;
  double spectral_alignment = 0.0;  // |<v^t, ref>| / (||v^t|| ||ref||), NaN without ref
};

struct GampRun {
  Eigen::VectorXd u;   // u^T
  Eigen::VectorXd v;   // v^T
  Eigen::VectorXd v1;  // first iterate
  std::vector<GampRow> rows;
};

/// Power-method GAMP; `reference` (e.g. the spectral estimate) feeds the
/// alignment column.
GampRun gamp_power_run(const Instance& inst, const GampConfig& cfg,
                       const Eigen::VectorXd* reference = nullptr);

/// Denoisers for the general iteration. g(0, u, y) is the initial function;
/// f is never called with t = 0 (f_0 = 0).
struct GampDenoisers {
  std::function<double(int, double)> f;
  std::function<double(int, double)> df;
  std::function<double(int, double, double)> g;
  std::function<double(int, double, double)> dg;  // derivative in u
};

/// General GAMP with empirical Onsager coefficients. `steps` iterations
/// produce v^1 .. v^{steps+1}; `se` (optional) fills the SE columns.
GampRun gamp_general_run(const Instance& inst, const GampDenoisers& den, double c, int steps,
                         const Eigen::VectorXd* reference = nullptr,
                         const StateEvolutionTrace* se = nullptr);

}  // namespace glmcomb
