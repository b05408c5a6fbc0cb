#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "glmcomb/asymptotics.hpp"
#include "glmcomb/channels.hpp"
#include "glmcomb/config.hpp"

namespace glmcomb {

/// One estimator evaluated on one replicate.
struct ReplicateRecord {
  double delta = 0.0;
  int replicate = 0;
  std::string estimator;
  double correlation = 0.0;
  double norm = 0.0;
  double seconds = 0.0;
};

struct GdTrace {
  double delta = 0.0;
  int replicate = 0;
  std::string init;
  std::vector<double> correlation;  // entry t is after t steps
  bool diverged = false;
};

struct EstimatorSummary {
  std::string estimator;
  double mean = 0.0;
  double std_error = 0.0;
  int count = 0;
};

struct DeltaSummary {
  double delta = 0.0;
  double delta_n = 0.0;  // realized n/d
  AsymptoticPrediction prediction;
  std::vector<EstimatorSummary> stats;
  int failures = 0;
  int spectral_unconverged = 0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<ReplicateRecord> records;  // ordered by (delta, replicate, estimator)
  std::vector<GdTrace> gd;
  std::vector<DeltaSummary> summaries;
};

/// Replicate r at grid index k uses derive_seed(base_seed, k, r). Results do
/// not depend on the worker count; only the timing column does.
ExperimentResult run_sweep(const ExperimentConfig& cfg, int workers = 1);

/// Gradient descent on 0.5 sum_i (y_i - f(<a_i, x>))^2 started from x0
/// rescaled to norm sqrt(d). With `normalize` the gradient is divided by n.
/// A diverging trajectory stops early with `diverged` set.
GdTrace gd_refine(const Instance& inst, const Channel& channel, const Eigen::VectorXd& x0,
                  int steps, double step_size, bool normalize);

/// 100 (rho_combined / max(|rho_L|, rho_s) - 1), using the Bayes value when
/// requested and available.
double percentage_gain(const AsymptoticPrediction& pred, bool use_bayes = false);

}  // namespace glmcomb
