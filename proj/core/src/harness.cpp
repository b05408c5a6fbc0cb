#include "glmcomb/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <map>
#include <mutex>
#include <thread>

#include "glmcomb/error.hpp"
#include "glmcomb/estimators.hpp"
#include "glmcomb/rng.hpp"

namespace glmcomb {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct JobOutput {
  std::vector<ReplicateRecord> records;
  std::vector<GdTrace> gd;
  double delta_n = 0.0;
  bool failed = false;
  bool spectral_unconverged = false;
  std::string error;
};

bool wants(const ExperimentConfig& cfg, const std::string& e) {
  return std::find(cfg.estimators.begin(), cfg.estimators.end(), e) != cfg.estimators.end();
}

JobOutput run_replicate(const ExperimentConfig& cfg, const Channel& channel,
                        const SignalPrior& prior, const Preprocessor& t_l,
                        const Preprocessor& t_s, const AsymptoticPrediction& pred,
                        std::size_t k, int r) {
  JobOutput out;
  const double delta = cfg.delta_grid[k];
  try {
    const Instance inst = sample_instance(prior, channel, cfg.d, delta,
                                          derive_seed(cfg.base_seed, k, static_cast<std::uint64_t>(r)));
    out.delta_n = inst.delta_n();
    const double sqrt_d = std::sqrt(static_cast<double>(inst.d()));

    std::map<std::string, Eigen::VectorXd> est;
    std::map<std::string, double> secs;

    auto t0 = Clock::now();
    const Eigen::VectorXd xl = linear_estimate(inst, t_l);
    secs["linear"] = seconds_since(t0);

    const bool need_s = wants(cfg, "spectral") || wants(cfg, "combined_linear") ||
                        wants(cfg, "combined_bayes");
    Eigen::VectorXd xs;
    if (need_s) {
      t0 = Clock::now();
      const SpectralSolveReport rep = spectral_estimate(inst, t_s, cfg.tol, cfg.max_iter);
      out.spectral_unconverged = !rep.converged;
      xs = resolve_sign(xl, rep.eigvec, pred.q);
      secs["spectral"] = seconds_since(t0);
    }
    if (wants(cfg, "linear")) est["linear"] = xl;
    if (wants(cfg, "spectral")) est["spectral"] = xs;
    if (wants(cfg, "combined_linear")) {
      t0 = Clock::now();
      est["combined_linear"] = combine_linear(xl, xs, pred.theta_star);
      secs["combined_linear"] = secs["linear"] + secs["spectral"] + seconds_since(t0);
    }
    if (wants(cfg, "combined_bayes")) {
      t0 = Clock::now();
      const JointParams jp{pred.rho_l, pred.rho_s, pred.q};
      est["combined_bayes"] =
          combine_bayes(sqrt_d * xl / pred.n_l, sqrt_d * xs, prior, jp);
      secs["combined_bayes"] = secs["linear"] + secs["spectral"] + seconds_since(t0);
    }

    for (const auto& name : cfg.estimators) {
      const Eigen::VectorXd& v = est.at(name);
      ReplicateRecord rec{delta, r, name, normalized_correlation(v, inst.x), v.norm(),
                          secs[name]};
      if (!std::isfinite(rec.correlation)) throw NumericalError("non-finite correlation");
      out.records.push_back(rec);
    }
    if (cfg.gd_steps > 0) {
      for (const auto& name : cfg.estimators) {
        t0 = Clock::now();
        GdTrace tr = gd_refine(inst, channel, est.at(name), cfg.gd_steps, cfg.gd_step_size,
                               cfg.gd_normalize);
        tr.delta = delta;
        tr.replicate = r;
        tr.init = name;
        out.records.push_back({delta, r, "gd_" + name, tr.correlation.back(), 0.0,
                               seconds_since(t0)});
        out.gd.push_back(std::move(tr));
      }
    }
  } catch (const Error& e) {
    out.failed = true;
    out.error = e.what();
    out.records.clear();
    out.gd.clear();
  }
  return out;
}

}  // namespace

double percentage_gain(const AsymptoticPrediction& pred, bool use_bayes) {
  const double best = std::max(std::abs(pred.rho_l), pred.rho_s);
  if (!(best > 0.0)) throw DomainError("percentage_gain: rho_max = 0");
  const double comb =
      use_bayes && pred.rho_star_bayes ? *pred.rho_star_bayes : pred.f_theta_star;
  return 100.0 * (comb / best - 1.0);
}

GdTrace gd_refine(const Instance& inst, const Channel& channel, const Eigen::VectorXd& x0,
                  int steps, double step_size, bool normalize) {
  if (steps < 0) throw DomainError("gd_refine: negative step count");
  if (!channel.link || !channel.link_derivative) {
    throw DomainError("gd_refine: channel has no differentiable link");
  }
  const double sqrt_d = std::sqrt(static_cast<double>(inst.d()));
  const double n0 = x0.norm();
  if (!(n0 > 0.0)) throw DomainError("gd_refine: zero initial vector");
  const double eta = normalize ? step_size / static_cast<double>(inst.n()) : step_size;

  GdTrace tr;
  Eigen::VectorXd x = x0 * (sqrt_d / n0);
  tr.correlation.push_back(normalized_correlation(x, inst.x));
  Eigen::VectorXd r(inst.n());
  for (int t = 0; t < steps; ++t) {
    const Eigen::VectorXd g = inst.A * x;
    for (Eigen::Index i = 0; i < inst.n(); ++i) {
      r(i) = (channel.link(g(i)) - inst.y(i)) * channel.link_derivative(g(i));
    }
    x.noalias() -= eta * (inst.A.transpose() * r);
    const double nx = x.norm();
    if (!std::isfinite(nx) || nx > 1e6 * sqrt_d) {
      tr.diverged = true;
      break;
    }
    tr.correlation.push_back(normalized_correlation(x, inst.x));
  }
  return tr;
}

ExperimentResult run_sweep(const ExperimentConfig& cfg, int workers) {
  cfg.validate();
  if (workers < 1) throw ConfigError("worker count must be positive");
  const Channel channel = cfg.channel();
  const SignalPrior prior = cfg.signal_prior();
  const Preprocessor t_l = cfg.linear_preprocessor();
  const Preprocessor t_s = cfg.spectral_preprocessor();
  const bool bayes = wants(cfg, "combined_bayes");

  ExperimentResult res;
  res.config = cfg;
  const std::size_t nd = cfg.delta_grid.size();
  std::vector<AsymptoticPrediction> preds;
  for (std::size_t k = 0; k < nd; ++k) {
    PredictOptions po;
    po.order = cfg.order;
    po.bayes_samples = bayes ? cfg.bayes_samples : 0;
    po.bayes_seed = derive_seed(cfg.base_seed, 0xbae5, k);
    preds.push_back(predict(prior, channel, t_l, t_s, cfg.delta_grid[k], po));
  }

  const std::size_t reps = static_cast<std::size_t>(cfg.replicates);
  std::vector<JobOutput> jobs(nd * reps);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j = next++; j < jobs.size(); j = next++) {
      const std::size_t k = j / reps;
      jobs[j] = run_replicate(cfg, channel, prior, t_l, t_s, preds[k], k,
                              static_cast<int>(j % reps));
    }
  };
  const int nthreads = static_cast<int>(std::min<std::size_t>(workers, jobs.size()));
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (std::size_t k = 0; k < nd; ++k) {
    DeltaSummary s;
    s.delta = cfg.delta_grid[k];
    s.prediction = preds[k];
    std::map<std::string, std::vector<double>> vals;
    std::string first_error;
    for (std::size_t r = 0; r < reps; ++r) {
      JobOutput& job = jobs[k * reps + r];
      if (job.failed) {
        ++s.failures;
        if (first_error.empty()) first_error = job.error;
        continue;
      }
      s.delta_n = job.delta_n;
      if (job.spectral_unconverged) ++s.spectral_unconverged;
      for (auto& rec : job.records) {
        vals[rec.estimator].push_back(rec.correlation);
        res.records.push_back(rec);
      }
      for (auto& g : job.gd) res.gd.push_back(std::move(g));
    }
    if (5 * s.failures > static_cast<int>(reps)) {
      throw NumericalError("more than 20% of replicates failed at delta = " +
                           std::to_string(s.delta) + ": " + first_error);
    }
    for (const auto& [name, v] : vals) {
      EstimatorSummary es{name, 0.0, 0.0, static_cast<int>(v.size())};
      for (double c : v) es.mean += c;
      es.mean /= static_cast<double>(v.size());
      if (v.size() > 1) {
        double ss = 0.0;
        for (double c : v) ss += (c - es.mean) * (c - es.mean);
        es.std_error = std::sqrt(ss / static_cast<double>(v.size() - 1) /
                                 static_cast<double>(v.size()));
      }
      s.stats.push_back(es);
    }
    res.summaries.push_back(std::move(s));
  }
  return res;
}

}  // namespace glmcomb
