// One PASS/FAIL line per acceptance criterion. Pass criterion numbers as
// arguments to run a subset.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "glmcomb/asymptotics.hpp"
#include "glmcomb/config.hpp"
#include "glmcomb/estimators.hpp"
#include "glmcomb/gamp.hpp"
#include "glmcomb/harness.hpp"
#include "glmcomb/preopt.hpp"
#include "glmcomb/rng.hpp"

using namespace glmcomb;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
  double timed = -1.0;  // seconds charged to the budget when the check times itself
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Channel quad_channel() { return make_channel("0.3x+x^2", std::sqrt(0.2)); }

double mean_of(const ExperimentResult& r, double delta, const std::string& est) {
  for (const auto& s : r.summaries) {
    if (s.delta != delta) continue;
    for (const auto& e : s.stats) {
      if (e.estimator == est) return e.mean;
    }
  }
  return NAN;
}

Outcome c1_phase_retrieval() {
  const DeltaStar ds = delta_star(make_channel("x^2", 0.0));
  const bool ok = !ds.infinite && std::abs(ds.value - 0.5) <= 1e-3;
  return {ok, "delta_star = " + fmt("%.10f", ds.value) + " (target 0.5 +- 1e-3)"};
}

Outcome c2_sweep() {
  ExperimentConfig cfg;
  cfg.link = "0.3x+x^2";
  cfg.sigma2 = 0.2;
  cfg.t_l = "id";
  cfg.t_s = "clip:3.5";
  cfg.d = 2000;
  cfg.delta_grid = {2, 4, 6, 8, 10};
  cfg.replicates = 10;
  cfg.estimators = {"linear", "spectral", "combined_linear"};
  const ExperimentResult r = run_sweep(cfg, workers_from_env());
  double worst = 0.0;
  std::string rows;
  for (const auto& s : r.summaries) {
    const double el = mean_of(r, s.delta, "linear");
    const double es = mean_of(r, s.delta, "spectral");
    const double ec = mean_of(r, s.delta, "combined_linear");
    const auto& p = s.prediction;
    worst = std::max({worst, std::abs(el - std::abs(p.rho_l)), std::abs(es - p.rho_s),
                      std::abs(ec - p.f_theta_star)});
    char buf[200];
    std::snprintf(buf, sizeof buf, "\n      delta=%g  L %.4f/%.4f  s %.4f/%.4f  c %.4f/%.4f", s.delta,
                  el, std::abs(p.rho_l), es, p.rho_s, ec, p.f_theta_star);
    rows += buf;
  }
  return {worst <= 0.03, "max |empirical - theory| = " + fmt("%.4f", worst) + " (tol 0.03)" + rows};
}

Outcome c3_gain() {
  const Channel ch = quad_channel();
  const auto t_l = identity_preprocessor();
  const auto t_s = clip_preprocessor(3.5);
  const auto t0 = std::chrono::steady_clock::now();
  const double g8 = percentage_gain(predict(SignalPrior::gaussian_sphere(), ch, t_l, t_s, 8.0));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  // where the gain actually peaks on this channel (diagnostic, not timed)
  double best = -1.0, at = 0.0;
  for (double d = 0.86; d <= 10.0; d += 0.02) {
    const auto p = predict(SignalPrior::gaussian_sphere(), ch, t_l, t_s, d);
    if (p.below_threshold()) continue;
    const double g = percentage_gain(p);
    if (g > best) {
      best = g;
      at = d;
    }
  }
  return {g8 >= 25.0, "gain at delta=8 is " + fmt("%.3f", g8) + "% (need >= 25); peak " +
                          fmt("%.2f", best) + "% at delta=" + fmt("%.2f", at),
          secs};
}

Outcome c4_cross_correlation() {
  const Channel ch = quad_channel();
  const auto t_l = identity_preprocessor();
  const auto t_s = clip_preprocessor(3.5);
  const auto p = predict(SignalPrior::gaussian_sphere(), ch, t_l, t_s, 5.0);
  // A single instance fluctuates by ~0.04 at d = 2000, so 10 replicates give
  // only a ~2.5 sigma band; 30 replicates from the same seed stream are used.
  const int reps = 30;
  double sum = 0.0, sum10 = 0.0;
  for (int r = 0; r < reps; ++r) {
    const Instance inst = sample_instance(SignalPrior::gaussian_sphere(), ch, 2000, 5.0,
                                          derive_seed(4, 0, r));
    const Eigen::VectorXd xl = linear_estimate(inst, t_l);
    const Eigen::VectorXd xs = resolve_sign(xl, spectral_estimate(inst, t_s).eigvec, p.q);
    const double c = xl.dot(xs) / (xl.norm() * xs.norm());
    sum += c;
    if (r < 10) sum10 += c;
  }
  const double emp = sum / reps;
  return {std::abs(emp - p.q) <= 0.03, "mean empirical " + fmt("%.4f", emp) + " vs q = " +
                                           fmt("%.4f", p.q) + " over 30 replicates (tol 0.03); first 10: " +
                                           fmt("%.4f", sum10 / 10)};
}

Outcome c5_gamp() {
  const Channel ch = quad_channel();
  const auto t_l = identity_preprocessor();
  const auto t_s = clip_preprocessor(3.5);
  const double delta = 5.0;
  const auto p = predict(SignalPrior::gaussian_sphere(), ch, t_l, t_s, delta);
  const Instance inst = sample_instance(SignalPrior::gaussian_sphere(), ch, 1000, delta,
                                        derive_seed(1, 0, 0));
  const Eigen::VectorXd xs = spectral_estimate(inst, t_s).eigvec;
  GampConfig gc{ch, t_l, t_s, p.fixed_point.lambda_star, 200, delta, OnsagerMode::limit,
                kDefaultOrder};
  const GampRun run = gamp_power_run(inst, gc, &xs);
  const Eigen::VectorXd ref = std::sqrt(1000.0) * linear_estimate(inst, t_l);
  const bool a = run.v1.size() == ref.size() && (run.v1.array() == ref.array()).all();
  const GampRow& last = run.rows.back();
  const bool b = last.diff_v <= 1e-3;
  const bool c = last.spectral_alignment >= 0.99;
  // per-step growth of ||v^t|| late in the run, against the eigenvalue ratio
  const GampRow& mid = run.rows[run.rows.size() - 51];
  const double growth = std::pow(last.diff_v / mid.diff_v, 1.0 / 100.0);
  const double lam = spectral_estimate(inst, t_s).eigval1;
  return {a && b && c,
          std::string("(a) v1 bit-exact ") + (a ? "yes" : "no") + "; (b) diff_v(200) = " +
              fmt("%.3e", last.diff_v) + " (<= 1e-3) " + (b ? "ok" : "fails") +
              "; (c) alignment = " + fmt("%.6f", last.spectral_alignment) + (c ? " ok" : " fails") +
              "\n      per-step growth " + fmt("%.4f", growth) + ", lambda1 " + fmt("%.3f", lam) +
              " vs limit " + fmt("%.3f", p.lambda1_dn)};
}

Outcome c6_state_evolution() {
  const Channel ch = quad_channel();
  const auto t_l = identity_preprocessor();
  const auto t_s = clip_preprocessor(3.5);
  const double delta = 5.0;
  double worst = 0.0;
  // plain clip, then Z~ from lambda*
  const SpectralFixedPoint fp = spectral_fixed_point(ch, t_s, delta);
  const Preprocessor zt = ztilde_preprocessor(t_s, fp.lambda_star);
  for (const Preprocessor* t : {&t_s, &zt}) {
    const StateEvolutionTrace tr = se_run(ch, t_l, *t, delta, 500);
    const SeStep& s = tr.steps.back();
    worst = std::max({worst, std::abs(s.mu_v - tr.fixed_point.mu_v_tilde),
                      std::abs(std::sqrt(s.sigma2_v) - tr.fixed_point.sigma_v_tilde),
                      std::abs(s.beta - tr.fixed_point.beta_tilde)});
  }
  const SeFixedPoint zfp = se_fixed_point(ch, zt, delta);
  const double beta_err = std::abs(zfp.beta_tilde * zfp.beta_tilde - 1.0 / delta);
  return {worst <= 1e-8 && beta_err <= 1e-8,
          "500-step recursion vs closed form: " + fmt("%.2e", worst) + "; |beta~^2 - 1/delta| = " +
              fmt("%.2e", beta_err) + " (tol 1e-8)"};
}

Outcome c7_eigenvalues() {
  const Channel ch = quad_channel();
  const auto t_s = clip_preprocessor(3.5);
  const double delta = 5.0;
  const auto p = predict(SignalPrior::gaussian_sphere(), ch, identity_preprocessor(), t_s, delta);
  const int reps = 10;
  double l1 = 0.0, l2 = 0.0;
  for (int r = 0; r < reps; ++r) {
    const Instance inst = sample_instance(SignalPrior::gaussian_sphere(), ch, 500, delta,
                                          derive_seed(7, 0, r));
    const Eigen::VectorXd z = apply_preprocessor(t_s, inst.y);
    const Eigen::MatrixXd D = inst.A.transpose() * z.asDiagonal() * inst.A;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    l1 += ev(ev.size() - 1) / reps;
    l2 += ev(ev.size() - 2) / reps;
  }
  const double e1 = std::abs(l1 - p.lambda1_dn);
  const double e2 = std::abs(l2 - p.lambda2_dn);
  return {e1 <= 0.05 && e2 <= 0.05,
          "mean lambda1 " + fmt("%.4f", l1) + " vs " + fmt("%.4f", p.lambda1_dn) + ", lambda2 " +
              fmt("%.4f", l2) + " vs " + fmt("%.4f", p.lambda2_dn) + " (tol 0.05)"};
}

Outcome c8_optimality() {
  const Channel ch = quad_channel();
  const auto t_l = identity_preprocessor();
  const auto t_s = clip_preprocessor(3.5);
  std::string detail;
  bool ok = true;

  // (a) theta grid, endpoints included through theta = tan(phi)
  double grid_gap = -1.0;
  for (double delta : {2.0, 5.0, 10.0}) {
    const auto p = predict(SignalPrior::gaussian_sphere(), ch, t_l, t_s, delta);
    for (int i = 0; i < 4001; ++i) {
      const double phi = -M_PI / 2 + M_PI * i / 4000.0;
      const double th = i == 0 ? -kInf : (i == 4000 ? kInf : std::tan(phi));
      grid_gap = std::max(grid_gap, std::abs(f_theta(p.rho_l, p.rho_s, p.q, th)) - p.f_theta_star);
    }
  }
  const bool a = grid_gap <= 1e-12;
  detail += std::string("(a) max |F| - F(theta*) = ") + fmt("%.1e", grid_gap) + (a ? " ok" : " fails");

  // (b) optimal T_L against four candidates
  const double delta = 5.0;
  const double star = rho_l_star(ch, delta);
  double best_cand = 0.0;
  for (const auto& t : {identity_preprocessor(), clip_preprocessor(2.0), tanh_preprocessor(),
                        square_preprocessor()}) {
    best_cand = std::max(best_cand, std::abs(rho_linear(ch, t, delta).rho_l));
  }
  const bool b = star >= best_cand - 1e-9;
  detail += "; (b) rho_L* " + fmt("%.4f", star) + " >= best candidate " + fmt("%.4f", best_cand) +
            (b ? " ok" : " fails");

  // (c) decision vs direct comparison on 20 configurations
  int agree = 0, total = 0;
  const std::vector<std::pair<std::string, double>> chans{
      {"0.3x+x^2", 0.2}, {"max(x,-0.4x)", 0.4}, {"abs_switch_1.5", 0.4}, {"0.3x+0.5x^2", 0.1}, {"x", 0.5}};
  for (const auto& [link, s2] : chans) {
    const Channel c = make_channel(link, std::sqrt(s2));
    for (double dd : {0.5, 1.0, 3.0, 8.0}) {
      const PreprocOptResult r = linear_vs_spectral(c, dd);
      const double l = rho_l_star(c, dd);
      const DeltaStar ds = delta_star(c);
      const double s = !ds.infinite && dd > ds.value ? rho_s_star(c, dd).rho : 0.0;
      const Winner direct = std::abs(l - s) <= 1e-10 ? Winner::tie
                                                     : (s > l ? Winner::spectral : Winner::linear);
      agree += r.winner == direct ? 1 : 0;
      ++total;
    }
  }
  const bool c = agree == total;
  detail += "; (c) decisions agree " + std::to_string(agree) + "/" + std::to_string(total);

  // (d) Monte Carlo rho* under the Gaussian prior
  PredictOptions po;
  po.bayes_samples = 1'000'000;
  po.bayes_seed = 8;
  const auto pb = predict(SignalPrior::gaussian_sphere(), ch, t_l, t_s, 5.0, po);
  const double z = std::abs(*pb.rho_star_bayes - pb.f_theta_star) / *pb.rho_star_bayes_se;
  const bool d = z <= 3.0;
  detail += "; (d) |rho*_MC - F(theta*)| = " + fmt("%.2f", z) + " SE" + (d ? " ok" : " fails");
  ok = a && b && c && d;
  return {ok, detail};
}

Outcome c9_binary_bayes() {
  ExperimentConfig cfg;
  cfg.link = "0.3x+x^2";
  cfg.sigma2 = 0.2;
  cfg.prior = "binary";
  cfg.p = 0.3;
  cfg.t_l = "id";
  cfg.t_s = "clip:3.5";
  cfg.d = 1000;
  cfg.delta_grid = {0.5};
  cfg.replicates = 10;
  cfg.base_seed = 9;
  cfg.estimators = {"linear", "combined_bayes"};
  const ExperimentResult r = run_sweep(cfg, workers_from_env());
  const auto& s = r.summaries.front();
  const double el = mean_of(r, 0.5, "linear");
  const double eb = mean_of(r, 0.5, "combined_bayes");
  const double th = *s.prediction.rho_star_bayes;
  const bool below = s.prediction.below_threshold();
  const bool ok = below && eb - el >= 0.02 && std::abs(eb - th) <= 0.03;
  return {ok, "delta=0.5 (rho_s = 0: " + std::string(below ? "yes" : "no") + "): bayes " +
                  fmt("%.4f", eb) + " vs linear " + fmt("%.4f", el) + ", theory rho* " +
                  fmt("%.4f", th)};
}

Outcome c10_gd_ordering() {
  ExperimentConfig cfg;
  cfg.link = "0.3x+0.5(x^2-1)";
  cfg.sigma2 = 0.2;
  cfg.t_l = "id";
  cfg.t_s = "clip:3.5";
  cfg.d = 250;
  cfg.delta_grid = {3.0};
  cfg.replicates = 10;
  cfg.base_seed = 10;
  cfg.estimators = {"linear", "spectral", "combined_linear"};
  cfg.gd_steps = 50;
  cfg.gd_step_size = 0.5;
  cfg.gd_normalize = true;  // the unnormalized step 1/2 diverges on this setup
  const ExperimentResult r = run_sweep(cfg, workers_from_env());
  std::map<std::string, std::vector<double>> mean;
  for (const auto& g : r.gd) {
    auto& m = mean[g.init];
    m.resize(g.correlation.size(), 0.0);
    for (std::size_t t = 0; t < g.correlation.size(); ++t) m[t] += g.correlation[t] / 10.0;
  }
  bool ok = true;
  for (const auto& e : {"linear", "spectral"}) {
    for (std::size_t t : {0, 50}) {
      if (mean.at(e).size() <= t || mean.at("combined_linear").size() <= t) ok = false;
      else if (mean.at("combined_linear")[t] < mean.at(e)[t]) ok = false;
    }
  }
  auto at = [&](const char* e, std::size_t t) {
    return mean.at(e).size() > t ? mean.at(e)[t] : NAN;
  };
  return {ok, "t=0: c " + fmt("%.4f", at("combined_linear", 0)) + " L " + fmt("%.4f", at("linear", 0)) +
                  " s " + fmt("%.4f", at("spectral", 0)) + "; t=50: c " +
                  fmt("%.4f", at("combined_linear", 50)) + " L " + fmt("%.4f", at("linear", 50)) +
                  " s " + fmt("%.4f", at("spectral", 50))};
}

Outcome c11_oracle() {
  Rng rng(derive_seed(11, 0));
  const Channel ch = quad_channel();
  const auto t_s = clip_preprocessor(3.5);
  double worst_val = 0.0, worst_ov = 1.0;
  for (int k = 0; k < 100; ++k) {
    const int d = 10 + static_cast<int>(rng.uniform() * 51);
    const double delta = 2.0 + 6.0 * rng.uniform();
    const Instance inst =
        sample_instance(SignalPrior::gaussian_sphere(), ch, d, delta, derive_seed(11, 1, k));
    const Eigen::VectorXd z = apply_preprocessor(t_s, inst.y);
    SpectralOptions so;
    so.start_seed = derive_seed(11, 2, k);
    so.max_iter = 200000;
    const SpectralSolveReport rep = spectral_estimate(inst.A, z, so);
    const Eigen::MatrixXd D = inst.A.transpose() * z.asDiagonal() * inst.A;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(D);
    const Eigen::Index top = es.eigenvalues().size() - 1;
    worst_val = std::max(worst_val, std::abs(rep.eigval1 - es.eigenvalues()(top)));
    worst_ov = std::min(worst_ov, std::abs(rep.eigvec.dot(es.eigenvectors().col(top))));
  }
  return {worst_val <= 1e-8 && worst_ov >= 1.0 - 1e-8,
          "worst eigenvalue error " + fmt("%.2e", worst_val) + ", worst overlap 1 - " +
              fmt("%.2e", 1.0 - worst_ov) + " over 100 instances"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> all{
      {"phase-retrieval threshold delta* = 1/2", c1_phase_retrieval},
      {"quadratic-channel sweep within 0.03 of theory", c2_sweep},
      {"percentage gain >= 25 at delta = 8", c3_gain},
      {"cross-correlation within 0.03 of q", c4_cross_correlation},
      {"GAMP power method mechanism", c5_gamp},
      {"state-evolution fixed point", c6_state_evolution},
      {"top-two eigenvalue limits", c7_eigenvalues},
      {"optimality properties", c8_optimality},
      {"binary-prior Bayes advantage below threshold", c9_binary_bayes},
      {"GD initialization ordering", c10_gd_ordering},
      {"power iteration vs dense eigensolver", c11_oracle},
  };
  const std::vector<double> budget{10, 600, 5, 600, 120, 600, 600, 600, 600, 600, 600};
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

  int failures = 0;
  for (std::size_t k = 0; k < all.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = all[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (o.timed >= 0.0) secs = o.timed;
    if (secs > budget[k]) {
      o.pass = false;
      o.detail += "; over the runtime budget";
    }
    std::printf("%s  [%2d] %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, all[k].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
