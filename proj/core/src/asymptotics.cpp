#include "glmcomb/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "glmcomb/error.hpp"

namespace glmcomb {

namespace {

// Sign change required: f(lo) < 0 < f(hi). Runs to adjacent doubles.
template <class F>
double bisect(F&& f, double lo, double hi) {
  for (int it = 0; it < 400; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

void check_delta(double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw DomainError("delta must be positive");
}

std::vector<double> merged_kinks(const Preprocessor& a, const Preprocessor& b) {
  std::vector<double> k = a.kinks;
  k.insert(k.end(), b.kinks.begin(), b.kinks.end());
  std::sort(k.begin(), k.end());
  k.erase(std::unique(k.begin(), k.end()), k.end());
  return k;
}

}  // namespace

LinearPrediction rho_linear(const Channel& channel, const Preprocessor& t_l, double delta,
                            int order) {
  check_delta(delta);
  t_l.validate();
  const JointRule rule = joint_rule(channel, order, t_l.kinks);
  LinearPrediction r;
  r.e_gz = integrate(rule, [&](double g, double y) { return g * t_l(y); });
  r.e_z2 = integrate(rule, [&](double, double y) {
    const double z = t_l(y);
    return z * z;
  });
  if (!(r.e_z2 > 0.0)) throw DomainError("linear preprocessor is zero almost surely");
  r.n_l = std::sqrt(r.e_gz * r.e_gz + r.e_z2 / delta);
  r.rho_l = r.e_gz / r.n_l;
  return r;
}

SpectralFunctions::SpectralFunctions(const Channel& channel, const Preprocessor& t_s,
                                     double delta, int order)
    : delta_(delta) {
  check_delta(delta);
  t_s.validate();
  tau_ = t_s.sup_support;
  if (channel.is_discrete()) {
    // finite output alphabet: the supremum is attained on it
    double m = -kInf;
    for (const auto& o : channel.discrete_support) m = std::max(m, t_s(o.value));
    tau_ = std::min(tau_, m);
  }
  if (!std::isfinite(tau_)) {
    throw DomainError("spectral preprocessor '" + t_s.name + "' needs a finite support bound");
  }
  const JointRule rule = joint_rule(channel, order, t_s.kinks);
  double nonzero = 0.0;
  const double slack = 1e-12 * std::max(1.0, std::abs(tau_));
  for (std::size_t i = 0; i < rule.size(); ++i) {
    if (rule.w[i] == 0.0) continue;
    const double z = t_s(rule.y[i]);
    if (!std::isfinite(z)) {
      throw NumericalError("non-finite T_s at y=" + std::to_string(rule.y[i]));
    }
    if (z > tau_ + slack) {
      throw DomainError("T_s exceeds its declared support bound " + std::to_string(tau_));
    }
    if (z != 0.0) nonzero += rule.w[i];
    z_.push_back(std::min(z, tau_));
    g2_.push_back(rule.g[i] * rule.g[i]);
    w_.push_back(rule.w[i]);
  }
  if (nonzero <= 1e-14) throw DomainError("T_s(Y) = 0 almost surely");
  if (!(tau_ > 0.0)) throw DomainError("T_s must take positive values for a spectral outlier");
}

void SpectralFunctions::check(double lambda) const {
  if (!(lambda - tau_ >= 1e-12 * std::max(1.0, std::abs(tau_)))) {
    throw NumericalError("lambda=" + std::to_string(lambda) + " too close to tau=" +
                         std::to_string(tau_));
  }
}

double SpectralFunctions::psi(double lambda) const {
  check(lambda);
  double s = 0.0;
  for (std::size_t i = 0; i < w_.size(); ++i) s += w_[i] * z_[i] / (lambda - z_[i]);
  return lambda * (1.0 / delta_ + s);
}

double SpectralFunctions::phi(double lambda) const {
  check(lambda);
  double s = 0.0;
  for (std::size_t i = 0; i < w_.size(); ++i) s += w_[i] * z_[i] * g2_[i] / (lambda - z_[i]);
  return lambda * s;
}

double SpectralFunctions::psi_prime(double lambda) const {
  check(lambda);
  double s = 0.0;
  for (std::size_t i = 0; i < w_.size(); ++i) {
    const double r = z_[i] / (lambda - z_[i]);
    s += w_[i] * r * r;
  }
  return 1.0 / delta_ - s;
}

double SpectralFunctions::phi_prime(double lambda) const {
  check(lambda);
  double s = 0.0;
  for (std::size_t i = 0; i < w_.size(); ++i) {
    const double r = z_[i] / (lambda - z_[i]);
    s += w_[i] * r * r * g2_[i];
  }
  return -s;
}

SpectralFixedPoint spectral_fixed_point(const Channel& channel, const Preprocessor& t_s,
                                        double delta, int order) {
  const SpectralFunctions sf(channel, t_s, delta, order);
  const double tau = sf.tau();
  const double scale = std::max(1.0, std::abs(tau));
  const double lo = tau + 1e-9 * scale;
  const double cap = std::max(tau * 1e6, tau + 1e6 * scale);

  SpectralFixedPoint fp;
  fp.delta = delta;
  fp.tau = tau;

  // psi' is increasing on (tau, inf) and tends to 1/delta.
  if (sf.psi_prime(lo) >= 0.0) {
    fp.bar_lambda = lo;
  } else {
    double hi = tau + scale;
    while (sf.psi_prime(hi) <= 0.0) {
      hi = tau + 2.0 * (hi - tau);
      if (hi > cap) throw NumericalError("could not bracket the minimizer of psi");
    }
    fp.bar_lambda = bisect([&](double l) { return sf.psi_prime(l); }, lo, hi);
  }
  fp.zeta_at_bar = sf.psi(fp.bar_lambda);

  const auto zeta = [&](double l) { return l > fp.bar_lambda ? sf.psi(l) : fp.zeta_at_bar; };
  const auto gap = [&](double l) { return zeta(l) - sf.phi(l); };
  if (gap(lo) >= 0.0) {
    throw NumericalError("zeta - phi has no sign change above tau=" + std::to_string(tau));
  }
  double hi = tau + scale;
  while (gap(hi) <= 0.0) {
    hi = tau + 2.0 * (hi - tau);
    if (hi > cap) {
      throw NumericalError("could not bracket lambda* below " + std::to_string(cap));
    }
  }
  fp.lambda_star = bisect(gap, lo, hi);
  fp.residual = gap(fp.lambda_star);
  fp.psi_prime_at_star = sf.psi_prime(fp.lambda_star);
  fp.phi_prime_at_star = sf.phi_prime(fp.lambda_star);
  fp.zeta_at_star = zeta(fp.lambda_star);
  fp.above_threshold = fp.psi_prime_at_star > 0.0;
  return fp;
}

double rho_spectral(const SpectralFixedPoint& fp) {
  if (!(fp.psi_prime_at_star > 0.0)) return 0.0;
  return std::sqrt(fp.psi_prime_at_star / (fp.psi_prime_at_star - fp.phi_prime_at_star));
}

CrossCorrelation cross_correlation_q(const Channel& channel, const Preprocessor& t_l,
                                     const Preprocessor& t_s, double delta,
                                     const SpectralFixedPoint& fp, int order) {
  check_delta(delta);
  if (!fp.above_threshold) throw DomainError("q is defined only above the spectral threshold");
  const JointRule rule = joint_rule(channel, order, merged_kinks(t_l, t_s));
  const double ls = fp.lambda_star;
  const double e_ratio =
      integrate(rule, [&](double g, double y) { return t_l(y) * g / (1.0 - t_s(y) / ls); });
  const double e_gz = integrate(rule, [&](double g, double y) { return t_l(y) * g; });
  const double e_z2 = integrate(rule, [&](double, double y) {
    const double z = t_l(y);
    return z * z;
  });
  if (e_gz == 0.0) throw DomainError("E{Z_L G} = 0: q is undefined");
  const double n_l = std::sqrt(e_gz * e_gz + e_z2 / delta);
  const double rho_s = rho_spectral(fp);
  CrossCorrelation c;
  c.q = rho_s * e_ratio / n_l;
  c.q_compact = (e_gz / n_l) * rho_s * e_ratio / e_gz;
  if (std::abs(c.q - c.q_compact) > 1e-8) {
    throw NumericalError("the two forms of q disagree");
  }
  return c;
}

ThetaOptimum optimal_theta(double rho_l, double rho_s, double q) {
  if (!(std::abs(q) < 1.0)) throw DomainError("optimal_theta needs |q| < 1");
  ThetaOptimum t;
  const double num = rho_l - rho_s * q;
  const double den = rho_s - rho_l * q;
  if (std::abs(den) < 1e-12) {
    t.theta_star = num >= 0.0 ? kInf : -kInf;
  } else {
    t.theta_star = num / den;
  }
  const double f2 = (rho_s * rho_s + rho_l * rho_l - 2.0 * q * rho_l * rho_s) / (1.0 - q * q);
  t.f_theta_star = std::sqrt(std::max(f2, 0.0));
  return t;
}

double f_theta(double rho_l, double rho_s, double q, double theta) {
  if (std::isinf(theta)) return theta > 0 ? rho_l : -rho_l;
  const double den = 1.0 + theta * theta + 2.0 * theta * q;
  if (!(den > 0.0)) throw DomainError("F(theta) denominator is not positive");
  return (theta * rho_l + rho_s) / std::sqrt(den);
}

EigenvalueLimits predicted_eigenvalues(const SpectralFixedPoint& fp) {
  return {fp.delta * fp.zeta_at_star, fp.delta * fp.zeta_at_bar};
}

AsymptoticPrediction predict(const SignalPrior& prior, const Channel& channel,
                             const Preprocessor& t_l, const Preprocessor& t_s, double delta,
                             const PredictOptions& opts) {
  AsymptoticPrediction p;
  p.delta = delta;
  const LinearPrediction lin = rho_linear(channel, t_l, delta, opts.order);
  p.rho_l = lin.rho_l;
  p.n_l = lin.n_l;
  p.fixed_point = spectral_fixed_point(channel, t_s, delta, opts.order);
  p.rho_s = rho_spectral(p.fixed_point);
  if (p.fixed_point.above_threshold && lin.e_gz != 0.0) {
    p.q = cross_correlation_q(channel, t_l, t_s, delta, p.fixed_point, opts.order).q;
  }
  const ThetaOptimum th = optimal_theta(p.rho_l, p.rho_s, p.q);
  p.theta_star = th.theta_star;
  p.f_theta_star = th.f_theta_star;
  const EigenvalueLimits ev = predicted_eigenvalues(p.fixed_point);
  p.lambda1_dn = ev.lambda1;
  p.lambda2_dn = ev.lambda2;
  const double al = std::abs(p.rho_l);
  p.rho_max = std::max(al, p.rho_s);
  if (p.rho_max > 0.0) p.p = al >= p.rho_s ? p.rho_s / p.rho_l : p.rho_l / p.rho_s;
  if (opts.bayes_samples > 0) {
    const auto mc =
        rho_star_bayes(prior, {p.rho_l, p.rho_s, p.q}, opts.bayes_samples, opts.bayes_seed);
    p.rho_star_bayes = mc.value;
    p.rho_star_bayes_se = mc.std_error;
  }
  return p;
}

}  // namespace glmcomb
