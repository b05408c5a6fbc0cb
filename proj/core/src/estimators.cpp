#include "glmcomb/estimators.hpp"

#include <algorithm>
#include <cmath>

#include "glmcomb/error.hpp"
#include "glmcomb/rng.hpp"

namespace glmcomb {

namespace {

constexpr std::uint64_t kStartStream = 0x5bec7a;
constexpr double kInfResidual = 1e300;

Eigen::VectorXd random_unit(Eigen::Index d, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::VectorXd v(d);
  for (Eigen::Index j = 0; j < d; ++j) v(j) = rng.normal();
  return v / v.norm();
}

struct PowerResult {
  Eigen::VectorXd v;
  double lambda = 0.0;  // eigenvalue of the unshifted operator
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Power iteration on D + shift I, optionally restricted to the complement of `defl`.
PowerResult power(const Eigen::MatrixXd& A, const Eigen::VectorXd& z, double shift,
                  Eigen::VectorXd v, const Eigen::VectorXd* defl, double tol, int max_iter) {
  Eigen::VectorXd av(A.rows()), w(A.cols());
  PowerResult r;
  auto project = [&](Eigen::VectorXd& x) {
    if (defl) x -= defl->dot(x) * *defl;
  };
  project(v);
  v /= v.norm();
  for (int it = 1; it <= max_iter; ++it) {
    av.noalias() = A * v;
    av.array() *= z.array();
    w.noalias() = A.transpose() * av;
    project(w);
    const double lambda = v.dot(w);
    r.residual = (w - lambda * v).norm() / std::max(1.0, std::abs(lambda));
    r.lambda = lambda;
    r.iterations = it;
    if (!std::isfinite(r.residual)) throw NumericalError("power iteration produced NaN");
    if (r.residual <= tol) {
      r.converged = true;
      break;
    }
    w += shift * v;
    const double nw = w.norm();
    if (nw == 0.0) throw NumericalError("power iteration hit the zero vector");
    v = w / nw;
  }
  r.v = std::move(v);
  return r;
}

}  // namespace

Eigen::VectorXd apply_preprocessor(const Preprocessor& t, const Eigen::VectorXd& y) {
  Eigen::VectorXd z(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) z(i) = t(y(i));
  return z;
}

Eigen::VectorXd linear_estimate(const Instance& inst, const Preprocessor& t_l) {
  const Eigen::VectorXd z = apply_preprocessor(t_l, inst.y);
  const double c = std::sqrt(static_cast<double>(inst.d())) / static_cast<double>(inst.n());
  Eigen::VectorXd atz = inst.A.transpose() * z;
  return c * atz;
}

SpectralSolveReport spectral_estimate(const Eigen::MatrixXd& A, const Eigen::VectorXd& z,
                                      const SpectralOptions& opts) {
  if (!(opts.tol > 0.0)) throw DomainError("tolerance must be positive");
  if (opts.max_iter < 1) throw DomainError("max_iter must be positive");
  if (A.rows() != z.size()) throw DomainError("A and z sizes differ");
  SpectralSolveReport rep;
  rep.shift = std::max(0.0, -z.minCoeff());

  // A run whose best residual has not dropped by 1% within `window`
  // iterations restarts from a fresh start vector (at most twice).
  const int window = std::max(1000, opts.max_iter / 5);
  Eigen::VectorXd v = random_unit(A.cols(), derive_seed(opts.start_seed, kStartStream, 0));
  Eigen::VectorXd av(A.rows()), w(A.cols());
  double best_res = kInfResidual, best_lambda = 0.0;
  Eigen::VectorXd best_v = v;
  int last_gain = 0;
  for (int it = 1; it <= opts.max_iter; ++it) {
    av.noalias() = A * v;
    av.array() *= z.array();
    w.noalias() = A.transpose() * av;
    const double lambda = v.dot(w);
    const double res = (w - lambda * v).norm() / std::max(1.0, std::abs(lambda));
    if (!std::isfinite(res)) throw NumericalError("power iteration produced NaN");
    rep.iterations = it;
    if (res < 0.99 * best_res) last_gain = it;
    if (res < best_res) {
      best_res = res;
      best_lambda = lambda;
      best_v = v;
    }
    if (res <= opts.tol) {
      rep.converged = true;
      break;
    }
    if (it - last_gain >= window && rep.restarts < 2) {
      ++rep.restarts;
      last_gain = it;
      v = random_unit(A.cols(), derive_seed(opts.start_seed, kStartStream, rep.restarts));
      continue;
    }
    w += rep.shift * v;
    const double nw = w.norm();
    if (nw == 0.0) throw NumericalError("power iteration hit the zero vector");
    v = w / nw;
  }
  rep.eigvec = best_v;
  rep.eigval1 = best_lambda;
  rep.residual = best_res;

  if (opts.second_eigenvalue) {
    PowerResult p2 = power(A, z, rep.shift,
                           random_unit(A.cols(), derive_seed(opts.start_seed, kStartStream, 99)),
                           &rep.eigvec, opts.tol, opts.max_iter);
    rep.eigval2 = p2.lambda;
  }
  return rep;
}

SpectralSolveReport spectral_estimate(const Instance& inst, const Preprocessor& t_s, double tol,
                                      int max_iter, bool second_eigenvalue) {
  SpectralOptions o;
  o.tol = tol;
  o.max_iter = max_iter;
  o.second_eigenvalue = second_eigenvalue;
  o.start_seed = inst.seed;
  return spectral_estimate(inst.A, apply_preprocessor(t_s, inst.y), o);
}

Eigen::VectorXd resolve_sign(const Eigen::VectorXd& x_l, const Eigen::VectorXd& x_s,
                             double q_predicted) {
  if (!(x_s.norm() > 0.0)) throw DomainError("spectral estimate has zero norm");
  const double ip = x_l.dot(x_s);
  if (q_predicted == 0.0 || ip == 0.0) return x_s;
  return (ip > 0) == (q_predicted > 0) ? x_s : Eigen::VectorXd(-x_s);
}

Eigen::VectorXd combine_linear(const Eigen::VectorXd& x_l, const Eigen::VectorXd& x_s,
                               double theta) {
  if (theta == 0.0) return x_s;
  const double nl = x_l.norm();
  if (!(nl > 0.0)) throw DomainError("linear estimate has zero norm");
  if (std::isinf(theta)) return (theta > 0 ? 1.0 : -1.0) * x_l / nl;
  return theta * (x_l / nl) + x_s;
}

Eigen::VectorXd combine_bayes(const Eigen::VectorXd& x_l_scaled,
                              const Eigen::VectorXd& x_s_scaled, const SignalPrior& prior,
                              const JointParams& params) {
  if (x_l_scaled.size() != x_s_scaled.size()) throw DomainError("input sizes differ");
  Eigen::VectorXd out(x_l_scaled.size());
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    out(i) = bayes_combiner(prior, params, x_l_scaled(i), x_s_scaled(i));
  }
  return out;
}

double normalized_correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  const double na = a.norm(), nb = b.norm();
  if (!(na > 0.0) || !(nb > 0.0)) throw DomainError("normalized correlation of a zero vector");
  return std::min(1.0, std::abs(a.dot(b)) / (na * nb));
}

}  // namespace glmcomb
