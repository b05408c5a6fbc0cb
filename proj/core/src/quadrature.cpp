#include "glmcomb/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include <Eigen/Eigenvalues>

namespace glmcomb {

namespace {

// Nodes from the symmetric Jacobi matrix (Golub-Welsch); weights from the
// Christoffel function sum_k p_k(x)^2 of the orthonormal family, which is
// more accurate for the tiny tail weights than squared eigenvector entries.
template <class OffDiag, class Orthonormal>
Rule1D jacobi_rule(int order, OffDiag off, Orthonormal eval_sq_sum, double mass) {
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    J(k, k - 1) = J(k - 1, k) = off(k);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J, Eigen::EigenvaluesOnly);
  Rule1D r;
  r.nodes.resize(order);
  r.weights.resize(order);
  for (int i = 0; i < order; ++i) {
    double x = es.eigenvalues()(i);
    r.nodes[i] = x;
    r.weights[i] = mass / eval_sq_sum(x);
  }
  // symmetrize: both families are symmetric about 0
  for (int i = 0; i < order / 2; ++i) {
    const int j = order - 1 - i;
    const double x = 0.5 * (r.nodes[j] - r.nodes[i]);
    const double w = 0.5 * (r.weights[i] + r.weights[j]);
    r.nodes[i] = -x;
    r.nodes[j] = x;
    r.weights[i] = r.weights[j] = w;
  }
  if (order % 2 == 1) r.nodes[order / 2] = 0.0;
  double total = 0.0;
  for (double w : r.weights) total += w;
  for (double& w : r.weights) w *= mass / total;
  return r;
}

Rule1D build_hermite(int order) {
  auto off = [](int k) { return std::sqrt(static_cast<double>(k)); };
  auto sq = [order](double x) {
    double p0 = 1.0, p1 = x, s = 1.0 + x * x;
    for (int k = 1; k + 1 < order; ++k) {
      const double p2 = (x * p1 - std::sqrt(static_cast<double>(k)) * p0) / std::sqrt(k + 1.0);
      p0 = p1;
      p1 = p2;
      s += p1 * p1;
    }
    return order == 1 ? 1.0 : s;
  };
  return jacobi_rule(order, off, sq, 1.0);
}

Rule1D build_legendre(int order) {
  auto off = [](int k) { return k / std::sqrt(4.0 * k * k - 1.0); };
  auto sq = [order](double x) {
    // sum (2k+1)/2 P_k(x)^2 with P the classical Legendre polynomials
    double p0 = 1.0, p1 = x, s = 0.5 + 1.5 * x * x;
    for (int k = 1; k + 1 < order; ++k) {
      const double p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
      p0 = p1;
      p1 = p2;
      s += (2.0 * (k + 1) + 1.0) / 2.0 * p1 * p1;
    }
    return order == 1 ? 0.5 : s;
  };
  return jacobi_rule(order, off, sq, 2.0);
}

template <class Build>
const Rule1D& cached(std::map<int, Rule1D>& cache, std::mutex& mu, int order, Build build) {
  if (order < 1) throw DomainError("quadrature order must be positive");
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, build(order)).first;
  return it->second;
}

constexpr double kMaxPanel = 1.0;

std::vector<double> inner_breaks(std::span<const double> breakpoints) {
  std::vector<double> b;
  for (double x : breakpoints) {
    if (std::isfinite(x) && x > -kGaussianHalfWidth && x < kGaussianHalfWidth) b.push_back(x);
  }
  std::sort(b.begin(), b.end());
  b.erase(std::unique(b.begin(), b.end()), b.end());
  return b;
}

}  // namespace

const Rule1D& gauss_hermite(int order) {
  static std::map<int, Rule1D> cache;
  static std::mutex mu;
  return cached(cache, mu, order, build_hermite);
}

const Rule1D& gauss_legendre(int order) {
  static std::map<int, Rule1D> cache;
  static std::mutex mu;
  return cached(cache, mu, order, build_legendre);
}

Rule1D gaussian_rule(int order, std::span<const double> breakpoints) {
  const std::vector<double> b = inner_breaks(breakpoints);
  if (b.empty()) return gauss_hermite(order);

  const Rule1D& gl = gauss_legendre(std::max(20, order / 4));
  std::vector<double> edges;
  edges.push_back(-kGaussianHalfWidth);
  edges.insert(edges.end(), b.begin(), b.end());
  edges.push_back(kGaussianHalfWidth);

  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  Rule1D r;
  for (std::size_t s = 0; s + 1 < edges.size(); ++s) {
    const double lo = edges[s], hi = edges[s + 1];
    if (hi - lo < 1e-14) continue;
    const int pieces = static_cast<int>(std::ceil((hi - lo) / kMaxPanel));
    const double h = (hi - lo) / pieces;
    for (int p = 0; p < pieces; ++p) {
      const double a = lo + p * h;
      const double mid = a + 0.5 * h;
      for (std::size_t i = 0; i < gl.size(); ++i) {
        const double x = mid + 0.5 * h * gl.nodes[i];
        r.nodes.push_back(x);
        r.weights.push_back(0.5 * h * gl.weights[i] * inv_sqrt_2pi * std::exp(-0.5 * x * x));
      }
    }
  }
  return r;
}

JointRule joint_rule(const Channel& channel, int order, std::span<const double> y_kinks) {
  channel.validate();
  if (order < 1) throw DomainError("quadrature order must be positive");
  std::vector<double> ykinks(y_kinks.begin(), y_kinks.end());
  ykinks.erase(std::remove_if(ykinks.begin(), ykinks.end(),
                              [](double c) { return !std::isfinite(c); }),
               ykinks.end());

  JointRule rule;
  std::vector<double> gbreaks = channel.g_breakpoints;

  if (channel.is_discrete()) {
    const Rule1D gr = gaussian_rule(order, gbreaks);
    for (std::size_t i = 0; i < gr.size(); ++i) {
      for (const auto& o : channel.discrete_support) {
        const double m = o.mass(gr.nodes[i]);
        if (m == 0.0) continue;
        rule.g.push_back(gr.nodes[i]);
        rule.y.push_back(o.value);
        rule.w.push_back(gr.weights[i] * m);
      }
    }
    return rule;
  }

  if (channel.noise_std == 0.0) {
    for (double c : ykinks) {
      const auto pre = link_preimages(channel, c);
      gbreaks.insert(gbreaks.end(), pre.begin(), pre.end());
    }
    const Rule1D gr = gaussian_rule(order, gbreaks);
    for (std::size_t i = 0; i < gr.size(); ++i) {
      rule.g.push_back(gr.nodes[i]);
      rule.y.push_back(channel.link(gr.nodes[i]));
      rule.w.push_back(gr.weights[i]);
    }
    return rule;
  }

  const double sigma = channel.noise_std;
  const Rule1D gr = gaussian_rule(order, gbreaks);
  const Rule1D& plain = gauss_hermite(order);
  std::vector<double> zk;
  for (std::size_t i = 0; i < gr.size(); ++i) {
    const double g = gr.nodes[i];
    const double fg = channel.link(g);
    zk.clear();
    for (double c : ykinks) zk.push_back((c - fg) / sigma);
    const Rule1D zr = ykinks.empty() ? plain : gaussian_rule(order, zk);
    for (std::size_t j = 0; j < zr.size(); ++j) {
      rule.g.push_back(g);
      rule.y.push_back(fg + sigma * zr.nodes[j]);
      rule.w.push_back(gr.weights[i] * zr.weights[j]);
    }
  }
  return rule;
}

double expect(const ExpectationSpec& spec) {
  return expect_adaptive(spec, {});
}

double expect_adaptive(const ExpectationSpec& spec, std::span<const double> kink_points) {
  if (!spec.integrand) throw DomainError("expectation integrand is empty");
  if (!std::is_sorted(kink_points.begin(), kink_points.end())) {
    throw DomainError("kink points must be sorted");
  }
  const JointRule rule = joint_rule(spec.channel, spec.order, kink_points);
  return integrate(rule, spec.integrand);
}

}  // namespace glmcomb
