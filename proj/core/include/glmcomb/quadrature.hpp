#pragma once

#include <cmath>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "glmcomb/channels.hpp"
#include "glmcomb/error.hpp"

namespace glmcomb {

/// Gaussian integrals are truncated to [-kGaussianHalfWidth, kGaussianHalfWidth]
/// whenever a piecewise rule is used; the neglected mass is below 1e-22.
inline constexpr double kGaussianHalfWidth = 10.0;
inline constexpr int kDefaultOrder = 80;

struct Rule1D {
  std::vector<double> nodes;
  std::vector<double> weights;
  std::size_t size() const { return nodes.size(); }
};

/// Probabilists' Gauss-Hermite rule; weights sum to one so that the rule
/// computes E{h(G)} for G ~ N(0, 1). Cached per order.
const Rule1D& gauss_hermite(int order);
/// Gauss-Legendre rule on [-1, 1]. Cached per order.
const Rule1D& gauss_legendre(int order);

/// Rule for E{h(G)}, G ~ N(0, 1). With no breakpoint inside the truncation
/// window this is exactly gauss_hermite(order); otherwise composite
/// Gauss-Legendre on panels split at the breakpoints.
Rule1D gaussian_rule(int order, std::span<const double> breakpoints);

/// Nodes (g, y, w) such that sum w h(g, y) = E{h(G, Y)} with Y ~ p(. | G).
struct JointRule {
  std::vector<double> g;
  std::vector<double> y;
  std::vector<double> w;
  std::size_t size() const { return w.size(); }
};

/// `y_kinks` are output values at which the integrand may be non-smooth.
JointRule joint_rule(const Channel& channel, int order = kDefaultOrder,
                     std::span<const double> y_kinks = {});

struct ExpectationSpec {
  std::function<double(double, double)> integrand;  // (g, y)
  Channel channel;
  int order = kDefaultOrder;
};

double expect(const ExpectationSpec& spec);
double expect_adaptive(const ExpectationSpec& spec, std::span<const double> kink_points);

/// Weighted sum over a prebuilt rule. Throws NumericalError naming the
/// first node where the integrand is not finite.
template <class F>
double integrate(const JointRule& rule, F&& h) {
  double acc = 0.0;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double v = h(rule.g[i], rule.y[i]);
    if (!std::isfinite(v)) {
      throw NumericalError("non-finite integrand at node g=" + std::to_string(rule.g[i]) +
                           ", y=" + std::to_string(rule.y[i]));
    }
    acc += rule.w[i] * v;
  }
  return acc;
}

}  // namespace glmcomb
