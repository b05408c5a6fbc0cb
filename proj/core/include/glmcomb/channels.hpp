#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace glmcomb {

using ScalarFn = std::function<double(double)>;

enum class PriorKind { gaussian_sphere, binary };

/// Law of the signal entries. Both kinds have unit second moment and are
/// sampled so that ||x||^2 = d.
struct SignalPrior {
  PriorKind kind = PriorKind::gaussian_sphere;
  double p = 0.5;  // P(X = +1), binary only

  static SignalPrior gaussian_sphere() { return {}; }
  static SignalPrior binary(double p);

  void validate() const;
  double mean() const;
  std::string name() const;
};

enum class OutputKind { continuous, discrete };

/// One output value of a discrete channel with its conditional mass g -> P(Y = value | G = g).
struct DiscreteOutcome {
  double value = 0.0;
  ScalarFn mass;
};

/// Output channel p(y | g). Continuous channels are y = f(g) + sigma * z.
/// Discrete channels carry an explicit list of outcomes.
struct Channel {
  std::string name;
  ScalarFn link;
  ScalarFn link_derivative;
  double noise_std = 0.0;
  OutputKind output_kind = OutputKind::continuous;
  std::vector<DiscreteOutcome> discrete_support;
  /// Points in g where the link or a conditional mass is not smooth.
  std::vector<double> g_breakpoints;

  void validate() const;
  bool is_discrete() const { return output_kind == OutputKind::discrete; }
};

struct LinkFunction {
  std::string name;
  ScalarFn f;
  ScalarFn derivative;
  std::vector<double> breakpoints;
};

/// Built-in links: "x", "x^2", "0.3x+x^2", "0.3x+0.5x^2", "0.3x+0.5(x^2-1)",
/// "1+0.3x+(x^2-1)", "max(x,-0.4x)", "abs_switch_1.5", "sign", "abs".
LinkFunction builtin_link(std::string_view name);
const std::vector<std::string>& builtin_link_names();

/// y = f(g) + sigma z with a built-in link.
Channel make_channel(std::string_view link, double noise_std);
/// Noiseless 1-bit channel y = sign(g), registered as discrete output.
Channel sign_channel();
/// Discrete channel from outcomes; masses must sum to one for every g.
Channel make_discrete_channel(std::string name, std::vector<DiscreteOutcome> outcomes,
                              std::vector<double> g_breakpoints = {});

/// Solutions of f(g) = y with |g| <= kGaussianHalfWidth, found per monotone
/// piece between breakpoints.
std::vector<double> link_preimages(const Channel& channel, double y);

struct Instance {
  Eigen::VectorXd x;
  Eigen::MatrixXd A;  // n x d, entries N(0, 1/d)
  Eigen::VectorXd g;  // A x
  Eigen::VectorXd y;
  std::uint64_t seed = 0;

  Eigen::Index n() const { return A.rows(); }
  Eigen::Index d() const { return A.cols(); }
  double delta_n() const { return static_cast<double>(n()) / static_cast<double>(d()); }
};

/// n = round(delta * d). The signal, the matrix and the channel noise are
/// drawn from three streams derived from `seed`.
Instance sample_instance(const SignalPrior& prior, const Channel& channel, int d, double delta,
                         std::uint64_t seed);

/// Draw y given g for one measurement.
double sample_output(const Channel& channel, double g, double uniform, double normal);

struct ChannelMoments {
  double mu0 = 0.0;
  double mu1 = 0.0;
  double mu2 = 0.0;
};

/// mu_k(y) = E_G[G^k p(y | G)]. For discrete channels p is the mass of the
/// outcome equal to y. Noiseless continuous channels use the change of
/// variables over the preimages of y and throw when the density is infinite.
ChannelMoments channel_moments(const Channel& channel, double y);

}  // namespace glmcomb
