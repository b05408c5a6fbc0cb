#include "glmcomb/channels.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/roots.hpp>

#include "glmcomb/error.hpp"
#include "glmcomb/quadrature.hpp"
#include "glmcomb/rng.hpp"

namespace glmcomb {

namespace {

double sgn(double x) { return (x > 0) - (x < 0); }

double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

// Quadratic link a x + b x^2 + c; the vertex is a monotone-piece boundary.
LinkFunction quadratic(std::string name, double a, double b, double c) {
  return {std::move(name), [=](double x) { return c + a * x + b * x * x; },
          [=](double x) { return a + 2.0 * b * x; }, {-a / (2.0 * b)}};
}

}  // namespace

SignalPrior SignalPrior::binary(double p) {
  SignalPrior s;
  s.kind = PriorKind::binary;
  s.p = p;
  s.validate();
  return s;
}

void SignalPrior::validate() const {
  if (kind == PriorKind::binary && !(p > 0.0 && p < 1.0)) {
    throw DomainError("binary prior needs p in (0,1), got " + std::to_string(p));
  }
}

double SignalPrior::mean() const { return kind == PriorKind::binary ? 2.0 * p - 1.0 : 0.0; }

std::string SignalPrior::name() const {
  return kind == PriorKind::binary ? "binary" : "gaussian_sphere";
}

void Channel::validate() const {
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std)) {
    throw DomainError("noise standard deviation must be finite and >= 0");
  }
  if (is_discrete()) {
    if (discrete_support.empty()) throw DomainError("discrete channel without outcomes");
    for (const auto& o : discrete_support) {
      if (!o.mass) throw DomainError("discrete outcome without mass function");
    }
  } else if (!link) {
    throw DomainError("continuous channel without link");
  }
}

const std::vector<std::string>& builtin_link_names() {
  static const std::vector<std::string> names = {
      "x", "x^2", "0.3x+x^2", "0.3x+0.5x^2", "0.3x+0.5(x^2-1)", "1+0.3x+(x^2-1)",
      "max(x,-0.4x)", "abs_switch_1.5", "sign", "abs"};
  return names;
}

LinkFunction builtin_link(std::string_view name) {
  if (name == "x" || name == "identity") {
    return {"x", [](double x) { return x; }, [](double) { return 1.0; }, {}};
  }
  if (name == "x^2") return quadratic("x^2", 0.0, 1.0, 0.0);
  if (name == "0.3x+x^2") return quadratic("0.3x+x^2", 0.3, 1.0, 0.0);
  if (name == "0.3x+0.5x^2") return quadratic("0.3x+0.5x^2", 0.3, 0.5, 0.0);
  if (name == "0.3x+0.5(x^2-1)") return quadratic("0.3x+0.5(x^2-1)", 0.3, 0.5, -0.5);
  if (name == "1+0.3x+(x^2-1)") return quadratic("1+0.3x+(x^2-1)", 0.3, 1.0, 0.0);
  if (name == "max(x,-0.4x)") {
    return {"max(x,-0.4x)", [](double x) { return std::max(x, -0.4 * x); },
            [](double x) { return x > 0 ? 1.0 : -0.4; }, {0.0}};
  }
  if (name == "abs_switch_1.5") {
    return {"abs_switch_1.5",
            [](double x) { return std::abs(x) >= 1.5 ? std::abs(x) : x; },
            [](double x) { return std::abs(x) >= 1.5 ? sgn(x) : 1.0; },
            {-1.5, 1.5}};
  }
  if (name == "sign") {
    return {"sign", [](double x) { return sgn(x); }, [](double) { return 0.0; }, {0.0}};
  }
  if (name == "abs") {
    return {"abs", [](double x) { return std::abs(x); }, [](double x) { return sgn(x); }, {0.0}};
  }
  throw DomainError("unknown link '" + std::string(name) + "'");
}

Channel make_channel(std::string_view link, double noise_std) {
  LinkFunction lf = builtin_link(link);
  Channel c;
  c.name = lf.name;
  c.link = std::move(lf.f);
  c.link_derivative = std::move(lf.derivative);
  c.noise_std = noise_std;
  c.g_breakpoints = std::move(lf.breakpoints);
  c.validate();
  return c;
}

Channel make_discrete_channel(std::string name, std::vector<DiscreteOutcome> outcomes,
                              std::vector<double> g_breakpoints) {
  Channel c;
  c.name = std::move(name);
  c.output_kind = OutputKind::discrete;
  c.discrete_support = std::move(outcomes);
  c.g_breakpoints = std::move(g_breakpoints);
  c.validate();
  return c;
}

Channel sign_channel() {
  Channel c = make_discrete_channel(
      "sign",
      {{-1.0, [](double g) { return g > 0 ? 0.0 : 1.0; }},
       {1.0, [](double g) { return g > 0 ? 1.0 : 0.0; }}},
      {0.0});
  c.link = [](double x) { return sgn(x); };
  c.link_derivative = [](double) { return 0.0; };
  return c;
}

std::vector<double> link_preimages(const Channel& channel, double y) {
  if (!channel.link) throw DomainError("channel has no link");
  std::vector<double> edges{-kGaussianHalfWidth};
  for (double b : channel.g_breakpoints) {
    if (b > -kGaussianHalfWidth && b < kGaussianHalfWidth) edges.push_back(b);
  }
  edges.push_back(kGaussianHalfWidth);
  std::sort(edges.begin(), edges.end());

  const auto h = [&](double g) { return channel.link(g) - y; };
  constexpr int kScan = 256;
  std::vector<double> roots;
  for (std::size_t s = 0; s + 1 < edges.size(); ++s) {
    // keep scan points strictly inside the piece so jumps at edges are not crossed
    const double lo = edges[s], hi = edges[s + 1];
    const double eps = 1e-13 * std::max(1.0, std::abs(hi - lo));
    double a = lo + eps;
    double ha = h(a);
    if (ha == 0.0) roots.push_back(a);
    for (int k = 1; k <= kScan; ++k) {
      const double b = k == kScan ? hi - eps : lo + (hi - lo) * k / kScan;
      const double hb = h(b);
      if (hb == 0.0) {
        roots.push_back(b);
      } else if (ha != 0.0 && sgn(ha) != sgn(hb)) {
        boost::uintmax_t it = 200;
        auto r = boost::math::tools::toms748_solve(
            h, a, b, ha, hb, boost::math::tools::eps_tolerance<double>(52), it);
        roots.push_back(0.5 * (r.first + r.second));
      }
      a = b;
      ha = hb;
    }
  }
  std::sort(roots.begin(), roots.end());
  roots.erase(std::unique(roots.begin(), roots.end(),
                          [](double u, double v) { return std::abs(u - v) < 1e-12; }),
              roots.end());
  return roots;
}

double sample_output(const Channel& channel, double g, double uniform, double normal) {
  if (channel.is_discrete()) {
    double acc = 0.0;
    for (const auto& o : channel.discrete_support) {
      acc += o.mass(g);
      if (uniform < acc) return o.value;
    }
    return channel.discrete_support.back().value;
  }
  return channel.link(g) + channel.noise_std * normal;
}

Instance sample_instance(const SignalPrior& prior, const Channel& channel, int d, double delta,
                         std::uint64_t seed) {
  prior.validate();
  channel.validate();
  if (d < 2) throw DomainError("d must be at least 2");
  if (!(delta > 0.0) || !std::isfinite(delta)) throw DomainError("delta must be positive");
  const long long n = std::llround(delta * d);
  if (n < 1) throw DomainError("round(delta*d) must be at least 1");

  Instance inst;
  inst.seed = seed;
  inst.x.resize(d);
  Rng rx(derive_seed(seed, 0));
  if (prior.kind == PriorKind::binary) {
    for (int j = 0; j < d; ++j) inst.x(j) = rx.uniform() < prior.p ? 1.0 : -1.0;
  } else {
    for (int j = 0; j < d; ++j) inst.x(j) = rx.normal();
    inst.x *= std::sqrt(static_cast<double>(d)) / inst.x.norm();
  }

  inst.A.resize(n, d);
  Rng ra(derive_seed(seed, 1));
  const double scale = 1.0 / std::sqrt(static_cast<double>(d));
  double* a = inst.A.data();  // column-major fill order is part of the sampling definition
  for (long long k = 0; k < n * d; ++k) a[k] = scale * ra.normal();

  inst.g.noalias() = inst.A * inst.x;
  inst.y.resize(n);
  Rng rn(derive_seed(seed, 2));
  for (long long i = 0; i < n; ++i) {
    const double u = rn.uniform();
    const double z = rn.normal();
    inst.y(i) = sample_output(channel, inst.g(i), u, z);
  }
  return inst;
}

ChannelMoments channel_moments(const Channel& channel, double y) {
  channel.validate();
  ChannelMoments m;
  if (channel.is_discrete()) {
    const DiscreteOutcome* hit = nullptr;
    for (const auto& o : channel.discrete_support) {
      if (std::abs(o.value - y) <= 1e-12 * std::max(1.0, std::abs(y))) hit = &o;
    }
    if (hit == nullptr) return m;
    const Rule1D r = gaussian_rule(kDefaultOrder, channel.g_breakpoints);
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double g = r.nodes[i];
      const double w = r.weights[i] * hit->mass(g);
      m.mu0 += w;
      m.mu1 += w * g;
      m.mu2 += w * g * g;
    }
    return m;
  }

  if (channel.noise_std == 0.0) {
    if (!channel.link_derivative) throw DomainError("noiseless channel needs link derivative");
    for (double r : link_preimages(channel, y)) {
      const double fp = std::abs(channel.link_derivative(r));
      if (fp == 0.0) {
        throw NumericalError("noiseless channel has no density at y=" + std::to_string(y) +
                             " (stationary preimage g=" + std::to_string(r) + ")");
      }
      const double w = normal_pdf(r) / fp;
      m.mu0 += w;
      m.mu1 += w * r;
      m.mu2 += w * r * r;
    }
    if (!std::isfinite(m.mu0 + m.mu1 + m.mu2)) {
      throw NumericalError("non-finite channel moments at y=" + std::to_string(y));
    }
    return m;
  }

  // p(y|g) is a narrow bump around the preimages of y; split there.
  const double s = channel.noise_std;
  std::vector<double> edges{-kGaussianHalfWidth, kGaussianHalfWidth};
  for (double b : channel.g_breakpoints) edges.push_back(b);
  for (double c : {y - 4 * s, y - s, y, y + s, y + 4 * s}) {
    const auto pre = link_preimages(channel, c);
    edges.insert(edges.end(), pre.begin(), pre.end());
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges.erase(std::remove_if(edges.begin(), edges.end(),
                             [](double e) { return std::abs(e) > kGaussianHalfWidth; }),
              edges.end());

  using GK = boost::math::quadrature::gauss_kronrod<double, 31>;
  for (int k = 0; k < 3; ++k) {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
      if (edges[i + 1] - edges[i] < 1e-14) continue;
      auto f = [&](double g) {
        const double gk = k == 0 ? 1.0 : (k == 1 ? g : g * g);
        return gk * normal_pdf(g) * normal_pdf((y - channel.link(g)) / s) / s;
      };
      total += GK::integrate(f, edges[i], edges[i + 1], 12, 1e-12);
    }
    (k == 0 ? m.mu0 : k == 1 ? m.mu1 : m.mu2) = total;
  }
  if (!std::isfinite(m.mu0 + m.mu1 + m.mu2)) {
    throw NumericalError("non-finite channel moments at y=" + std::to_string(y));
  }
  return m;
}

}  // namespace glmcomb
