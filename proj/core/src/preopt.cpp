#include "glmcomb/preopt.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "glmcomb/asymptotics.hpp"
#include "glmcomb/error.hpp"
#include "glmcomb/quadrature.hpp"

namespace glmcomb {

namespace {

constexpr double kGRange = 8.0;
constexpr double kTiny = 1e-300;

std::pair<double, double> link_range(const Channel& c) {
  double lo = kInf, hi = -kInf;
  constexpr int kScan = 4001;
  for (int i = 0; i < kScan; ++i) {
    const double v = c.link(-kGRange + 2.0 * kGRange * i / (kScan - 1));
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  for (double b : c.g_breakpoints) {
    if (std::abs(b) <= kGRange) {
      lo = std::min(lo, c.link(b));
      hi = std::max(hi, c.link(b));
    }
  }
  return {lo, hi};
}

// Lookup on a discrete output alphabet; values off the alphabet map to the nearest outcome.
Preprocessor lookup_preprocessor(std::string name, std::vector<double> ys, std::vector<double> ts) {
  std::map<double, double> table;
  for (std::size_t i = 0; i < ys.size(); ++i) table[ys[i]] = ts[i];
  Preprocessor p;
  p.name = std::move(name);
  p.sup_support = *std::max_element(ts.begin(), ts.end());
  p.bounded = true;
  p.t = [table](double y) {
    auto it = table.lower_bound(y);
    if (it == table.end()) return std::prev(it)->second;
    if (it == table.begin()) return it->second;
    auto lo = std::prev(it);
    return (y - lo->first <= it->first - y) ? lo->second : it->second;
  };
  return p;
}

struct Tab {
  std::vector<double> y, m0, m1, m2;
};

Tab tabulate(const Channel& channel) {
  Tab t;
  if (channel.is_discrete()) {
    for (const auto& o : channel.discrete_support) {
      const ChannelMoments m = channel_moments(channel, o.value);
      if (m.mu0 <= kTiny) continue;
      t.y.push_back(o.value);
      t.m0.push_back(m.mu0);
      t.m1.push_back(m.mu1);
      t.m2.push_back(m.mu2);
    }
    return t;
  }
  auto [lo, hi] = link_range(channel);
  lo -= 8.0 * channel.noise_std;
  hi += 8.0 * channel.noise_std;
  for (int i = 0; i < kTabulationPoints; ++i) {
    const double y = lo + (hi - lo) * i / (kTabulationPoints - 1);
    ChannelMoments m;
    try {
      m = channel_moments(channel, y);
    } catch (const NumericalError&) {
      continue;  // no finite density here (noiseless stationary point)
    }
    if (m.mu0 <= kTiny) continue;
    t.y.push_back(y);
    t.m0.push_back(m.mu0);
    t.m1.push_back(m.mu1);
    t.m2.push_back(m.mu2);
  }
  return t;
}

Preprocessor make_table_preprocessor(const Channel& channel, const std::string& name,
                                     const std::vector<double>& ys, const std::vector<double>& ts) {
  if (channel.is_discrete()) return lookup_preprocessor(name, ys, ts);
  return tabulated_preprocessor(name, ys, ts);
}

}  // namespace

double DensityTable::integrate(
    const std::function<double(double, double, double, double)>& f) const {
  double acc = 0.0;
  for (std::size_t k = 0; k < y.size(); ++k) {
    const double v = f(y[k], mu0[k], mu1[k], mu2[k]);
    if (!std::isfinite(v)) {
      throw NumericalError("non-finite output integrand at y=" + std::to_string(y[k]));
    }
    acc += weight[k] * v;
  }
  return acc;
}

DensityTable density_table(const Channel& channel, const std::vector<double>& y_kinks) {
  channel.validate();
  DensityTable t;
  auto push = [&](double y, double w, const ChannelMoments& m) {
    if (m.mu0 <= kTiny) return;
    t.y.push_back(y);
    t.weight.push_back(w);
    t.mu0.push_back(m.mu0);
    t.mu1.push_back(m.mu1);
    t.mu2.push_back(m.mu2);
  };

  if (channel.is_discrete()) {
    for (const auto& o : channel.discrete_support) push(o.value, 1.0, channel_moments(channel, o.value));
    t.y_min = t.y.empty() ? 0.0 : *std::min_element(t.y.begin(), t.y.end());
    t.y_max = t.y.empty() ? 0.0 : *std::max_element(t.y.begin(), t.y.end());
  } else if (channel.noise_std == 0.0) {
    // integral of F(mu(y)) dy = E_G[F(mu(f(G))) / mu0(f(G))]
    const Rule1D r = gaussian_rule(kDefaultOrder * 2, channel.g_breakpoints);
    for (std::size_t i = 0; i < r.size(); ++i) {
      const double y = channel.link(r.nodes[i]);
      const ChannelMoments m = channel_moments(channel, y);
      push(y, r.weights[i] / m.mu0, m);
    }
    auto [lo, hi] = link_range(channel);
    t.y_min = lo;
    t.y_max = hi;
  } else {
    auto [lo, hi] = link_range(channel);
    const double s = channel.noise_std;
    lo -= 8.0 * s;
    hi += 8.0 * s;
    t.y_min = lo;
    t.y_max = hi;
    std::vector<double> edges{lo};
    for (double k : y_kinks) {
      if (k > lo && k < hi) edges.push_back(k);
    }
    edges.push_back(hi);
    std::sort(edges.begin(), edges.end());
    const double width = std::min((hi - lo) / 256.0, s);
    const Rule1D& gl = gauss_legendre(16);
    for (std::size_t e = 0; e + 1 < edges.size(); ++e) {
      const double a = edges[e], b = edges[e + 1];
      if (b - a < 1e-14) continue;
      const int pieces = std::max(1, static_cast<int>(std::ceil((b - a) / width)));
      const double h = (b - a) / pieces;
      for (int p = 0; p < pieces; ++p) {
        const double mid = a + (p + 0.5) * h;
        for (std::size_t i = 0; i < gl.size(); ++i) {
          const double y = mid + 0.5 * h * gl.nodes[i];
          push(y, 0.5 * h * gl.weights[i], channel_moments(channel, y));
        }
      }
    }
  }
  double mass = 0.0;
  for (std::size_t k = 0; k < t.y.size(); ++k) mass += t.weight[k] * t.mu0[k];
  t.mass_defect = std::abs(1.0 - mass);
  return t;
}

double h_function(const DensityTable& table, double t) {
  if (!(t > 0.0)) throw DomainError("h is defined for t > 0");
  return table.integrate([t](double, double m0, double, double m2) {
    const double d = m2 - m0;
    return d * d / (m0 + m2 / t);
  });
}

namespace {

double linear_information(const DensityTable& tab) {
  return tab.integrate([](double, double m0, double m1, double) { return m1 * m1 / m0; });
}

double spectral_information(const DensityTable& tab) {
  return tab.integrate([](double, double m0, double, double m2) {
    const double d = m2 - m0;
    return d * d / m0;
  });
}

void check_delta(double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw DomainError("delta must be positive");
}

// Solve h(beta) = 1/delta; requires 1/delta < h(inf).
SpectralOptimum solve_beta(const DensityTable& tab, double delta, double h_inf) {
  SpectralOptimum r;
  const double target = 1.0 / delta;
  if (!(target < h_inf)) {
    if (std::abs(target - h_inf) <= 1e-12 * h_inf) {
      r.beta_delta = kInf;
      r.rho = 0.0;
      return r;
    }
    throw DomainError("delta is below delta*: the optimal spectral estimator is uncorrelated");
  }
  double lo = 1e-8, hi = 1e8;
  while (h_function(tab, lo) > target) lo *= 1e-2;
  while (h_function(tab, hi) < target) {
    hi *= 1e2;
    if (hi > 1e300) throw NumericalError("could not bracket beta_delta");
  }
  // bisect in log scale
  for (int it = 0; it < 300; ++it) {
    const double mid = std::sqrt(lo * hi);
    if (mid <= lo || mid >= hi) break;
    (h_function(tab, mid) < target ? lo : hi) = mid;
  }
  r.beta_delta = std::sqrt(lo * hi);
  r.residual = h_function(tab, r.beta_delta) - target;
  r.rho = 1.0 / std::sqrt(1.0 + r.beta_delta);
  return r;
}

}  // namespace

Preprocessor optimal_tl(const Channel& channel) {
  const DensityTable tab = density_table(channel);
  const double i1 = linear_information(tab);
  if (!(i1 > 1e-14) || !std::isfinite(i1)) {
    throw DomainError("integral of mu1^2/mu0 is zero or infinite: no useful linear preprocessor");
  }
  const Tab t = tabulate(channel);
  std::vector<double> ts(t.y.size());
  for (std::size_t i = 0; i < ts.size(); ++i) ts[i] = t.m1[i] / t.m0[i];
  Preprocessor p = make_table_preprocessor(channel, "optimal_tl", t.y, ts);
  p.sup_support = kInf;
  return p;
}

double rho_l_star(const Channel& channel, double delta) {
  check_delta(delta);
  const DensityTable tab = density_table(channel);
  const double i1 = linear_information(tab);
  if (!(i1 > 1e-14) || !std::isfinite(i1)) {
    throw DomainError("integral of mu1^2/mu0 is zero or infinite");
  }
  return 1.0 / std::sqrt(1.0 + 1.0 / (delta * i1));
}

Preprocessor optimal_ts(const Channel& channel) {
  const Tab t = tabulate(channel);
  if (t.y.size() < 2) throw DomainError("channel has too few output values to tabulate");
  double inf_ratio = kInf;
  std::vector<double> ts(t.y.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    inf_ratio = std::min(inf_ratio, t.m2[i] / t.m0[i]);
    ts[i] = 1.0 - t.m0[i] / t.m2[i];
  }
  if (!(inf_ratio > 1e-12)) {
    throw DomainError("inf mu2/mu0 is zero: the optimal spectral preprocessor is unbounded; "
                      "supply a bounded approximation instead");
  }
  return make_table_preprocessor(channel, "optimal_ts", t.y, ts);
}

DeltaStar delta_star(const Channel& channel) {
  const DensityTable tab = density_table(channel);
  const double i2 = spectral_information(tab);
  DeltaStar d;
  if (!(i2 > 1e-14)) {
    d.value = kInf;
    d.infinite = true;
  } else {
    d.value = 1.0 / i2;
  }
  return d;
}

SpectralOptimum rho_s_star(const Channel& channel, double delta) {
  check_delta(delta);
  const DensityTable tab = density_table(channel);
  const double i2 = spectral_information(tab);
  if (!(i2 > 1e-14)) throw DomainError("delta* is infinite for this channel");
  return solve_beta(tab, delta, i2);
}

std::string to_string(Winner w) {
  switch (w) {
    case Winner::linear: return "linear";
    case Winner::spectral: return "spectral";
    default: return "tie";
  }
}

PreprocOptResult linear_vs_spectral(const Channel& channel, double delta) {
  check_delta(delta);
  const DensityTable tab = density_table(channel);
  const double i1 = linear_information(tab);
  const double i2 = spectral_information(tab);
  PreprocOptResult r;
  r.rho_l_star = i1 > 1e-14 ? 1.0 / std::sqrt(1.0 + 1.0 / (delta * i1)) : 0.0;
  r.gamma_delta = i1 > 1e-14 ? 1.0 / (delta * i1) : kInf;
  if (i2 > 1e-14) {
    r.delta_star = 1.0 / i2;
    if (delta > r.delta_star) {
      const SpectralOptimum so = solve_beta(tab, delta, i2);
      r.rho_s_star = so.rho;
      r.beta_delta = so.beta_delta;
    } else {
      r.beta_delta = kInf;
    }
  } else {
    r.delta_star = kInf;
    r.delta_star_infinite = true;
    r.beta_delta = kInf;
  }
  const double hg = std::isinf(r.gamma_delta) ? i2 : h_function(tab, r.gamma_delta);
  const double lhs = delta * hg;
  if (std::abs(lhs - 1.0) <= 1e-10) {
    r.winner = Winner::tie;
  } else {
    r.winner = lhs > 1.0 ? Winner::spectral : Winner::linear;
  }
  return r;
}

CombinedObjective combined_objective(const Channel& channel, const Preprocessor& t_l,
                                     const Preprocessor& t_s, double delta) {
  check_delta(delta);
  const SpectralFixedPoint fp = spectral_fixed_point(channel, t_s, delta);
  if (!fp.above_threshold) throw DomainError("combined objective needs delta above threshold");
  std::vector<double> kinks = t_l.kinks;
  kinks.insert(kinks.end(), t_s.kinks.begin(), t_s.kinks.end());
  const DensityTable tab = density_table(channel, kinks);
  const double ls = fp.lambda_star;

  const double e1 = tab.integrate([&](double y, double, double m1, double) { return t_l(y) * m1; });
  if (e1 == 0.0) throw DomainError("integral of T_L mu1 is zero");
  const double es = tab.integrate(
      [&](double y, double, double m1, double) { return t_l(y) * m1 / (1.0 - t_s(y) / ls); });
  const double el2 = tab.integrate([&](double y, double m0, double, double) {
    const double z = t_l(y);
    return z * z * m0;
  });
  auto zt2 = [&](double y) {
    const double z = t_s(y);
    const double r = z / (ls - z);
    return r * r;
  };
  const double ez2g2 = tab.integrate([&](double y, double, double, double m2) { return zt2(y) * m2; });
  const double ez2 = tab.integrate([&](double y, double m0, double, double) { return zt2(y) * m0; });

  CombinedObjective c;
  c.s = es / e1;
  c.a = el2 / (delta * e1 * e1);
  c.b = ez2g2 / (1.0 / delta - ez2);
  c.f2 = (2.0 - 2.0 * c.s + c.a + c.b) / ((1.0 + c.a) * (1.0 + c.b) - c.s * c.s);

  const LinearPrediction lin = rho_linear(channel, t_l, delta);
  const double rs = rho_spectral(fp);
  const double q = cross_correlation_q(channel, t_l, t_s, delta, fp).q;
  const double f = optimal_theta(lin.rho_l, rs, q).f_theta_star;
  c.f2_direct = f * f;
  if (std::abs(c.f2 - c.f2_direct) > 1e-6) {
    throw NumericalError("output-integral and direct forms of F^2(theta*) disagree: " +
                         std::to_string(c.f2) + " vs " + std::to_string(c.f2_direct));
  }
  return c;
}

}  // namespace glmcomb
