#include "glmcomb/gamp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "glmcomb/error.hpp"
#include "glmcomb/estimators.hpp"

namespace glmcomb {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void check_finite(const Eigen::VectorXd& v, int t, const char* what) {
  if (!v.allFinite()) {
    throw NumericalError(std::string("non-finite ") + what + " at iteration " + std::to_string(t));
  }
}

double alignment(const Eigen::VectorXd& v, const Eigen::VectorXd* ref) {
  if (ref == nullptr) return kNaN;
  return std::abs(v.dot(*ref)) / (v.norm() * ref->norm());
}

}  // namespace

SeMoments se_moments(const Channel& channel, const Preprocessor& t_l, const Preprocessor& t,
                     int order) {
  std::vector<double> kinks = t_l.kinks;
  kinks.insert(kinks.end(), t.kinks.begin(), t.kinks.end());
  std::sort(kinks.begin(), kinks.end());
  kinks.erase(std::unique(kinks.begin(), kinks.end()), kinks.end());
  const JointRule rule = joint_rule(channel, order, kinks);
  SeMoments m;
  for (std::size_t i = 0; i < rule.size(); ++i) {
    const double g = rule.g[i], w = rule.w[i];
    const double z = t(rule.y[i]), zl = t_l(rule.y[i]);
    if (!std::isfinite(z) || !std::isfinite(zl)) {
      throw NumericalError("non-finite preprocessor value at y=" + std::to_string(rule.y[i]));
    }
    m.e_z += w * z;
    m.e_zg2 += w * z * g * g;
    m.e_z2 += w * z * z;
    m.e_z2g2 += w * z * z * g * g;
    m.e_tlg += w * zl * g;
    m.e_tl2 += w * zl * zl;
    m.e_tlzg += w * zl * z * g;
  }
  return m;
}

SeFixedPoint se_fixed_point(const SeMoments& m, double delta) {
  SeFixedPoint fp;
  const double h = m.e_zg2 - m.e_z;
  const bool ok = h > 0.0 && delta > m.e_z2 / (h * h);
  if (!ok) {
    fp.trivial = true;
    fp.sigma_v_tilde = std::sqrt(m.e_z2);
    fp.beta_tilde = fp.sigma_v_tilde;
    return fp;
  }
  const double b2 = delta * h * h;
  const double den = b2 + m.e_z2g2 - m.e_z2;
  fp.beta_tilde = std::sqrt(b2);
  fp.mu_v_tilde = std::sqrt(std::max(0.0, b2 * (b2 - m.e_z2) / den));
  fp.sigma_v_tilde = std::sqrt(b2 * m.e_z2g2 / den);
  return fp;
}

SeFixedPoint se_fixed_point(const Channel& channel, const Preprocessor& t, double delta,
                            int order) {
  return se_fixed_point(se_moments(channel, identity_preprocessor(), t, order), delta);
}

StateEvolutionTrace se_run(const SeMoments& m, double delta, int steps) {
  if (!(delta > 0.0)) throw DomainError("delta must be positive");
  if (steps < 1) throw DomainError("state evolution needs at least one step");
  if (!(std::abs(m.e_tlg) > 0.0)) throw DomainError("E{T_L(Y) G} = 0");
  StateEvolutionTrace tr;
  tr.fixed_point = se_fixed_point(m, delta);
  const double sd = std::sqrt(delta);
  double mu = m.e_tlg;
  double s2 = m.e_tl2 / delta;
  const double sigma1 = std::sqrt(s2);
  double prev_mu_u = 0.0;
  double prev_b2 = -1.0;
  for (int t = 1; t <= steps; ++t) {
    SeStep st;
    st.mu_v = mu;
    st.sigma2_v = s2;
    st.beta = std::sqrt(mu * mu + s2);
    st.mu_u = mu / (sd * st.beta);
    st.sigma2_u = s2 / (delta * st.beta * st.beta);
    if (t >= 2) st.corr_v1 = prev_mu_u * m.e_tlzg / (sigma1 * std::sqrt(s2));
    if (!(s2 > 0.0) || !std::isfinite(st.beta)) {
      throw NumericalError("state evolution degenerated at t=" + std::to_string(t));
    }
    const double b2 = st.beta * st.beta;
    if (tr.converged_at < 0 && prev_b2 >= 0.0 && std::abs(b2 - prev_b2) < 1e-12) {
      tr.converged_at = t;
    }
    prev_b2 = b2;
    prev_mu_u = st.mu_u;
    tr.steps.push_back(st);
    const double nmu = sd * mu / st.beta * (m.e_zg2 - m.e_z);
    const double ns2 = (mu * mu * m.e_z2g2 + s2 * m.e_z2) / b2;
    mu = nmu;
    s2 = ns2;
  }
  const auto& fp = tr.fixed_point;
  if (!fp.trivial && fp.sigma_v_tilde > 0.0 && m.e_tl2 > 0.0) {
    tr.corr_v1_limit = fp.mu_v_tilde * m.e_tlzg / (fp.beta_tilde * fp.sigma_v_tilde * std::sqrt(m.e_tl2));
    if (m.e_tlg < 0.0) tr.corr_v1_limit = -tr.corr_v1_limit;  // iterates approach FP2
  }
  return tr;
}

StateEvolutionTrace se_run(const Channel& channel, const Preprocessor& t_l,
                           const Preprocessor& t, double delta, int steps, int order) {
  return se_run(se_moments(channel, t_l, t, order), delta, steps);
}

Preprocessor ztilde_preprocessor(const Preprocessor& t_s, double lambda_star) {
  t_s.validate();
  if (!(lambda_star > t_s.sup_support)) {
    throw DomainError("lambda* must exceed the support bound of T_s");
  }
  Preprocessor p;
  p.name = "ztilde(" + t_s.name + ")";
  p.t = [f = t_s.t, lambda_star](double y) {
    const double z = f(y);
    return z / (lambda_star - z);
  };
  p.sup_support = t_s.sup_support / (lambda_star - t_s.sup_support);
  p.kinks = t_s.kinks;
  p.bounded = t_s.bounded || std::isfinite(t_s.sup_support);
  p.lipschitz = t_s.lipschitz;
  return p;
}

GampRun gamp_power_run(const Instance& inst, const GampConfig& cfg,
                       const Eigen::VectorXd* reference) {
  if (cfg.max_t < 1) throw DomainError("max_t must be positive");
  const double delta_se = cfg.delta > 0.0 ? cfg.delta : inst.delta_n();
  const Preprocessor zt = ztilde_preprocessor(cfg.t_s, cfg.lambda_star);
  const SeMoments mom = se_moments(cfg.channel, cfg.t_l, zt, cfg.order);
  const StateEvolutionTrace se = se_run(mom, delta_se, cfg.max_t);

  const double n = static_cast<double>(inst.n());
  const double d = static_cast<double>(inst.d());
  const double sd = std::sqrt(n / d);
  const Eigen::VectorXd zl = apply_preprocessor(cfg.t_l, inst.y);
  const Eigen::VectorXd z = apply_preprocessor(zt, inst.y);
  const double ez = cfg.onsager == OnsagerMode::limit ? mom.e_z : z.mean();

  GampRun run;
  Eigen::VectorXd u_prev = Eigen::VectorXd::Constant(inst.n(), d / n);  // u^0 = 1/delta
  // v^1 = (1/delta) A^T T_L(y), formed exactly as sqrt(d) * x_L
  Eigen::VectorXd v = std::sqrt(d) * linear_estimate(inst, cfg.t_l);
  run.v1 = v;
  Eigen::VectorXd u(inst.n()), v_next(inst.d());
  for (int t = 1; t <= cfg.max_t; ++t) {
    const double beta = se.steps[t - 1].beta;
    u.noalias() = inst.A * v;
    if (t == 1) {
      u.array() -= zl.array() * u_prev.array();
    } else {
      u.array() -= z.array() * u_prev.array();
    }
    u /= sd * beta;
    check_finite(u, t, "u");
    Eigen::VectorXd zu = z.cwiseProduct(u);
    v_next.noalias() = inst.A.transpose() * zu;
    v_next -= (sd * ez / beta) * v;
    check_finite(v_next, t, "v");

    GampRow row;
    row.t = t;
    row.diff_u = (u - u_prev).squaredNorm() / n;
    row.diff_v = (v_next - v).squaredNorm() / d;
    row.overlap = v.dot(inst.x) / d;
    row.se_mu_v = se.steps[t - 1].mu_v;
    row.se_sigma_v = std::sqrt(se.steps[t - 1].sigma2_v);
    row.spectral_alignment = alignment(v, reference);
    run.rows.push_back(row);

    if (t == cfg.max_t) break;
    u_prev.swap(u);
    v.swap(v_next);
  }
  run.u = u;
  run.v = v;
  return run;
}

GampRun gamp_general_run(const Instance& inst, const GampDenoisers& den, double c, int steps,
                         const Eigen::VectorXd* reference, const StateEvolutionTrace* se) {
  if (steps < 1) throw DomainError("steps must be positive");
  if (!den.f || !den.df || !den.g || !den.dg) throw DomainError("GAMP denoisers incomplete");
  const Eigen::Index n = inst.n(), d = inst.d();
  const double nd = static_cast<double>(n), dd = static_cast<double>(d);
  const double isd = 1.0 / std::sqrt(nd / dd);
  const Eigen::VectorXd& y = inst.y;

  auto apply_g = [&](int t, const Eigen::VectorXd& u) {
    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) out(i) = den.g(t, u(i), y(i));
    return out;
  };

  GampRun run;
  Eigen::VectorXd u_prev = Eigen::VectorXd::Constant(n, c);
  Eigen::VectorXd g_prev = apply_g(0, u_prev);
  Eigen::VectorXd v = isd * (inst.A.transpose() * g_prev);
  run.v1 = v;
  Eigen::VectorXd u(n), fv(d), v_next(d);
  for (int t = 1; t <= steps; ++t) {
    double b = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      fv(j) = den.f(t, v(j));
      b += den.df(t, v(j));
    }
    b /= nd;
    u.noalias() = inst.A * fv;
    u = isd * u - b * g_prev;
    check_finite(u, t, "u");
    Eigen::VectorXd gu = apply_g(t, u);
    double cc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) cc += den.dg(t, u(i), y(i));
    cc /= nd;
    v_next.noalias() = inst.A.transpose() * gu;
    v_next = isd * v_next - cc * fv;
    check_finite(v_next, t, "v");

    GampRow row;
    row.t = t;
    row.diff_u = (u - u_prev).squaredNorm() / nd;
    row.diff_v = (v_next - v).squaredNorm() / dd;
    row.overlap = v.dot(inst.x) / dd;
    if (se != nullptr && t <= static_cast<int>(se->steps.size())) {
      row.se_mu_v = se->steps[t - 1].mu_v;
      row.se_sigma_v = std::sqrt(se->steps[t - 1].sigma2_v);
    } else {
      row.se_mu_v = row.se_sigma_v = kNaN;
    }
    row.spectral_alignment = alignment(v, reference);
    run.rows.push_back(row);

    if (t == steps) break;
    u_prev.swap(u);
    g_prev.swap(gu);
    v.swap(v_next);
  }
  run.u = u;
  run.v = v;
  return run;
}

}  // namespace glmcomb
