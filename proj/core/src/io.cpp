#include "glmcomb/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "glmcomb/error.hpp"
#include "glmcomb/rng.hpp"

namespace glmcomb {

using nlohmann::json;

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

json json_number(double x) {
  if (std::isfinite(x)) return x;
  return format_double(x);
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
    out << content;
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error("write to '" + tmp.string() + "' failed");
    }
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error("cannot rename onto '" + path + "'");
  }
}

json prediction_json(const AsymptoticPrediction& p) {
  const auto& fp = p.fixed_point;
  json j{{"delta", p.delta},
         {"rho_l", p.rho_l},
         {"n_l", p.n_l},
         {"rho_s", p.rho_s},
         {"q", p.q},
         {"theta_star", json_number(p.theta_star)},
         {"f_theta_star", p.f_theta_star},
         {"rho_max", p.rho_max},
         {"p", p.p},
         {"lambda1_over_dn", p.lambda1_dn},
         {"lambda2_over_dn", p.lambda2_dn},
         {"lambda_star", fp.lambda_star},
         {"bar_lambda", fp.bar_lambda},
         {"tau", fp.tau},
         {"fixed_point_residual", fp.residual},
         {"below_threshold", p.below_threshold()}};
  j["rho_star_bayes"] = p.rho_star_bayes ? json(*p.rho_star_bayes) : json(nullptr);
  j["rho_star_bayes_se"] = p.rho_star_bayes_se ? json(*p.rho_star_bayes_se) : json(nullptr);
  return j;
}

json preopt_json(const PreprocOptResult& r, double delta) {
  return json{{"delta", delta},
              {"rho_l_star", r.rho_l_star},
              {"rho_s_star", r.rho_s_star},
              {"beta_delta", json_number(r.beta_delta)},
              {"gamma_delta", json_number(r.gamma_delta)},
              {"delta_star", r.delta_star_infinite ? json("inf") : json_number(r.delta_star)},
              {"winner", to_string(r.winner)}};
}

std::string records_csv(const ExperimentResult& res) {
  std::ostringstream os;
  os << "delta,replicate,estimator,correlation,norm,seconds\n";
  for (const auto& r : res.records) {
    os << format_double(r.delta) << ',' << r.replicate << ',' << r.estimator << ','
       << format_double(r.correlation) << ',' << format_double(r.norm) << ','
       << format_double(r.seconds) << '\n';
  }
  return os.str();
}

json sidecar_json(const ExperimentResult& res) {
  json j;
  j["config"] = to_json(res.config);
  j["rng_algorithm"] = std::string(kRngAlgorithm);
  json deltas = json::array();
  for (const auto& s : res.summaries) {
    json d{{"delta", s.delta},
           {"delta_n", s.delta_n},
           {"failures", s.failures},
           {"spectral_unconverged", s.spectral_unconverged},
           {"prediction", prediction_json(s.prediction)}};
    json stats = json::object();
    for (const auto& e : s.stats) {
      stats[e.estimator] = {{"mean", e.mean}, {"std_error", e.std_error}, {"count", e.count}};
    }
    d["estimators"] = stats;
    // mean GD trajectory per initialization
    std::map<std::string, std::vector<std::vector<double>>> traces;
    std::map<std::string, int> diverged;
    for (const auto& g : res.gd) {
      if (g.delta != s.delta) continue;
      traces[g.init].push_back(g.correlation);
      diverged[g.init] += g.diverged ? 1 : 0;
    }
    if (!traces.empty()) {
      json gd = json::object();
      for (const auto& [init, ts] : traces) {
        std::size_t len = ts.front().size();
        for (const auto& t : ts) len = std::min(len, t.size());
        std::vector<double> mean(len, 0.0);
        for (const auto& t : ts) {
          for (std::size_t i = 0; i < len; ++i) mean[i] += t[i] / static_cast<double>(ts.size());
        }
        gd[init] = {{"mean_correlation", mean}, {"diverged", diverged[init]}};
      }
      d["gd"] = gd;
    }
    deltas.push_back(d);
  }
  j["deltas"] = deltas;
  return j;
}

std::string gamp_csv(const GampRun& run) {
  std::ostringstream os;
  os << "t,diff_u,diff_v,overlap,se_mu_v,se_sigma_v,spectral_alignment\n";
  for (const auto& r : run.rows) {
    os << r.t << ',' << format_double(r.diff_u) << ',' << format_double(r.diff_v) << ','
       << format_double(r.overlap) << ',' << format_double(r.se_mu_v) << ','
       << format_double(r.se_sigma_v) << ',' << format_double(r.spectral_alignment) << '\n';
  }
  return os.str();
}

std::string preprocessor_csv(const std::vector<double>& ys, const std::vector<double>& ts) {
  if (ys.size() != ts.size()) throw DomainError("preprocessor_csv: size mismatch");
  std::ostringstream os;
  os << "y,T\n";
  for (std::size_t i = 0; i < ys.size(); ++i) {
    os << format_double(ys[i]) << ',' << format_double(ts[i]) << '\n';
  }
  return os.str();
}

std::string theory_csv(const std::vector<AsymptoticPrediction>& preds) {
  std::ostringstream os;
  os << "delta,rho_l,rho_s,q,theta_star,f_theta_star,rho_star_bayes,p,lambda1_over_dn,"
        "lambda2_over_dn,below_threshold\n";
  for (const auto& p : preds) {
    os << format_double(p.delta) << ',' << format_double(p.rho_l) << ','
       << format_double(p.rho_s) << ',' << format_double(p.q) << ','
       << format_double(p.theta_star) << ',' << format_double(p.f_theta_star) << ','
       << (p.rho_star_bayes ? format_double(*p.rho_star_bayes) : std::string("nan")) << ','
       << format_double(p.p) << ',' << format_double(p.lambda1_dn) << ','
       << format_double(p.lambda2_dn) << ',' << (p.below_threshold() ? 1 : 0) << '\n';
  }
  return os.str();
}

}  // namespace glmcomb
