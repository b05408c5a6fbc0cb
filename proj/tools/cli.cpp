#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include <CLI11.hpp>

#include "glmcomb/asymptotics.hpp"
#include "glmcomb/config.hpp"
#include "glmcomb/error.hpp"
#include "glmcomb/estimators.hpp"
#include "glmcomb/gamp.hpp"
#include "glmcomb/harness.hpp"
#include "glmcomb/io.hpp"
#include "glmcomb/preopt.hpp"
#include "glmcomb/rng.hpp"

namespace glmcomb::cli {

namespace {

using nlohmann::json;

struct Common {
  std::string config_path;
  std::string out_path;
  std::vector<std::string> overrides;
  bool dry_run = false;
  std::string tables_prefix;
};

std::string defaults_listing() {
  const json d = to_json(ExperimentConfig{});
  std::ostringstream os;
  os << "\nConfig keys (JSON file via --config, or key=value overrides):\n";
  for (const auto& k : config_keys()) {
    os << "  " << k.name << " = " << d.at(k.name).dump() << "\n      " << k.description << "\n";
  }
  os << "\nEnvironment: GLMCOMB_WORKERS sets the simulate worker count (default 1).\n";
  return os.str();
}

ExperimentConfig resolve_config(const Common& c) {
  ExperimentConfig cfg = c.config_path.empty() ? ExperimentConfig{} : load_config(c.config_path);
  return apply_overrides(cfg, c.overrides);
}

bool wants(const ExperimentConfig& cfg, const char* e) {
  return std::find(cfg.estimators.begin(), cfg.estimators.end(), e) != cfg.estimators.end();
}

PredictOptions predict_options(const ExperimentConfig& cfg) {
  PredictOptions po;
  po.order = cfg.order;
  po.bayes_samples = wants(cfg, "combined_bayes") ? cfg.bayes_samples : 0;
  po.bayes_seed = derive_seed(cfg.base_seed, 0xbae5, 0);
  return po;
}

AsymptoticPrediction predict_at(const ExperimentConfig& cfg, double delta) {
  return predict(cfg.signal_prior(), cfg.channel(), cfg.linear_preprocessor(),
                 cfg.spectral_preprocessor(), delta, predict_options(cfg));
}

json gain_json(const AsymptoticPrediction& p) {
  if (!(std::max(std::abs(p.rho_l), p.rho_s) > 0.0)) return nullptr;
  return percentage_gain(p);
}

// Everything is computed before anything is emitted, so a failure leaves no output.
void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty()) {
    out << content;
  } else {
    write_file_atomic(path, content);
  }
}

std::string sidecar_path(const std::string& csv) {
  std::filesystem::path p(csv);
  if (p.extension() == ".csv") return p.replace_extension(".json").string();
  return csv + ".json";
}

int cmd_predict(const Common& c, std::ostream& out) {
  const ExperimentConfig cfg = resolve_config(c);
  if (c.dry_run) {
    out << json{{"config", to_json(cfg)}, {"valid", true}}.dump(2) << "\n";
    return kExitOk;
  }
  const AsymptoticPrediction p = predict_at(cfg, cfg.delta);
  json j = prediction_json(p);
  j["percentage_gain"] = gain_json(p);
  j["config"] = to_json(cfg);
  emit(c.out_path, j.dump(2) + "\n", out);
  return kExitOk;
}

int cmd_simulate(const Common& c, std::ostream& out) {
  const ExperimentConfig cfg = resolve_config(c);
  const int workers = workers_from_env();
  const std::string csv = c.out_path.empty() ? "results.csv" : c.out_path;
  if (c.dry_run) {
    json plan{{"config", to_json(cfg)}, {"workers", workers}, {"csv", csv},
              {"sidecar", sidecar_path(csv)}};
    json ns = json::array();
    for (double d : cfg.delta_grid) ns.push_back(std::llround(d * cfg.d));
    plan["n_per_delta"] = ns;
    out << plan.dump(2) << "\n";
    return kExitOk;
  }
  const ExperimentResult res = run_sweep(cfg, workers);
  const std::string body = records_csv(res);
  const std::string side = sidecar_json(res).dump(2) + "\n";
  write_file_atomic(csv, body);
  write_file_atomic(sidecar_path(csv), side);
  out << "wrote " << csv << " and " << sidecar_path(csv) << "\n";
  return kExitOk;
}

int cmd_gamp_trace(const Common& c, std::ostream& out) {
  const ExperimentConfig cfg = resolve_config(c);
  if (c.dry_run) {
    out << json{{"config", to_json(cfg)}, {"valid", true}}.dump(2) << "\n";
    return kExitOk;
  }
  const Channel channel = cfg.channel();
  const Preprocessor t_l = cfg.linear_preprocessor();
  const Preprocessor t_s = cfg.spectral_preprocessor();
  const AsymptoticPrediction p = predict(cfg.signal_prior(), channel, t_l, t_s, cfg.delta,
                                         PredictOptions{cfg.order, 0, 1});
  if (p.below_threshold()) {
    throw DomainError("gamp-trace needs delta above the spectral threshold");
  }
  const Instance inst = sample_instance(cfg.signal_prior(), channel, cfg.d, cfg.delta,
                                        derive_seed(cfg.base_seed, 0, 0));
  const SpectralSolveReport rep = spectral_estimate(inst, t_s, cfg.tol, cfg.max_iter);
  GampConfig gc{channel, t_l, t_s, p.fixed_point.lambda_star, cfg.gamp_steps, cfg.delta,
                OnsagerMode::limit, cfg.order};
  const GampRun run = gamp_power_run(inst, gc, &rep.eigvec);
  emit(c.out_path, gamp_csv(run), out);
  return kExitOk;
}

int cmd_preopt(const Common& c, std::ostream& out) {
  const ExperimentConfig cfg = resolve_config(c);
  if (c.dry_run) {
    out << json{{"config", to_json(cfg)}, {"valid", true}}.dump(2) << "\n";
    return kExitOk;
  }
  const Channel channel = cfg.channel();
  const PreprocOptResult r = linear_vs_spectral(channel, cfg.delta);
  json j = preopt_json(r, cfg.delta);
  j["config"] = to_json(cfg);

  std::string tl_csv, ts_csv;
  if (!c.tables_prefix.empty()) {
    std::vector<double> ys;
    if (channel.is_discrete()) {
      for (const auto& o : channel.discrete_support) ys.push_back(o.value);
    } else {
      const DensityTable tab = density_table(channel);
      const int m = 1025;
      for (int i = 0; i < m; ++i) {
        ys.push_back(tab.y_min + (tab.y_max - tab.y_min) * i / (m - 1));
      }
    }
    const Preprocessor tl = optimal_tl(channel);
    std::vector<double> v;
    for (double y : ys) v.push_back(tl(y));
    tl_csv = preprocessor_csv(ys, v);
    if (!r.delta_star_infinite) {
      const Preprocessor ts = optimal_ts(channel);
      v.clear();
      for (double y : ys) v.push_back(ts(y));
      ts_csv = preprocessor_csv(ys, v);
    }
  }
  emit(c.out_path, j.dump(2) + "\n", out);
  if (!tl_csv.empty()) write_file_atomic(c.tables_prefix + "_tl.csv", tl_csv);
  if (!ts_csv.empty()) write_file_atomic(c.tables_prefix + "_ts.csv", ts_csv);
  return kExitOk;
}

int cmd_compare(const Common& c, std::ostream& out) {
  const ExperimentConfig cfg = resolve_config(c);
  if (c.dry_run) {
    out << json{{"config", to_json(cfg)}, {"valid", true}}.dump(2) << "\n";
    return kExitOk;
  }
  std::vector<AsymptoticPrediction> preds;
  for (double d : cfg.delta_grid) preds.push_back(predict_at(cfg, d));
  emit(c.out_path, theory_csv(preds), out);
  return kExitOk;
}

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("-c,--config", c.config_path, "JSON config file")->check(CLI::ExistingFile);
  sub->add_option("-o,--out", c.out_path, "output path (stdout when omitted)");
  sub->add_option("overrides", c.overrides, "key=value config overrides");
  sub->add_option("--set", c.overrides, "key=value config override (repeatable)");
  sub->add_flag("--dry-run", c.dry_run, "validate the config and exit");
}

json error_json(const char* kind, const std::string& msg) {
  return json{{"error", kind}, {"message", msg}};
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Linear, spectral and combined estimators for generalized linear models", "glmcomb"};
  app.require_subcommand(1);
  app.footer(defaults_listing());
  Common c;

  auto* predict_cmd = app.add_subcommand("predict", "asymptotic correlations at `delta` (JSON)");
  auto* sim_cmd = app.add_subcommand("simulate", "Monte Carlo sweep over `delta_grid` (CSV + JSON sidecar)");
  auto* gamp_cmd = app.add_subcommand("gamp-trace", "power-method GAMP diagnostics (CSV)");
  auto* preopt_cmd = app.add_subcommand("preopt", "optimal preprocessing and delta* (JSON)");
  auto* cmp_cmd = app.add_subcommand("compare", "theory table over `delta_grid` (CSV)");
  for (auto* s : {predict_cmd, sim_cmd, gamp_cmd, preopt_cmd, cmp_cmd}) {
    add_common(s, c);
    s->footer(defaults_listing());
  }
  preopt_cmd->add_option("--tables", c.tables_prefix,
                         "write <prefix>_tl.csv and <prefix>_ts.csv with the optimal preprocessors");

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (predict_cmd->parsed()) return cmd_predict(c, out);
    if (sim_cmd->parsed()) return cmd_simulate(c, out);
    if (gamp_cmd->parsed()) return cmd_gamp_trace(c, out);
    if (preopt_cmd->parsed()) return cmd_preopt(c, out);
    if (cmp_cmd->parsed()) return cmd_compare(c, out);
  } catch (const ConfigError& e) {
    err << error_json("config", e.what()).dump() << "\n";
    return kExitConfig;
  } catch (const DomainError& e) {
    err << error_json("domain", e.what()).dump() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    err << error_json("numerical", e.what()).dump() << "\n";
    return kExitNumeric;
  }
  return kExitConfig;
}

}  // namespace glmcomb::cli
