#include "glmcomb/config.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "glmcomb/error.hpp"

namespace glmcomb {

using nlohmann::json;

namespace {

const std::vector<std::string> kEstimators{"linear", "spectral", "combined_linear",
                                           "combined_bayes"};

template <class T>
T get_key(const json& j, const std::string& key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("config key '" + key + "' has the wrong type");
  }
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys{
      {"schema_version", "config schema version (must be 1)"},
      {"link", "link function f: x, x^2, 0.3x+x^2, 0.3x+0.5x^2, 0.3x+0.5(x^2-1), "
               "1+0.3x+(x^2-1), max(x,-0.4x), abs_switch_1.5, sign, abs"},
      {"output_kind", "continuous (y = f(g) + sigma z) or discrete (link sign only)"},
      {"sigma2", "noise variance sigma^2 >= 0"},
      {"prior", "signal prior: gaussian_sphere or binary"},
      {"p", "P(X = +1) for the binary prior"},
      {"t_l", "linear preprocessor: id, clip:<c>, saturate, square, tanh"},
      {"t_s", "spectral preprocessor (needs a finite supremum): clip:<c>, saturate, tanh"},
      {"d", "signal dimension"},
      {"delta", "sampling ratio for predict, gamp-trace and preopt"},
      {"delta_grid", "strictly increasing sampling ratios for simulate and compare"},
      {"replicates", "independent replicates per delta"},
      {"base_seed", "base seed; replicate seeds are derived from (base_seed, delta index, replicate)"},
      {"estimators", "subset of linear, spectral, combined_linear, combined_bayes"},
      {"gd_steps", "gradient-descent refinement steps from each estimator (0 disables)"},
      {"gd_step_size", "gradient-descent step size"},
      {"gd_normalize", "divide the gradient by n"},
      {"gamp_steps", "GAMP iterations for gamp-trace"},
      {"bayes_samples", "Monte Carlo samples for the Bayes-optimal correlation"},
      {"tol", "relative residual tolerance of the power iteration"},
      {"max_iter", "power iteration cap"},
      {"order", "quadrature order"},
  };
  return keys;
}

json to_json(const ExperimentConfig& c) {
  return json{{"schema_version", c.schema_version},
              {"link", c.link},
              {"output_kind", c.output_kind},
              {"sigma2", c.sigma2},
              {"prior", c.prior},
              {"p", c.p},
              {"t_l", c.t_l},
              {"t_s", c.t_s},
              {"d", c.d},
              {"delta", c.delta},
              {"delta_grid", c.delta_grid},
              {"replicates", c.replicates},
              {"base_seed", c.base_seed},
              {"estimators", c.estimators},
              {"gd_steps", c.gd_steps},
              {"gd_step_size", c.gd_step_size},
              {"gd_normalize", c.gd_normalize},
              {"gamp_steps", c.gamp_steps},
              {"bayes_samples", c.bayes_samples},
              {"tol", c.tol},
              {"max_iter", c.max_iter},
              {"order", c.order}};
}

ExperimentConfig config_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  json merged = to_json(ExperimentConfig{});
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!merged.contains(it.key())) throw ConfigError("unknown config key '" + it.key() + "'");
    merged[it.key()] = it.value();
  }
  ExperimentConfig c;
  c.schema_version = get_key<int>(merged, "schema_version");
  c.link = get_key<std::string>(merged, "link");
  c.output_kind = get_key<std::string>(merged, "output_kind");
  c.sigma2 = get_key<double>(merged, "sigma2");
  c.prior = get_key<std::string>(merged, "prior");
  c.p = get_key<double>(merged, "p");
  c.t_l = get_key<std::string>(merged, "t_l");
  c.t_s = get_key<std::string>(merged, "t_s");
  c.d = get_key<int>(merged, "d");
  c.delta = get_key<double>(merged, "delta");
  c.delta_grid = get_key<std::vector<double>>(merged, "delta_grid");
  c.replicates = get_key<int>(merged, "replicates");
  c.base_seed = get_key<std::uint64_t>(merged, "base_seed");
  c.estimators = get_key<std::vector<std::string>>(merged, "estimators");
  c.gd_steps = get_key<int>(merged, "gd_steps");
  c.gd_step_size = get_key<double>(merged, "gd_step_size");
  c.gd_normalize = get_key<bool>(merged, "gd_normalize");
  c.gamp_steps = get_key<int>(merged, "gamp_steps");
  c.bayes_samples = get_key<long long>(merged, "bayes_samples");
  c.tol = get_key<double>(merged, "tol");
  c.max_iter = get_key<int>(merged, "max_iter");
  c.order = get_key<int>(merged, "order");
  c.validate();
  return c;
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& key, const std::string& why) {
    throw ConfigError("config key '" + key + "': " + why);
  };
  if (schema_version != kConfigSchemaVersion) fail("schema_version", "unsupported version");
  if (!(sigma2 >= 0.0) || !std::isfinite(sigma2)) fail("sigma2", "must be finite and >= 0");
  if (output_kind != "continuous" && output_kind != "discrete") fail("output_kind", "unknown kind");
  if (output_kind == "discrete" && link != "sign") fail("output_kind", "discrete requires link sign");
  if (prior != "gaussian_sphere" && prior != "binary") fail("prior", "unknown prior");
  if (prior == "binary" && !(p > 0.0 && p < 1.0)) fail("p", "must lie in (0,1)");
  if (d < 2) fail("d", "must be >= 2");
  if (!(delta > 0.0) || !std::isfinite(delta)) fail("delta", "must be positive");
  if (delta_grid.empty()) fail("delta_grid", "must not be empty");
  for (std::size_t i = 0; i < delta_grid.size(); ++i) {
    if (!(delta_grid[i] > 0.0) || !std::isfinite(delta_grid[i])) fail("delta_grid", "entries must be positive");
    if (i > 0 && !(delta_grid[i] > delta_grid[i - 1])) fail("delta_grid", "must be strictly increasing");
  }
  if (replicates < 1) fail("replicates", "must be >= 1");
  if (estimators.empty()) fail("estimators", "must not be empty");
  for (const auto& e : estimators) {
    if (std::find(kEstimators.begin(), kEstimators.end(), e) == kEstimators.end()) {
      fail("estimators", "unknown estimator '" + e + "'");
    }
  }
  if (gd_steps < 0) fail("gd_steps", "must be >= 0");
  if (!(gd_step_size > 0.0)) fail("gd_step_size", "must be positive");
  if (gamp_steps < 1) fail("gamp_steps", "must be >= 1");
  if (bayes_samples < 0) fail("bayes_samples", "must be >= 0");
  if (!(tol > 0.0)) fail("tol", "must be positive");
  if (max_iter < 1) fail("max_iter", "must be >= 1");
  if (order < 20) fail("order", "must be >= 20");
  try {
    (void)channel();
  } catch (const DomainError& e) {
    fail("link", e.what());
  }
  try {
    (void)linear_preprocessor();
  } catch (const DomainError& e) {
    fail("t_l", e.what());
  }
  try {
    (void)spectral_preprocessor();
  } catch (const DomainError& e) {
    fail("t_s", e.what());
  }
}

Channel ExperimentConfig::channel() const {
  if (output_kind == "discrete") return sign_channel();
  return make_channel(link, std::sqrt(sigma2));
}

SignalPrior ExperimentConfig::signal_prior() const {
  return prior == "binary" ? SignalPrior::binary(p) : SignalPrior::gaussian_sphere();
}

Preprocessor ExperimentConfig::linear_preprocessor() const { return parse_preprocessor(t_l); }
Preprocessor ExperimentConfig::spectral_preprocessor() const { return parse_preprocessor(t_s); }

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("malformed config '" + path + "': " + e.what());
  }
  return config_from_json(j);
}

ExperimentConfig apply_overrides(const ExperimentConfig& cfg,
                                 const std::vector<std::string>& overrides) {
  json j = to_json(cfg);
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ConfigError("override '" + o + "' is not of the form key=value");
    }
    const std::string key = o.substr(0, eq);
    const std::string value = o.substr(eq + 1);
    if (!j.contains(key)) throw ConfigError("unknown config key '" + key + "'");
    json v = json::parse(value, nullptr, false);
    j[key] = v.is_discarded() ? json(value) : v;
  }
  return config_from_json(j);
}

int workers_from_env() {
  const char* s = std::getenv("GLMCOMB_WORKERS");
  if (s == nullptr || *s == '\0') return 1;
  char* end = nullptr;
  const long v = std::strtol(s, &end, 10);
  if (*end != '\0' || v < 1) throw ConfigError("GLMCOMB_WORKERS must be a positive integer");
  return static_cast<int>(std::min(v, 256L));
}

}  // namespace glmcomb
