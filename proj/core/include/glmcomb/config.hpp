#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "glmcomb/channels.hpp"
#include "glmcomb/preprocessor.hpp"
#include "glmcomb/quadrature.hpp"

namespace glmcomb {

inline constexpr int kConfigSchemaVersion = 1;

/// Flat, versioned experiment configuration shared by the harness and CLI.
struct ExperimentConfig {
  int schema_version = kConfigSchemaVersion;
  std::string link = "0.3x+x^2";
  std::string output_kind = "continuous";  // "discrete" is available for link "sign"
  double sigma2 = 0.2;                     // noise variance
  std::string prior = "gaussian_sphere";
  double p = 0.5;
  std::string t_l = "id";
  std::string t_s = "clip:3.5";
  int d = 1000;
  double delta = 5.0;
  std::vector<double> delta_grid{2.0, 4.0, 6.0, 8.0, 10.0};
  int replicates = 10;
  std::uint64_t base_seed = 1;
  std::vector<std::string> estimators{"linear", "spectral", "combined_linear"};
  int gd_steps = 0;
  double gd_step_size = 0.5;
  bool gd_normalize = false;
  int gamp_steps = 200;
  long long bayes_samples = 1'000'000;
  double tol = 1e-10;
  int max_iter = 5000;
  int order = kDefaultOrder;

  void validate() const;
  Channel channel() const;
  SignalPrior signal_prior() const;
  Preprocessor linear_preprocessor() const;
  Preprocessor spectral_preprocessor() const;
};

struct ConfigKey {
  std::string name;
  std::string description;
};

/// Every accepted key, in documentation order.
const std::vector<ConfigKey>& config_keys();

nlohmann::json to_json(const ExperimentConfig& cfg);
/// Unknown keys and type mismatches raise ConfigError naming the key.
ExperimentConfig config_from_json(const nlohmann::json& j);
ExperimentConfig load_config(const std::string& path);
/// Apply "key=value" overrides; the value is parsed as JSON when possible,
/// otherwise taken as a string.
ExperimentConfig apply_overrides(const ExperimentConfig& cfg,
                                 const std::vector<std::string>& overrides);

/// Worker count from GLMCOMB_WORKERS (default 1).
int workers_from_env();

}  // namespace glmcomb
