#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "glmcomb/asymptotics.hpp"
#include "glmcomb/gamp.hpp"
#include "glmcomb/harness.hpp"
#include "glmcomb/preopt.hpp"

namespace glmcomb {

/// %.17g, with "inf", "-inf" and "nan" spelled out.
std::string format_double(double x);
/// Finite values as numbers, the rest as the strings above.
nlohmann::json json_number(double x);

/// Write to a temporary sibling and rename over `path`.
void write_file_atomic(const std::string& path, const std::string& content);

nlohmann::json prediction_json(const AsymptoticPrediction& p);
nlohmann::json preopt_json(const PreprocOptResult& r, double delta);

/// delta,replicate,estimator,correlation,norm,seconds
std::string records_csv(const ExperimentResult& res);
/// Config, RNG algorithm, realized delta_n, predictions and per-estimator summaries.
nlohmann::json sidecar_json(const ExperimentResult& res);
/// t,diff_u,diff_v,overlap,se_mu_v,se_sigma_v,spectral_alignment
std::string gamp_csv(const GampRun& run);
/// y,T(y)
std::string preprocessor_csv(const std::vector<double>& ys, const std::vector<double>& ts);
/// One row of theory per delta.
std::string theory_csv(const std::vector<AsymptoticPrediction>& preds);

}  // namespace glmcomb
