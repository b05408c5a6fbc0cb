#include "glmcomb/preprocessor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

// pchip.hpp calls unqualified isnan
#include <math.h>
#include <boost/math/interpolators/pchip.hpp>

#include "glmcomb/error.hpp"

namespace glmcomb {

void Preprocessor::validate() const {
  if (!t) throw DomainError("preprocessor '" + name + "' has no function");
  if (std::isnan(sup_support)) throw DomainError("preprocessor support bound is NaN");
}

Preprocessor identity_preprocessor() {
  return {"id", [](double y) { return y; }, kInf, true, false, {}};
}

Preprocessor clip_preprocessor(double c) {
  if (!std::isfinite(c)) throw DomainError("clip level must be finite");
  return {"clip:" + std::to_string(c), [c](double y) { return std::min(y, c); }, c, true,
          false, {c}};
}

Preprocessor saturate_preprocessor() {
  return {"saturate", [](double y) { return y / (1.0 + std::abs(y)); }, 1.0, true, true, {}};
}

Preprocessor square_preprocessor() {
  return {"square", [](double y) { return y * y; }, kInf, false, false, {}};
}

Preprocessor tanh_preprocessor() {
  return {"tanh", [](double y) { return std::tanh(y); }, 1.0, true, true, {}};
}

Preprocessor scaled(const Preprocessor& base, double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw DomainError("scale must be positive");
  Preprocessor p = base;
  p.name = std::to_string(c) + "*" + base.name;
  p.t = [f = base.t, c](double y) { return c * f(y); };
  p.sup_support = c * base.sup_support;
  return p;
}

Preprocessor negated(const Preprocessor& base) {
  Preprocessor p = base;
  p.name = "-" + base.name;
  p.t = [f = base.t](double y) { return -f(y); };
  p.sup_support = kInf;
  return p;
}

Preprocessor tabulated_preprocessor(std::string name, std::vector<double> ys,
                                    std::vector<double> ts) {
  if (ys.size() != ts.size() || ys.size() < 4) {
    throw DomainError("tabulated preprocessor needs >= 4 matching points");
  }
  for (std::size_t i = 1; i < ys.size(); ++i) {
    if (!(ys[i] > ys[i - 1])) throw DomainError("tabulation grid must be strictly increasing");
  }
  for (double v : ts) {
    if (!std::isfinite(v)) throw DomainError("tabulated preprocessor has non-finite values");
  }
  const double lo = ys.front(), hi = ys.back();
  const double t_lo = ts.front(), t_hi = ts.back();
  const double sup = *std::max_element(ts.begin(), ts.end());
  using Pchip = boost::math::interpolators::pchip<std::vector<double>>;
  auto interp = std::make_shared<Pchip>(std::move(ys), std::move(ts));
  Preprocessor p;
  p.name = std::move(name);
  p.t = [interp, lo, hi, t_lo, t_hi](double y) {
    if (y <= lo) return t_lo;
    if (y >= hi) return t_hi;
    return (*interp)(y);
  };
  // PCHIP does not overshoot the data, so the table maximum is the supremum.
  p.sup_support = sup;
  p.bounded = true;
  p.lipschitz = true;
  return p;
}

Preprocessor parse_preprocessor(std::string_view spec) {
  if (spec == "id" || spec == "identity") return identity_preprocessor();
  if (spec == "saturate") return saturate_preprocessor();
  if (spec == "square") return square_preprocessor();
  if (spec == "tanh") return tanh_preprocessor();
  if (spec.starts_with("clip:")) {
    const std::string v(spec.substr(5));
    std::size_t pos = 0;
    double c = 0.0;
    try {
      c = std::stod(v, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos != v.size() || v.empty()) throw DomainError("bad clip level in '" + std::string(spec) + "'");
    return clip_preprocessor(c);
  }
  throw DomainError("unknown preprocessor '" + std::string(spec) + "'");
}

}  // namespace glmcomb
