#pragma once

#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace glmcomb {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Scalar map applied to every measurement before estimation.
struct Preprocessor {
  std::string name;
  std::function<double(double)> t;
  double sup_support = kInf;  // supremum of T(Y); must be finite for spectral use
  bool lipschitz = true;
  bool bounded = false;
  std::vector<double> kinks;  // y values where T is not smooth

  double operator()(double y) const { return t(y); }
  void validate() const;
};

Preprocessor identity_preprocessor();
/// min(y, c)
Preprocessor clip_preprocessor(double c);
/// y / (1 + |y|)
Preprocessor saturate_preprocessor();
Preprocessor square_preprocessor();
Preprocessor tanh_preprocessor();
/// c * T with kinks and support rescaled accordingly.
Preprocessor scaled(const Preprocessor& base, double c);
/// -T
Preprocessor negated(const Preprocessor& base);

/// Monotone cubic (PCHIP) interpolation through (ys, ts), clamped to the end
/// values outside the grid. `ys` strictly increasing, at least four points.
Preprocessor tabulated_preprocessor(std::string name, std::vector<double> ys,
                                    std::vector<double> ts);

/// Parse "id", "clip:<c>", "saturate", "square", "tanh".
Preprocessor parse_preprocessor(std::string_view spec);

}  // namespace glmcomb
