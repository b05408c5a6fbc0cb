#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace glmcomb::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitNumeric = 1;
inline constexpr int kExitConfig = 2;

/// Entry point shared by the executable and the tests. Results go to `out`
/// unless --out is given; diagnostics go to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace glmcomb::cli
