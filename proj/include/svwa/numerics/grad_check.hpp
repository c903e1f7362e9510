#pragma once

#include <cstddef>
#include <functional>
#include <string>

#include "svwa/numerics/param_set.hpp"

namespace svwa {

using ScalarFn = std::function<double(const ParamSet&)>;
using GradientFn = std::function<GradSet(const ParamSet&)>;

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double analytic = 0.0;
  double numeric = 0.0;
};

/// Central differences (f(x+h) - f(x-h)) / 2h for every coordinate, compared
/// with the analytic gradient by |a - n| / max(1e-8, |a| + |n|).
GradCheckResult grad_check(const ScalarFn& value, const GradientFn& gradient, const ParamSet& params,
                           double h = 1e-5);

}  // namespace svwa
