#include "svwa/numerics/grad_check.hpp"

#include <algorithm>
#include <cmath>

namespace svwa {

GradCheckResult grad_check(const ScalarFn& value, const GradientFn& gradient, const ParamSet& params,
                           double h) {
  const GradSet analytic = gradient(params);
  require_aligned(params, analytic, "grad_check analytic gradient");

  GradCheckResult result;
  ParamSet probe = params;
  for (std::size_t p = 0; p < probe.size(); ++p) {
    Tensor& t = probe.entry(p).value;
    for (std::size_t i = 0; i < t.size(); ++i) {
      const double original = t[i];
      t[i] = original + h;
      const double up = value(probe);
      t[i] = original - h;
      const double down = value(probe);
      t[i] = original;

      const double numeric = (up - down) / (2.0 * h);
      const double a = analytic.entry(p).value[i];
      const double err = std::abs(a - numeric) / std::max(1e-8, std::abs(a) + std::abs(numeric));
      if (err > result.max_rel_error) {
        result.max_rel_error = err;
        result.worst_param = probe.entry(p).name;
        result.worst_index = i;
        result.analytic = a;
        result.numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace svwa
