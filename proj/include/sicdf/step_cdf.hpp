#pragma once

#include "sicdf/error.hpp"

#include <algorithm>
#include <cstddef>
#include <vector>

namespace sicdf {

//! Conditional CDF that is constant between, and jumps only at, the
//! observed responses. `values[k]` is F(levels[k]); F(y) = 0 below
//! levels.front().
struct StepCdf
{
  std::vector<double> levels;  // distinct, ascending
  std::vector<double> values;

  double operator()(double y) const
  {
    const auto it = std::upper_bound(levels.begin(), levels.end(), y);
    if (it == levels.begin()) {
      return 0.0;
    }
    return values[static_cast<std::size_t>(it - levels.begin()) - 1];
  }

  //! Generalised inverse inf{y in levels : F(y) >= p}.
  double quantile(double p) const
  {
    if (!(p > 0.0 && p < 1.0)) {
      throw ValidationError("quantile: level must lie in (0, 1)");
    }
    for (std::size_t k = 0; k < levels.size(); ++k) {
      if (values[k] >= p) {
        return levels[k];
      }
    }
    throw NumericalError("quantile: estimated CDF never reaches the requested level");
  }
};

struct PredictionInterval
{
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.0;        // 1 - alpha
  double index_value = 0.0;  // z at which the interval was read off

  double length() const { return upper - lower; }
  bool covers(double y) const { return lower <= y && y <= upper; }
};

//! [F^{-1}(alpha/2), F^{-1}(1 - alpha/2)].
inline PredictionInterval interval_from_cdf(const StepCdf& cdf, double alpha, double z)
{
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ValidationError("prediction interval: alpha must lie in (0, 1)");
  }
  PredictionInterval pi;
  pi.lower = cdf.quantile(0.5 * alpha);
  pi.upper = cdf.quantile(1.0 - 0.5 * alpha);
  pi.level = 1.0 - alpha;
  pi.index_value = z;
  return pi;
}

//! Distinct sorted copy of `y`.
inline std::vector<double> distinct_sorted(std::vector<double> y)
{
  std::sort(y.begin(), y.end());
  y.erase(std::unique(y.begin(), y.end()), y.end());
  return y;
}

} // namespace sicdf
