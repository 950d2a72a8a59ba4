#pragma once

// Adjusted Nadaraya-Watson conditional CDF along an index.
//
// The kernel weights K_H(z_i - z) = K((z_i - z)/H) are reweighted by
// multinomial probabilities p_i maximising sum log p_i over the in-window
// points subject to
//
//   p_i >= 0,   sum p_i = 1,   sum p_i (z_i - z) K_H(z_i - z) = 0,
//
// which gives p_i proportional to 1 / (1 + lambda t_i), t_i = (z_i - z) K_H.
// The estimate sum p_i K_H I(Y_i <= y) / sum p_i K_H is then a proper CDF in
// y (nonnegative weights) with the first-order bias correction of a local
// linear fit.

#include "sicdf/dataset.hpp"
#include "sicdf/direction.hpp"
#include "sicdf/error.hpp"
#include "sicdf/kernel.hpp"
#include "sicdf/local_linear.hpp"
#include "sicdf/step_cdf.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <vector>

namespace sicdf {

inline constexpr double kAnwLambdaTolerance = 1e-10;
inline constexpr double kAnwConstraintTolerance = 1e-8;

struct AnwWeights
{
  std::vector<double> p;       // length n; zero outside the kernel window
  std::vector<double> kernel;  // K_H(z_i - z)
  double lambda = 0.0;
  double constraint_residual = 0.0;  // sum p_i t_i
  std::size_t window = 0;            // points with K_H > 0
};

template<Kernel K = Epanechnikov>
AnwWeights anw_weights(std::span<const double> index_values, double z, double H, K kernel = {})
{
  if (!(H > 0.0)) {
    throw ValidationError("anw_weights: bandwidth must be positive");
  }
  const std::size_t n = index_values.size();
  AnwWeights out;
  out.p.assign(n, 0.0);
  out.kernel.assign(n, 0.0);
  std::vector<double> t(n, 0.0);
  double t_max = 0.0, t_min = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double diff = index_values[i] - z;
    const double kv = kernel(diff / H);
    out.kernel[i] = kv;
    if (kv > 0.0) {
      ++out.window;
      t[i] = diff * kv;
      t_max = std::max(t_max, t[i]);
      t_min = std::min(t_min, t[i]);
    }
  }
  if (out.window == 0) {
    throw ExtrapolationError("anw_weights: no observations inside the kernel window at z = " +
                             std::to_string(z));
  }

  // p_i = 1 / (1 + lambda t_i), normalised over the window.
  auto weights_at = [&](double lambda, std::vector<double>& p) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      p[i] = out.kernel[i] > 0.0 ? 1.0 / (1.0 + lambda * t[i]) : 0.0;
      total += p[i];
    }
    double residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      p[i] /= total;
      residual += p[i] * t[i];
    }
    return residual;
  };

  if (t_max == 0.0 && t_min == 0.0) {
    out.lambda = 0.0;
    out.constraint_residual = weights_at(0.0, out.p);
    return out;
  }
  if (!(t_max > 0.0 && t_min < 0.0)) {
    throw BracketError("anw_weights: all in-window index values lie on one side of z = " +
                       std::to_string(z));
  }

  // g(lambda) = sum t_i / (1 + lambda t_i) decreases on (-1/t_max, -1/t_min).
  auto g = [&](double lambda) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (out.kernel[i] > 0.0) {
        acc += t[i] / (1.0 + lambda * t[i]);
      }
    }
    return acc;
  };
  double lo = -1.0 / t_max;
  double hi = -1.0 / t_min;
  double lambda = 0.0;
  double residual = weights_at(lambda, out.p);
  for (int iter = 0; iter < 4000; ++iter) {
    if (std::abs(residual) <= 1e-12 && hi - lo <= kAnwLambdaTolerance * std::max(1.0, std::abs(lambda))) {
      break;
    }
    const double gl = g(lambda);
    if (gl > 0.0) {
      lo = lambda;
    } else if (gl < 0.0) {
      hi = lambda;
    } else {
      break;
    }
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) {
      break;
    }
    lambda = mid;
    residual = weights_at(lambda, out.p);
  }
  if (!(std::abs(residual) <= kAnwConstraintTolerance)) {
    throw BracketError("anw_weights: constraint residual " + std::to_string(residual) +
                       " above tolerance at z = " + std::to_string(z));
  }
  out.lambda = lambda;
  out.constraint_residual = residual;
  return out;
}

namespace detail {

//! Step CDF with jump p_i K_i at Y_i over the points with K_i > 0. Values are
//! cumulative sums in ascending-Y order divided by their total, so the last
//! level maps to exactly 1.
inline StepCdf weighted_step_cdf(std::span<const double> p, std::span<const double> kernel,
                                 std::span<const double> responses)
{
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < kernel.size(); ++i) {
    if (kernel[i] > 0.0) {
      order.push_back(i);
    }
  }
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return responses[a] < responses[b]; });
  StepCdf cdf;
  double cum = 0.0;
  for (std::size_t q = 0; q < order.size(); ++q) {
    const std::size_t i = order[q];
    cum += p[i] * kernel[i];
    if (q + 1 < order.size() && responses[order[q + 1]] == responses[i]) {
      continue;
    }
    cdf.levels.push_back(responses[i]);
    cdf.values.push_back(cum);
  }
  const double total = cum;
  if (!(total > 0.0)) {
    throw NumericalError("adjusted Nadaraya-Watson: zero total weight");
  }
  for (double& v : cdf.values) {
    v /= total;
  }
  cdf.values.back() = 1.0;
  return cdf;
}

} // namespace detail

//! Step CDF of the adjusted Nadaraya-Watson estimate at index value z.
template<Kernel K = Epanechnikov>
StepCdf anw_distribution(std::span<const double> index_values, std::span<const double> responses,
                         double H, double z, K kernel = {})
{
  const AnwWeights aw = anw_weights(index_values, z, H, kernel);
  return detail::weighted_step_cdf(aw.p, aw.kernel, responses);
}

template<Kernel K = Epanechnikov>
double anw_cdf(const Dataset& data, const Direction& theta, double H, double z, double y,
               K kernel = {})
{
  const std::vector<double> idx = data.project(theta.components());
  return anw_distribution(idx, data.responses(), H, z, kernel)(y);
}

template<Kernel K = Epanechnikov>
double anw_quantile(const Dataset& data, const Direction& theta, double H, double z, double p,
                    K kernel = {})
{
  const std::vector<double> idx = data.project(theta.components());
  return anw_distribution(idx, data.responses(), H, z, kernel).quantile(p);
}

//! Step CDF of the clamped local linear estimate at index value z; not
//! necessarily monotone.
template<Kernel K = Epanechnikov>
StepCdf local_linear_distribution(std::span<const double> index_values,
                                  std::span<const double> responses, double H, double z,
                                  K kernel = {})
{
  const LocalLinearWeights lw = moment_sums(index_values, z, H, kernel);
  if (lw.t0 <= 0.0) {
    throw ExtrapolationError("local_linear_distribution: no observations inside the kernel "
                             "window at z = " + std::to_string(z));
  }
  StepCdf cdf;
  cdf.levels = distinct_sorted(std::vector<double>(responses.begin(), responses.end()));
  cdf.values.reserve(cdf.levels.size());
  for (double y : cdf.levels) {
    cdf.values.push_back(detail::weighted_cdf(lw, responses, y).value);
  }
  return cdf;
}

enum class FinalEstimator
{
  anw,
  local_linear,
};

inline const char* to_string(FinalEstimator e)
{
  return e == FinalEstimator::anw ? "anw" : "local-linear";
}

inline FinalEstimator final_estimator_from_name(const std::string& name)
{
  if (name == "anw") {
    return FinalEstimator::anw;
  }
  if (name == "local-linear") {
    return FinalEstimator::local_linear;
  }
  throw ValidationError("unknown estimator '" + name + "' (expected anw or local-linear)");
}

template<Kernel K = Epanechnikov>
StepCdf conditional_distribution(FinalEstimator estimator, std::span<const double> index_values,
                                 std::span<const double> responses, double H, double z,
                                 K kernel = {})
{
  return estimator == FinalEstimator::anw
           ? anw_distribution(index_values, responses, H, z, kernel)
           : local_linear_distribution(index_values, responses, H, z, kernel);
}

template<Kernel K = Epanechnikov>
PredictionInterval prediction_interval(const Dataset& data, const Direction& theta, double H,
                                       std::span<const double> x, double alpha,
                                       FinalEstimator estimator = FinalEstimator::anw,
                                       K kernel = {})
{
  if (x.size() != data.dim()) {
    throw ValidationError("prediction_interval: evaluation point dimension mismatch");
  }
  const std::vector<double> idx = data.project(theta.components());
  const double z = dot(theta.components(), x);
  return interval_from_cdf(conditional_distribution(estimator, idx, data.responses(), H, z, kernel),
                           alpha, z);
}

} // namespace sicdf
