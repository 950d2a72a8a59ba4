#pragma once

// Local linear estimators of F(y | theta^T X = z) built from indicator
// responses I(Y_i <= y): the leave-two-out form used inside the index
// criterion and the full-sample form used for final estimation.

#include "sicdf/dataset.hpp"
#include "sicdf/direction.hpp"
#include "sicdf/error.hpp"
#include "sicdf/kernel.hpp"

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

namespace sicdf {

//! Weight sums below this magnitude trigger the fallback chain
//! local linear -> Nadaraya-Watson -> empirical CDF.
inline constexpr double kDegenerateWeightSum = 1e-12;

enum class Fallback
{
  none,
  nadaraya_watson,
  global_ecdf,
};

inline const char* to_string(Fallback f)
{
  switch (f) {
    case Fallback::none: return "none";
    case Fallback::nadaraya_watson: return "nadaraya_watson";
    case Fallback::global_ecdf: return "global_ecdf";
  }
  return "unknown";
}

//! Moment sums t_k = (1/(m h)) sum_k K(u_k) u_k^k with u_k = (z - z_k)/h, and
//! the local linear weights w_k = K(u_k) (t2 - u_k t1).
struct LocalLinearWeights
{
  double t0 = 0.0;
  double t1 = 0.0;
  double t2 = 0.0;
  std::vector<double> w;
  std::vector<double> kernel;  // K(u_k), used by the Nadaraya-Watson fallback
  std::vector<std::size_t> included;
};

struct CdfEstimate
{
  double value = 0.0;      // clamped to [0, 1]
  double raw_value = 0.0;  // before clamping
  std::size_t effective_support = 0;
  Fallback fallback_used = Fallback::none;
};

template<Kernel K = Epanechnikov>
LocalLinearWeights moment_sums(std::span<const double> index_values, double center, double h,
                               K kernel = {})
{
  if (!(h > 0.0)) {
    throw ValidationError("moment_sums: bandwidth must be positive");
  }
  if (index_values.empty()) {
    throw ValidationError("moment_sums: no index values");
  }
  const std::size_t m = index_values.size();
  LocalLinearWeights out;
  out.w.resize(m);
  out.kernel.resize(m);
  out.included.resize(m);
  std::vector<double> u(m);
  for (std::size_t k = 0; k < m; ++k) {
    u[k] = (center - index_values[k]) / h;
    const double kv = kernel(u[k]);
    out.kernel[k] = kv;
    out.included[k] = k;
    out.t0 += kv;
    out.t1 += kv * u[k];
    out.t2 += kv * u[k] * u[k];
  }
  const double norm = static_cast<double>(m) * h;
  out.t0 /= norm;
  out.t1 /= norm;
  out.t2 /= norm;
  for (std::size_t k = 0; k < m; ++k) {
    out.w[k] = out.kernel[k] * (out.t2 - u[k] * out.t1);
  }
  return out;
}

namespace detail {

//! Ratio estimate given weights and the responses they attach to.
inline CdfEstimate weighted_cdf(const LocalLinearWeights& lw, std::span<const double> responses,
                                double y)
{
  CdfEstimate est;
  double num = 0.0, den = 0.0, nw_num = 0.0, nw_den = 0.0;
  std::size_t below = 0;
  for (std::size_t k = 0; k < lw.w.size(); ++k) {
    const bool ind = responses[k] <= y;
    den += lw.w[k];
    nw_den += lw.kernel[k];
    if (ind) {
      num += lw.w[k];
      nw_num += lw.kernel[k];
      ++below;
    }
    if (lw.kernel[k] > 0.0) {
      ++est.effective_support;
    }
  }
  if (std::abs(den) > kDegenerateWeightSum) {
    est.raw_value = num / den;
  } else if (nw_den > kDegenerateWeightSum) {
    est.raw_value = nw_num / nw_den;
    est.fallback_used = Fallback::nadaraya_watson;
  } else {
    est.raw_value = static_cast<double>(below) / static_cast<double>(lw.w.size());
    est.fallback_used = Fallback::global_ecdf;
  }
  est.value = std::clamp(est.raw_value, 0.0, 1.0);
  return est;
}

} // namespace detail

//! Leave-two-out estimate of F(y | theta^T X_i) from the pairs other than i
//! and j.
template<Kernel K = Epanechnikov>
CdfEstimate loo2_cdf(const Dataset& data, const Direction& theta, double h, std::size_t i,
                     std::size_t j, double y, K kernel = {})
{
  const std::size_t n = data.size();
  if (n < 3) {
    throw ValidationError("loo2_cdf: need at least 3 observations");
  }
  if (i >= n || j >= n) {
    throw ValidationError("loo2_cdf: index out of range");
  }
  if (i == j) {
    throw ValidationError("loo2_cdf: i and j must differ");
  }
  const std::vector<double> z = data.project(theta.components());
  std::vector<double> zs, ys;
  zs.reserve(n - 2);
  ys.reserve(n - 2);
  for (std::size_t k = 0; k < n; ++k) {
    if (k != i && k != j) {
      zs.push_back(z[k]);
      ys.push_back(data.y(k));
    }
  }
  return detail::weighted_cdf(moment_sums(zs, z[i], h, kernel), ys, y);
}

//! Full-sample local linear estimate of F(y | theta^T X = theta^T x).
template<Kernel K = Epanechnikov>
CdfEstimate local_linear_cdf(const Dataset& data, const Direction& theta, double h,
                             std::span<const double> x, double y, K kernel = {})
{
  if (data.size() < 2) {
    throw ValidationError("local_linear_cdf: need at least 2 observations");
  }
  if (x.size() != data.dim()) {
    throw ValidationError("local_linear_cdf: evaluation point dimension mismatch");
  }
  const std::vector<double> z = data.project(theta.components());
  return detail::weighted_cdf(moment_sums(z, dot(theta.components(), x), h, kernel),
                              data.responses(), y);
}

//! Same estimator evaluated directly at an index value z, for precomputed
//! projections.
template<Kernel K = Epanechnikov>
CdfEstimate local_linear_cdf_at(std::span<const double> index_values,
                                std::span<const double> responses, double h, double z, double y,
                                K kernel = {})
{
  return detail::weighted_cdf(moment_sums(index_values, z, h, kernel), responses, y);
}

} // namespace sicdf
