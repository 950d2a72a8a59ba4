#pragma once

// Least-squares linear fit Y = b0 + b^T X + e and the residual bootstrap
// built on it.

#include "sicdf/dataset.hpp"
#include "sicdf/error.hpp"
#include "sicdf/rng.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <vector>

namespace sicdf {

struct LinearFit
{
  double beta0 = 0.0;
  std::vector<double> beta;
  std::vector<double> residuals;  // centred
  double sigma = 0.0;

  double fitted(std::span<const double> x) const { return beta0 + dot(beta, x); }
};

inline LinearFit ols_fit(const Dataset& data)
{
  const std::size_t n = data.size();
  const std::size_t d = data.dim();
  if (n <= d + 1) {
    throw ValidationError("ols_fit: need more than d + 1 observations");
  }
  Eigen::MatrixXd design(n, d + 1);
  Eigen::VectorXd y(n);
  for (std::size_t i = 0; i < n; ++i) {
    design(i, 0) = 1.0;
    for (std::size_t j = 0; j < d; ++j) {
      design(i, j + 1) = data.x(i, j);
    }
    y(i) = data.y(i);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < static_cast<Eigen::Index>(d + 1)) {
    throw NumericalError("ols_fit: design matrix is rank deficient");
  }
  const Eigen::VectorXd coef = qr.solve(y);

  LinearFit fit;
  fit.beta0 = coef(0);
  fit.beta.resize(d);
  for (std::size_t j = 0; j < d; ++j) {
    fit.beta[j] = coef(static_cast<Eigen::Index>(j + 1));
  }
  fit.residuals.resize(n);
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    fit.residuals[i] = data.y(i) - fit.fitted(data.row(i));
    mean += fit.residuals[i];
  }
  mean /= static_cast<double>(n);
  double ss = 0.0;
  for (double& e : fit.residuals) {
    e -= mean;
    ss += e * e;
  }
  fit.sigma = std::sqrt(ss / static_cast<double>(n - d - 1));
  return fit;
}

//! Y*_i = b0 + b^T X_i + e*_i, with e* drawn uniformly with replacement from
//! the centred residuals. X is copied unchanged.
inline Dataset bootstrap_sample(const LinearFit& fit, const Dataset& data, Rng& rng)
{
  const std::size_t n = data.size();
  if (fit.residuals.empty() || fit.beta.size() != data.dim()) {
    throw ValidationError("bootstrap_sample: fit does not match the data");
  }
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = fit.fitted(data.row(i)) + fit.residuals[rng.index(fit.residuals.size())];
  }
  return data.with_responses(std::move(y));
}

} // namespace sicdf
