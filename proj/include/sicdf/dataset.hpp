#pragma once

#include "sicdf/error.hpp"

#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace sicdf {

//! n paired observations (X_i, Y_i) with X_i in R^d, stored row-major.
//! Immutable after construction.
class Dataset
{
public:
  Dataset() = default;

  Dataset(std::vector<double> x, std::vector<double> y, std::size_t dim)
    : x_(std::move(x))
    , y_(std::move(y))
    , dim_(dim)
  {
    if (dim_ == 0) {
      throw ValidationError("dataset: covariate dimension must be at least 1");
    }
    if (y_.empty()) {
      throw ValidationError("dataset: no observations");
    }
    if (x_.size() != y_.size() * dim_) {
      throw ValidationError("dataset: X has " + std::to_string(x_.size()) +
                            " entries, expected n*d = " +
                            std::to_string(y_.size() * dim_));
    }
    for (std::size_t k = 0; k < x_.size(); ++k) {
      if (!std::isfinite(x_[k])) {
        throw ValidationError("dataset: non-finite covariate at row " +
                              std::to_string(k / dim_) + ", column " +
                              std::to_string(k % dim_));
      }
    }
    for (std::size_t i = 0; i < y_.size(); ++i) {
      if (!std::isfinite(y_[i])) {
        throw ValidationError("dataset: non-finite response at row " +
                              std::to_string(i));
      }
    }
  }

  std::size_t size() const { return y_.size(); }
  std::size_t dim() const { return dim_; }

  std::span<const double> row(std::size_t i) const
  {
    return {x_.data() + i * dim_, dim_};
  }
  double x(std::size_t i, std::size_t j) const { return x_[i * dim_ + j]; }
  double y(std::size_t i) const { return y_[i]; }

  const std::vector<double>& covariates() const { return x_; }
  const std::vector<double>& responses() const { return y_; }

  //! Same covariates, new responses.
  Dataset with_responses(std::vector<double> y) const
  {
    return Dataset(x_, std::move(y), dim_);
  }

  //! Rows [first, first + count).
  Dataset slice(std::size_t first, std::size_t count) const
  {
    if (first + count > size() || count == 0) {
      throw ValidationError("dataset: slice out of range");
    }
    std::vector<double> x(x_.begin() + static_cast<std::ptrdiff_t>(first * dim_),
                          x_.begin() + static_cast<std::ptrdiff_t>((first + count) * dim_));
    std::vector<double> y(y_.begin() + static_cast<std::ptrdiff_t>(first),
                          y_.begin() + static_cast<std::ptrdiff_t>(first + count));
    return Dataset(std::move(x), std::move(y), dim_);
  }

  //! Index values theta^T X_i for every row.
  std::vector<double> project(std::span<const double> theta) const
  {
    if (theta.size() != dim_) {
      throw ValidationError("dataset: direction dimension mismatch");
    }
    std::vector<double> z(size());
    for (std::size_t i = 0; i < size(); ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < dim_; ++j) {
        acc += theta[j] * x_[i * dim_ + j];
      }
      z[i] = acc;
    }
    return z;
  }

private:
  std::vector<double> x_;
  std::vector<double> y_;
  std::size_t dim_ = 0;
};

inline double dot(std::span<const double> a, std::span<const double> b)
{
  double acc = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    acc += a[j] * b[j];
  }
  return acc;
}

//! Per-column affine map x_j -> (x_j - mean_j) / sd_j.
struct ScalingParams
{
  std::vector<double> mean;
  std::vector<double> sd;

  std::vector<double> apply(std::span<const double> x) const
  {
    std::vector<double> out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
      out[j] = (x[j] - mean[j]) / sd[j];
    }
    return out;
  }

  std::vector<double> invert(std::span<const double> x) const
  {
    std::vector<double> out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
      out[j] = x[j] * sd[j] + mean[j];
    }
    return out;
  }

  Dataset apply(const Dataset& data) const
  {
    std::vector<double> x(data.covariates());
    const std::size_t d = data.dim();
    for (std::size_t k = 0; k < x.size(); ++k) {
      x[k] = (x[k] - mean[k % d]) / sd[k % d];
    }
    return Dataset(std::move(x), data.responses(), d);
  }

  Dataset invert(const Dataset& data) const
  {
    std::vector<double> x(data.covariates());
    const std::size_t d = data.dim();
    for (std::size_t k = 0; k < x.size(); ++k) {
      x[k] = x[k] * sd[k % d] + mean[k % d];
    }
    return Dataset(std::move(x), data.responses(), d);
  }
};

//! Centers and scales every covariate column to sample mean 0 and sample
//! standard deviation 1 (denominator n - 1). Y is untouched.
inline std::pair<Dataset, ScalingParams> standardize(const Dataset& data)
{
  const std::size_t n = data.size();
  const std::size_t d = data.dim();
  if (n < 2) {
    throw ValidationError("standardize: need at least 2 rows");
  }
  ScalingParams params{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  for (std::size_t j = 0; j < d; ++j) {
    double mean = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mean += data.x(i, j);
    }
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double c = data.x(i, j) - mean;
      ss += c * c;
    }
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sd > 0.0)) {
      throw ValidationError("standardize: column " + std::to_string(j) +
                            " is constant");
    }
    params.mean[j] = mean;
    params.sd[j] = sd;
  }
  return {params.apply(data), std::move(params)};
}

//! Lag embedding: the row for target t has X = (s_{t-1}, ..., s_{t-lags}) and
//! Y = s_t. Rows stay in temporal order, so there are T - lags of them.
inline Dataset embed_time_series(std::span<const double> series, std::size_t lags)
{
  if (lags == 0) {
    throw ValidationError("embed_time_series: lags must be at least 1");
  }
  if (series.size() <= lags) {
    throw ValidationError("embed_time_series: series length " +
                          std::to_string(series.size()) +
                          " must exceed the number of lags " + std::to_string(lags));
  }
  const std::size_t n = series.size() - lags;
  std::vector<double> x;
  std::vector<double> y;
  x.reserve(n * lags);
  y.reserve(n);
  for (std::size_t t = lags; t < series.size(); ++t) {
    for (std::size_t l = 1; l <= lags; ++l) {
      x.push_back(series[t - l]);
    }
    y.push_back(series[t]);
  }
  return Dataset(std::move(x), std::move(y), lags);
}

} // namespace sicdf
