#pragma once

// Bootstrap rules of thumb for the two bandwidths.
//
// h (index search): in the residual-bootstrap world Y* = b0 + b^T X + e*
// the true index direction is canonicalize(b). Each candidate h is scored
// by the mean squared distance between the refitted direction and that
// truth over bootstrap replicates.
//
// H (final estimation): in the same bootstrap world the conditional CDF is
// known exactly, G*(y | x) = (1/n) sum_i I(e_i <= y - b0 - b^T x). Each
// candidate H is scored by the mean squared error of the adjusted
// Nadaraya-Watson estimate against G* on a fixed grid.

#include "sicdf/anw.hpp"
#include "sicdf/criterion.hpp"
#include "sicdf/fit.hpp"
#include "sicdf/linear_model.hpp"
#include "sicdf/parallel.hpp"
#include "sicdf/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

namespace sicdf {

struct BandwidthGrid
{
  std::vector<double> values;

  //! start * ratio^(i-1), i = 1..size.
  static BandwidthGrid geometric(double start, double ratio, std::size_t size)
  {
    if (!(start > 0.0) || !(ratio > 1.0) || size == 0) {
      throw ValidationError("bandwidth grid: need start > 0, ratio > 1 and size >= 1");
    }
    BandwidthGrid grid;
    grid.values.resize(size);
    for (std::size_t i = 0; i < size; ++i) {
      grid.values[i] = start * std::pow(ratio, static_cast<double>(i));
    }
    return grid;
  }

  void validate() const
  {
    if (values.empty()) {
      throw ValidationError("bandwidth grid: empty");
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (!(values[i] > 0.0) || (i > 0 && !(values[i] > values[i - 1]))) {
        throw ValidationError("bandwidth grid: values must be positive and strictly increasing");
      }
    }
  }
};

struct BandwidthSelection
{
  double value = 0.0;
  std::size_t index = 0;
  std::vector<double> grid;
  std::vector<double> scores;          // NaN for excluded candidates
  std::vector<std::size_t> failures;   // failed replicates per candidate
};

namespace detail {

inline BandwidthSelection pick_minimum(const BandwidthGrid& grid, std::vector<double> scores,
                                       std::vector<std::size_t> failures, const char* what)
{
  BandwidthSelection sel;
  sel.grid = grid.values;
  sel.scores = std::move(scores);
  sel.failures = std::move(failures);
  bool found = false;
  for (std::size_t c = 0; c < sel.scores.size(); ++c) {
    if (std::isfinite(sel.scores[c]) && (!found || sel.scores[c] < sel.scores[sel.index])) {
      sel.index = c;
      found = true;
    }
  }
  if (!found) {
    throw NumericalError(std::string(what) + ": every candidate bandwidth failed");
  }
  sel.value = grid.values[sel.index];
  return sel;
}

} // namespace detail

//! min(|a - b|^2, |a + b|^2) = 2 - 2|a^T b| for unit vectors: the squared
//! distance between the rays, unaffected by which sign canonicalisation
//! happens to pick when a first component is close to zero.
inline double ray_distance_sq(const Direction& a, const Direction& b)
{
  return std::max(0.0, 2.0 - 2.0 * std::abs(dot(a.components(), b.components())));
}

//! Minimises M1(h) = E* dist(theta*(h), canonicalize(b))^2 over the grid,
//! with dist the ray distance above.
//! Bootstrap sample b is drawn from derive_seed(seed, bootstrap_h, {b}) and
//! shared by every candidate, so score differences between candidates are
//! not swamped by resampling noise.
template<Kernel K = Epanechnikov>
BandwidthSelection select_h(const Dataset& data, const SphereSet& spheres,
                            const BandwidthGrid& grid, std::size_t replicates,
                            const SimplexOptions& options, std::uint64_t seed, K kernel = {})
{
  grid.validate();
  if (replicates == 0) {
    throw ValidationError("select_h: replicates must be at least 1");
  }
  const LinearFit fit = ols_fit(data);
  const Direction truth = Direction::canonicalize(fit.beta);
  const auto membership = std::make_shared<const SphereMembership>(data, spheres);
  const std::size_t candidates = grid.values.size();
  std::vector<double> sq(candidates * replicates, std::numeric_limits<double>::quiet_NaN());

  parallel_for(candidates * replicates, [&](std::size_t task) {
    const std::size_t c = task / replicates;
    const std::size_t b = task % replicates;
    const std::uint64_t stream = derive_seed(seed, Stream::bootstrap_h, {b});
    Rng rng(stream);
    try {
      const CriterionEvaluator<K> eval(bootstrap_sample(fit, data, rng), membership, kernel);
      const ThetaFit tf = fit_theta(eval, grid.values[c], std::nullopt, options, stream);
      sq[task] = ray_distance_sq(tf.theta, truth);
    } catch (const NumericalError&) {
    }
  });

  std::vector<double> scores(candidates, std::numeric_limits<double>::quiet_NaN());
  std::vector<std::size_t> failures(candidates, 0);
  for (std::size_t c = 0; c < candidates; ++c) {
    double acc = 0.0;
    std::size_t ok = 0;
    for (std::size_t b = 0; b < replicates; ++b) {
      const double v = sq[c * replicates + b];
      if (std::isfinite(v)) {
        acc += v;
        ++ok;
      } else {
        ++failures[c];
      }
    }
    if (ok > 0) {
      scores[c] = acc / static_cast<double>(ok);
    }
  }
  return detail::pick_minimum(grid, std::move(scores), std::move(failures), "select_h");
}

//! Rows used as evaluation points by select_H: 20 sample points at
//! equispaced ranks of theta^T X between the 5th and 95th percentiles.
inline std::vector<std::size_t> evaluation_rows(std::span<const double> index_values,
                                                std::size_t count = 20)
{
  const std::size_t n = index_values.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return index_values[a] < index_values[b];
  });
  std::vector<std::size_t> rows;
  const std::size_t k = std::min(count, n);
  for (std::size_t q = 0; q < k; ++q) {
    const double frac = k == 1 ? 0.5 : 0.05 + 0.9 * static_cast<double>(q) / static_cast<double>(k - 1);
    const auto pos = static_cast<std::size_t>(std::lround(frac * static_cast<double>(n - 1)));
    rows.push_back(order[pos]);
  }
  return rows;
}

//! Type-7 (linear interpolation) sample quantile.
inline double sample_quantile(std::vector<double> values, double p)
{
  if (values.empty()) {
    throw ValidationError("sample_quantile: no values");
  }
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

//! Bootstrap-world conditional CDF G*(y | x) = (1/n) #{e_i <= y - fitted(x)}.
struct BootstrapTruth
{
  std::vector<double> sorted_residuals;
  explicit BootstrapTruth(const LinearFit& fit) : sorted_residuals(fit.residuals)
  {
    std::sort(sorted_residuals.begin(), sorted_residuals.end());
  }
  double operator()(double fitted, double y) const
  {
    const auto it = std::upper_bound(sorted_residuals.begin(), sorted_residuals.end(), y - fitted);
    return static_cast<double>(it - sorted_residuals.begin()) /
           static_cast<double>(sorted_residuals.size());
  }
};

//! Minimises the bootstrap mean squared error of the adjusted
//! Nadaraya-Watson estimate along theta over the grid. Bootstrap sample b is
//! drawn from derive_seed(seed, bootstrap_H, {b}) for every candidate.
template<Kernel K = Epanechnikov>
BandwidthSelection select_H(const Dataset& data, const Direction& theta,
                            const BandwidthGrid& grid, std::size_t replicates, std::uint64_t seed,
                            K kernel = {})
{
  grid.validate();
  if (replicates == 0) {
    throw ValidationError("select_H: replicates must be at least 1");
  }
  const LinearFit fit = ols_fit(data);
  const BootstrapTruth truth(fit);
  const std::vector<double> index = data.project(theta.components());
  const std::vector<std::size_t> rows = evaluation_rows(index);
  constexpr std::size_t y_points = 20;
  const std::size_t candidates = grid.values.size();
  std::vector<double> mse(candidates * replicates, std::numeric_limits<double>::quiet_NaN());

  parallel_for(candidates * replicates, [&](std::size_t task) {
    const std::size_t c = task / replicates;
    const std::size_t b = task % replicates;
    Rng rng(derive_seed(seed, Stream::bootstrap_H, {b}));
    const Dataset boot = bootstrap_sample(fit, data, rng);
    const double y_lo = sample_quantile(boot.responses(), 0.05);
    const double y_hi = sample_quantile(boot.responses(), 0.95);
    try {
      double acc = 0.0;
      for (std::size_t r : rows) {
        const StepCdf est = anw_distribution(index, boot.responses(), grid.values[c], index[r], kernel);
        const double fitted = fit.fitted(data.row(r));
        for (std::size_t q = 0; q < y_points; ++q) {
          const double y = y_lo + (y_hi - y_lo) * static_cast<double>(q) / static_cast<double>(y_points - 1);
          const double diff = est(y) - truth(fitted, y);
          acc += diff * diff;
        }
      }
      mse[task] = acc / static_cast<double>(rows.size() * y_points);
    } catch (const NumericalError&) {
    }
  });

  std::vector<double> scores(candidates, std::numeric_limits<double>::quiet_NaN());
  std::vector<std::size_t> failures(candidates, 0);
  for (std::size_t c = 0; c < candidates; ++c) {
    double acc = 0.0;
    std::size_t ok = 0;
    for (std::size_t b = 0; b < replicates; ++b) {
      const double v = mse[c * replicates + b];
      if (std::isfinite(v)) {
        acc += v;
        ++ok;
      } else {
        ++failures[c];
      }
    }
    if (ok > 0) {
      scores[c] = acc / static_cast<double>(ok);
    }
  }
  return detail::pick_minimum(grid, std::move(scores), std::move(failures), "select_H");
}

struct BandwidthPair
{
  double h = 0.0;
  double H = 0.0;
  BandwidthSelection h_selection;
  BandwidthSelection H_selection;
};

} // namespace sicdf
