#pragma once

// Downhill simplex minimisation (Nelder-Mead) with the standard coefficients:
// reflection 1, expansion 2, contraction 1/2, shrink 1/2.

#include "sicdf/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace sicdf {

struct SimplexOptions
{
  double initial_step = 0.1;
  std::size_t max_iterations = 500;
  double rel_tolerance = 1e-6;
  std::size_t restarts = 2;

  void validate() const
  {
    if (!(initial_step > 0.0) || !(rel_tolerance > 0.0) || max_iterations < 1) {
      throw ValidationError("simplex options: step and tolerance must be positive and "
                            "max_iterations at least 1");
    }
  }
};

struct TracePoint
{
  std::size_t iteration;
  double best;
};

struct SimplexResult
{
  std::vector<double> point;
  double value = 0.0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  bool converged = false;
  std::vector<TracePoint> trace;
};

//! Minimises `objective` starting from the simplex {init, init + step e_k}.
//! Stops when 2|f_worst - f_best| <= rel_tolerance (|f_worst| + |f_best| + tiny)
//! or after max_iterations. Non-finite values inside the run are treated as
//! +infinity; a non-finite value at init is an error.
template<typename Objective>
SimplexResult nelder_mead_minimize(Objective&& objective, const std::vector<double>& init,
                                   const SimplexOptions& options)
{
  options.validate();
  const std::size_t d = init.size();
  if (d == 0) {
    throw ValidationError("nelder_mead: empty starting point");
  }
  constexpr double tiny = 1e-10;
  constexpr double inf = std::numeric_limits<double>::infinity();

  SimplexResult result;
  auto eval = [&](const std::vector<double>& v) {
    ++result.evaluations;
    const double f = objective(v);
    return std::isfinite(f) ? f : inf;
  };

  std::vector<std::vector<double>> vertex(d + 1, init);
  std::vector<double> value(d + 1);
  value[0] = objective(init);
  ++result.evaluations;
  if (!std::isfinite(value[0])) {
    throw NumericalError("nelder_mead: objective is not finite at the starting point");
  }
  for (std::size_t k = 0; k < d; ++k) {
    vertex[k + 1][k] += options.initial_step;
    value[k + 1] = eval(vertex[k + 1]);
  }

  std::vector<std::size_t> idx(d + 1);
  std::vector<double> centroid(d), trial(d), trial2(d);
  auto along = [&](double coef, const std::vector<double>& worst, std::vector<double>& out) {
    for (std::size_t j = 0; j < d; ++j) {
      out[j] = centroid[j] + coef * (centroid[j] - worst[j]);
    }
  };

  auto sort_simplex = [&] {
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(),
                     [&](std::size_t a, std::size_t b) { return value[a] < value[b]; });
    std::vector<std::vector<double>> v2(d + 1);
    std::vector<double> f2(d + 1);
    for (std::size_t k = 0; k <= d; ++k) {
      v2[k] = std::move(vertex[idx[k]]);
      f2[k] = value[idx[k]];
    }
    vertex = std::move(v2);
    value = std::move(f2);
  };

  sort_simplex();
  while (true) {
    const double best = value.front();
    const double worst = value.back();
    result.trace.push_back({result.iterations, best});
    if (std::isfinite(worst) &&
        2.0 * std::abs(worst - best) <= options.rel_tolerance * (std::abs(worst) + std::abs(best) + tiny)) {
      result.converged = true;
      break;
    }
    if (result.iterations >= options.max_iterations) {
      break;
    }
    ++result.iterations;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t k = 0; k < d; ++k) {
      for (std::size_t j = 0; j < d; ++j) {
        centroid[j] += vertex[k][j];
      }
    }
    for (double& c : centroid) {
      c /= static_cast<double>(d);
    }

    along(1.0, vertex[d], trial);
    const double fr = eval(trial);
    if (fr < value[0]) {
      along(2.0, vertex[d], trial2);
      const double fe = eval(trial2);
      if (fe < fr) {
        vertex[d] = trial2;
        value[d] = fe;
      } else {
        vertex[d] = trial;
        value[d] = fr;
      }
    } else if (fr < value[d - 1]) {
      vertex[d] = trial;
      value[d] = fr;
    } else {
      const bool outside = fr < value[d];
      along(outside ? 0.5 : -0.5, vertex[d], trial2);
      const double fc = eval(trial2);
      if (outside ? fc <= fr : fc < value[d]) {
        vertex[d] = trial2;
        value[d] = fc;
      } else {
        for (std::size_t k = 1; k <= d; ++k) {
          for (std::size_t j = 0; j < d; ++j) {
            vertex[k][j] = vertex[0][j] + 0.5 * (vertex[k][j] - vertex[0][j]);
          }
          value[k] = eval(vertex[k]);
        }
      }
    }
    sort_simplex();
  }
  result.point = vertex.front();
  result.value = value.front();
  return result;
}

} // namespace sicdf
