#pragma once

#include "sicdf/criterion.hpp"
#include "sicdf/direction.hpp"
#include "sicdf/linear_model.hpp"
#include "sicdf/nelder_mead.hpp"
#include "sicdf/rng.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

namespace sicdf {

struct ThetaFit
{
  Direction theta;
  double criterion = 0.0;
  std::size_t degenerate_terms = 0;
  std::size_t iterations = 0;
  std::size_t evaluations = 0;
  bool converged = false;
  std::vector<TracePoint> trace;
  std::size_t runs = 0;          // simplex runs attempted (1 + restarts)
  std::size_t winning_run = 0;   // 0 is the run from init
};

//! v -> S(canonicalize(v)); +inf for the zero vector.
template<Kernel K>
double index_objective(const CriterionEvaluator<K>& eval, double h, const std::vector<double>& v)
{
  Direction theta;
  try {
    theta = Direction::canonicalize(v);
  } catch (const NumericalError&) {
    return std::numeric_limits<double>::infinity();
  }
  return eval(theta, h);
}

//! Starting direction for the index search: the OLS slope direction.
inline Direction ols_direction(const Dataset& data)
{
  return Direction::canonicalize(ols_fit(data).beta);
}

inline bool lexicographically_less(const Direction& a, const Direction& b)
{
  return std::lexicographical_compare(a.vector().begin(), a.vector().end(), b.vector().begin(),
                                      b.vector().end());
}

//! Minimises S over directions by simplex search in unconstrained R^d, first
//! from `init` (the OLS direction when absent), then from `restarts` random
//! unit vectors drawn from the seed. The smallest criterion wins, ties going
//! to the lexicographically smallest direction.
template<Kernel K = Epanechnikov>
ThetaFit fit_theta(const CriterionEvaluator<K>& eval, double h, std::optional<Direction> init,
                   const SimplexOptions& options, std::uint64_t seed = 0)
{
  options.validate();
  if (!(h > 0.0)) {
    throw ValidationError("fit_theta: bandwidth must be positive");
  }
  const Dataset& data = eval.data();
  const std::size_t d = data.dim();
  std::vector<std::vector<double>> starts;
  starts.push_back(init ? init->vector() : ols_direction(data).vector());
  Rng rng(derive_seed(seed, Stream::restarts));
  for (std::size_t r = 0; r < options.restarts; ++r) {
    std::vector<double> v(d);
    double ss = 0.0;
    do {
      ss = 0.0;
      for (double& c : v) {
        c = rng.normal();
        ss += c * c;
      }
    } while (ss < 1e-8);
    starts.push_back(Direction::canonicalize(v).vector());
  }

  auto objective = [&](const std::vector<double>& v) { return index_objective(eval, h, v); };

  std::optional<ThetaFit> best;
  for (std::size_t r = 0; r < starts.size(); ++r) {
    SimplexResult run;
    try {
      run = nelder_mead_minimize(objective, starts[r], options);
    } catch (const NumericalError&) {
      continue;
    }
    if (!std::isfinite(run.value)) {
      continue;
    }
    ThetaFit candidate;
    candidate.theta = Direction::canonicalize(run.point);
    const CriterionValue cv = eval.evaluate(candidate.theta, h);
    candidate.criterion = cv.total;
    candidate.degenerate_terms = cv.degenerate_terms;
    candidate.iterations = run.iterations;
    candidate.evaluations = run.evaluations;
    candidate.converged = run.converged;
    candidate.trace = std::move(run.trace);
    candidate.winning_run = r;
    if (!best || candidate.criterion < best->criterion ||
        (candidate.criterion == best->criterion &&
         lexicographically_less(candidate.theta, best->theta))) {
      best = std::move(candidate);
    }
  }
  if (!best) {
    throw NumericalError("fit_theta: no simplex run produced a finite criterion");
  }
  best->runs = starts.size();
  return *best;
}

template<Kernel K = Epanechnikov>
ThetaFit fit_theta(const Dataset& data, const SphereSet& spheres, double h,
                   std::optional<Direction> init, const SimplexOptions& options,
                   std::uint64_t seed = 0, K kernel = {})
{
  const CriterionEvaluator<K> eval(data, spheres, kernel);
  return fit_theta(eval, h, std::move(init), options, seed);
}

} // namespace sicdf
