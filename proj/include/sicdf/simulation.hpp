#pragma once

// Simulation models with known single-index structure and the replicated
// study harness that scores index recovery and conditional-CDF accuracy.
//
//   example1: Y = theta^T X + e, theta = (1, 2, 0, 3)/sqrt(14)
//   example2: Y = (sin X1 + sin X2 + sin X3 + sin X4)/2 + e, theta = (1,1,1,1)/2
//
// with X_ij and e_i independent N(0, 1).

#include "sicdf/anw.hpp"
#include "sicdf/bandwidth.hpp"
#include "sicdf/criterion.hpp"
#include "sicdf/fit.hpp"
#include "sicdf/local_linear.hpp"
#include "sicdf/rng.hpp"

#include <cmath>
#include <cstring>
#include <memory>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace sicdf {

enum class Model
{
  example1,
  example2,
};

inline const char* to_string(Model m)
{
  return m == Model::example1 ? "example1" : "example2";
}

inline Model model_from_name(const std::string& name)
{
  if (name == "example1") {
    return Model::example1;
  }
  if (name == "example2") {
    return Model::example2;
  }
  throw ValidationError("unknown model '" + name + "' (expected example1 or example2)");
}

struct GeneratedData
{
  Dataset data;
  Direction theta;
};

inline double normal_cdf(double x)
{
  return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

inline Direction true_direction(Model model)
{
  return model == Model::example1 ? Direction::canonicalize(std::vector<double>{1.0, 2.0, 0.0, 3.0})
                                  : Direction::canonicalize(std::vector<double>{1.0, 1.0, 1.0, 1.0});
}

namespace detail {

template<typename Response>
GeneratedData generate(std::size_t n, Rng& rng, bool noise, Model model, Response response)
{
  if (n == 0) {
    throw ValidationError("simulation: n must be at least 1");
  }
  std::vector<double> x(n * 4), y(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      x[i * 4 + j] = rng.normal();
    }
    const double e = rng.normal();
    y[i] = response(std::span<const double>(x.data() + i * 4, 4)) + (noise ? e : 0.0);
  }
  return {Dataset(std::move(x), std::move(y), 4), true_direction(model)};
}

} // namespace detail

//! `noise = false` drops the error term (draws are still consumed).
inline GeneratedData gen_example1(std::size_t n, Rng& rng, bool noise = true)
{
  const Direction theta = true_direction(Model::example1);
  return detail::generate(n, rng, noise, Model::example1,
                          [&](std::span<const double> x) { return dot(theta.components(), x); });
}

inline GeneratedData gen_example2(std::size_t n, Rng& rng, bool noise = true)
{
  return detail::generate(n, rng, noise, Model::example2, [](std::span<const double> x) {
    return 0.5 * (std::sin(x[0]) + std::sin(x[1]) + std::sin(x[2]) + std::sin(x[3]));
  });
}

inline GeneratedData generate(Model model, std::size_t n, Rng& rng)
{
  return model == Model::example1 ? gen_example1(n, rng) : gen_example2(n, rng);
}

//! F(y | theta^T X = z) = Phi(y - z) for example1.
inline double true_cdf_example1(const Direction& /*theta_true*/, double z, double y)
{
  return normal_cdf(y - z);
}

struct McEstimate
{
  double value = 0.0;
  double std_error = 0.0;
};

inline constexpr std::size_t kMinMonteCarloSize = 10'000;

//! Monte Carlo values of m(X) = (1/2) sum sin X_j over X ~ N(0, I)
//! conditioned on theta^T X = z, drawn exactly as X = z theta + (I - theta theta^T) xi.
inline std::vector<double> example2_conditional_means(const Direction& theta, double z,
                                                      std::size_t mc_size, Rng& rng)
{
  const std::size_t d = theta.dim();
  std::vector<double> out(mc_size);
  std::vector<double> xi(d);
  for (std::size_t k = 0; k < mc_size; ++k) {
    double proj = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      xi[j] = rng.normal();
      proj += theta[j] * xi[j];
    }
    double m = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      m += std::sin(z * theta[j] + xi[j] - theta[j] * proj);
    }
    out[k] = 0.5 * m;
  }
  return out;
}

inline McEstimate mc_average_cdf(const std::vector<double>& means, double y)
{
  double sum = 0.0, sumsq = 0.0;
  for (double m : means) {
    const double v = normal_cdf(y - m);
    sum += v;
    sumsq += v * v;
  }
  const double n = static_cast<double>(means.size());
  const double mean = sum / n;
  const double var = std::max(0.0, (sumsq - n * mean * mean) / (n - 1.0));
  return {mean, std::sqrt(var / n)};
}

inline McEstimate true_cdf_example2(const Direction& theta_true, double z, double y,
                                    std::size_t mc_size, Rng& rng)
{
  if (mc_size < kMinMonteCarloSize) {
    throw ValidationError("true_cdf_example2: mc_size must be at least 10000");
  }
  return mc_average_cdf(example2_conditional_means(theta_true, z, mc_size, rng), y);
}

using TruthFunction = std::function<double(double z, double y)>;

//! F(y | z) for either model; example2 draws its Monte Carlo sample once per
//! distinct z from a stream keyed by the bit pattern of z, so the function is
//! deterministic and independent of call order.
inline TruthFunction model_truth(Model model, std::size_t mc_size = kMinMonteCarloSize,
                                 std::uint64_t seed = 0)
{
  const Direction theta = true_direction(model);
  if (model == Model::example1) {
    return [theta](double z, double y) { return true_cdf_example1(theta, z, y); };
  }
  if (mc_size < kMinMonteCarloSize) {
    throw ValidationError("model_truth: mc_size must be at least 10000");
  }
  struct Cache
  {
    bool valid = false;
    double z = 0.0;
    std::vector<double> means;
  };
  auto cache = std::make_shared<Cache>();
  return [theta, mc_size, seed, cache](double z, double y) {
    if (!cache->valid || cache->z != z) {
      std::uint64_t bits = 0;
      std::memcpy(&bits, &z, sizeof bits);
      Rng rng(derive_seed(seed, Stream::truth, {bits}));
      cache->means = example2_conditional_means(theta, z, mc_size, rng);
      cache->z = z;
      cache->valid = true;
    }
    return mc_average_cdf(cache->means, y).value;
  };
}

struct Range
{
  double low = 0.0;
  double high = 0.0;
};

//! Points low, low + step, ... not beyond high (with 1e-9 slack).
inline std::vector<double> regular_grid(const Range& r, double step = 0.05)
{
  if (!(r.low <= r.high)) {
    throw ValidationError("regular grid: empty range");
  }
  std::vector<double> pts;
  for (std::size_t k = 0;; ++k) {
    const double v = r.low + step * static_cast<double>(k);
    if (v > r.high + 1e-9) {
      break;
    }
    pts.push_back(v);
  }
  return pts;
}

//! Mean of |Fhat(y | z) - truth(z, y)| over the 0.05-spaced grid in the
//! (index, response) plane.
template<Kernel K = Epanechnikov>
double avg_abs_error(const Dataset& data, const Direction& theta_hat, double H,
                     const TruthFunction& truth, const Range& z_range, const Range& y_range,
                     FinalEstimator estimator = FinalEstimator::local_linear, K kernel = {})
{
  const std::vector<double> zs = regular_grid(z_range);
  const std::vector<double> ys = regular_grid(y_range);
  if (zs.empty() || ys.empty()) {
    throw ValidationError("avg_abs_error: empty grid");
  }
  const std::vector<double> idx = data.project(theta_hat.components());
  double acc = 0.0;
  for (double z : zs) {
    if (estimator == FinalEstimator::local_linear) {
      const LocalLinearWeights lw = moment_sums(idx, z, H, kernel);
      for (double y : ys) {
        acc += std::abs(detail::weighted_cdf(lw, data.responses(), y).value - truth(z, y));
      }
    } else {
      const StepCdf cdf = anw_distribution(idx, data.responses(), H, z, kernel);
      for (double y : ys) {
        acc += std::abs(cdf(y) - truth(z, y));
      }
    }
  }
  return acc / static_cast<double>(zs.size() * ys.size());
}

//! Evaluation ranges: index over [-2, 2] clipped to the 5th-95th percentile
//! of theta^T X, response over its 5th-95th percentile.
inline std::pair<Range, Range> error_ranges(const Dataset& data, const Direction& theta)
{
  const std::vector<double> idx = data.project(theta.components());
  Range z{std::max(-2.0, sample_quantile(idx, 0.05)), std::min(2.0, sample_quantile(idx, 0.95))};
  Range y{sample_quantile(data.responses(), 0.05), sample_quantile(data.responses(), 0.95)};
  return {z, y};
}

struct SphereConfig
{
  enum class Mode
  {
    grid,
    data,
  };
  Mode mode = Mode::grid;
  double low = -1.5;
  double high = 1.5;
  std::size_t points = 5;
  double radius = 1.0;

  SphereSet build(const Dataset& data) const
  {
    return mode == Mode::grid ? make_sphere_grid(low, high, points, data.dim(), radius)
                              : make_data_spheres(data, radius);
  }
};

struct BandwidthPolicy
{
  enum class Mode
  {
    bootstrap,
    fixed,
  };
  Mode mode = Mode::bootstrap;
  double fixed_h = 0.0;
  double fixed_H = 0.0;               // 0: select H by bootstrap
  std::vector<double> multipliers{1.0};  // applied to h; each in {0.7, 1.0, 1.5}
};

struct StudyConfig
{
  Model model = Model::example1;
  std::size_t n = 200;
  std::size_t replications = 10;
  SphereConfig spheres;
  BandwidthPolicy bandwidth;
  double grid_start = 0.1;
  double grid_ratio = 1.2;
  std::size_t grid_size = 15;
  std::size_t h_replicates = 20;
  std::size_t H_replicates = 20;
  SimplexOptions options;
  SimplexOptions bootstrap_options{0.1, 500, 1e-6, 0};
  std::size_t mc_size = kMinMonteCarloSize;
  FinalEstimator estimator = FinalEstimator::local_linear;
  std::uint64_t seed = 1;

  void validate() const
  {
    if (replications < 1) {
      throw ValidationError("study: replications must be at least 1");
    }
    if (bandwidth.multipliers.empty()) {
      throw ValidationError("study: at least one bandwidth multiplier is required");
    }
    for (double m : bandwidth.multipliers) {
      if (m != 0.7 && m != 1.0 && m != 1.5) {
        throw ValidationError("study: bandwidth multipliers must be 0.7, 1.0 or 1.5");
      }
    }
    if (bandwidth.mode == BandwidthPolicy::Mode::fixed && !(bandwidth.fixed_h > 0.0)) {
      throw ValidationError("study: fixed bandwidth policy needs h > 0");
    }
    options.validate();
    bootstrap_options.validate();
  }

  BandwidthGrid grid() const { return BandwidthGrid::geometric(grid_start, grid_ratio, grid_size); }
};

struct MultiplierFit
{
  double multiplier = 1.0;
  double h = 0.0;
  Direction theta_hat;
  double inner_product = 0.0;  // theta^T theta_hat, signed
  double criterion = 0.0;
  bool converged = false;
};

struct StudyRecord
{
  std::size_t replication = 0;
  bool ok = false;
  std::string error;
  double h_selected = 0.0;
  double H = 0.0;
  std::vector<MultiplierFit> fits;
  double error_estimated = 0.0;  // avg abs error with theta_hat ("E")
  double error_true = 0.0;       // avg abs error with the true theta ("T")

  //! The fit at multiplier 1.0, or the first one.
  const MultiplierFit& primary() const
  {
    for (const auto& f : fits) {
      if (f.multiplier == 1.0) {
        return f;
      }
    }
    return fits.front();
  }
};

struct BoxStats
{
  double min = 0.0, q1 = 0.0, median = 0.0, q3 = 0.0, max = 0.0;
  std::size_t count = 0;
};

inline BoxStats box_stats(const std::vector<double>& values)
{
  if (values.empty()) {
    return {};
  }
  return {sample_quantile(values, 0.0), sample_quantile(values, 0.25), sample_quantile(values, 0.5),
          sample_quantile(values, 0.75), sample_quantile(values, 1.0), values.size()};
}

struct StudyReport
{
  StudyConfig config;
  Direction theta_true;
  std::vector<StudyRecord> records;
  std::size_t failures = 0;

  std::vector<double> inner_products(double multiplier = 1.0) const
  {
    std::vector<double> out;
    for (const auto& r : records) {
      if (!r.ok) {
        continue;
      }
      for (const auto& f : r.fits) {
        if (f.multiplier == multiplier) {
          out.push_back(f.inner_product);
        }
      }
    }
    return out;
  }

  template<typename Field>
  std::vector<double> collect(Field field) const
  {
    std::vector<double> out;
    for (const auto& r : records) {
      if (r.ok) {
        out.push_back(field(r));
      }
    }
    return out;
  }
};

//! One replication of the study: generate, select bandwidths, fit, score.
template<Kernel K = Epanechnikov>
StudyRecord run_replication(const StudyConfig& config, std::size_t rep, K kernel = {})
{
  StudyRecord rec;
  rec.replication = rep;
  const std::uint64_t rep_seed = derive_seed(config.seed, {static_cast<std::uint64_t>(rep)});
  Rng data_rng(derive_seed(rep_seed, Stream::data));
  const GeneratedData gen = generate(config.model, config.n, data_rng);
  const SphereSet spheres = config.spheres.build(gen.data);
  const BandwidthGrid grid = config.grid();
  const CriterionEvaluator<K> eval(gen.data, spheres, kernel);

  if (config.bandwidth.mode == BandwidthPolicy::Mode::bootstrap) {
    rec.h_selected = select_h(gen.data, spheres, grid, config.h_replicates,
                              config.bootstrap_options, rep_seed, kernel).value;
  } else {
    rec.h_selected = config.bandwidth.fixed_h;
  }
  for (double m : config.bandwidth.multipliers) {
    MultiplierFit mf;
    mf.multiplier = m;
    mf.h = rec.h_selected * m;
    const ThetaFit tf = fit_theta(eval, mf.h, std::nullopt, config.options, rep_seed);
    mf.theta_hat = tf.theta;
    mf.inner_product = dot(gen.theta.components(), tf.theta.components());
    mf.criterion = tf.criterion;
    mf.converged = tf.converged;
    rec.fits.push_back(std::move(mf));
  }
  const Direction& theta_hat = rec.primary().theta_hat;
  rec.H = config.bandwidth.fixed_H > 0.0
            ? config.bandwidth.fixed_H
            : select_H(gen.data, theta_hat, grid, config.H_replicates, rep_seed, kernel).value;

  const auto [z_range, y_range] = error_ranges(gen.data, gen.theta);
  const TruthFunction truth = model_truth(config.model, config.mc_size, rep_seed);
  rec.error_estimated =
    avg_abs_error(gen.data, theta_hat, rec.H, truth, z_range, y_range, config.estimator, kernel);
  rec.error_true =
    avg_abs_error(gen.data, gen.theta, rec.H, truth, z_range, y_range, config.estimator, kernel);
  rec.ok = true;
  return rec;
}

//! Replications run in order; a failed replication is recorded, and more than
//! 20% failures aborts the study.
template<Kernel K = Epanechnikov>
StudyReport run_study(const StudyConfig& config, K kernel = {})
{
  config.validate();
  StudyReport report;
  report.config = config;
  report.theta_true = true_direction(config.model);
  for (std::size_t rep = 0; rep < config.replications; ++rep) {
    try {
      report.records.push_back(run_replication(config, rep, kernel));
    } catch (const std::exception& e) {
      StudyRecord failed;
      failed.replication = rep;
      failed.error = e.what();
      report.records.push_back(std::move(failed));
      ++report.failures;
    }
  }
  if (5 * report.failures > config.replications) {
    throw NumericalError("run_study: " + std::to_string(report.failures) + " of " +
                         std::to_string(config.replications) + " replications failed");
  }
  return report;
}

} // namespace sicdf
