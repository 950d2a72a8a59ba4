#pragma once

// Adjusted Nadaraya-Watson conditional CDF with a product kernel in the full
// covariate space. The moment constraint is now vector valued,
//
//   sum p_i (x_i - x) K_H(x_i - x) = 0,
//
// and p_i = 1 / (m (1 + lambda^T t_i)) over the m in-window points, with
// lambda the minimiser of the convex dual -sum log(1 + lambda^T t_i).

#include "sicdf/anw.hpp"
#include "sicdf/dataset.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <vector>

namespace sicdf {

struct MultivariateAnwWeights
{
  std::vector<double> p;
  std::vector<double> kernel;
  std::vector<double> lambda;
  double constraint_residual = 0.0;  // max-norm of sum p_i t_i
  std::size_t window = 0;
  int newton_steps = 0;
};

template<Kernel K = Epanechnikov>
MultivariateAnwWeights anw_weights_multivariate(const Dataset& data, std::span<const double> x,
                                                double H, K kernel = {})
{
  if (!(H > 0.0)) {
    throw ValidationError("anw_weights_multivariate: bandwidth must be positive");
  }
  const std::size_t n = data.size();
  const std::size_t d = data.dim();
  if (x.size() != d) {
    throw ValidationError("anw_weights_multivariate: evaluation point dimension mismatch");
  }
  MultivariateAnwWeights out;
  out.p.assign(n, 0.0);
  out.kernel.assign(n, 0.0);
  std::vector<std::size_t> window;
  std::vector<Eigen::VectorXd> t;
  for (std::size_t i = 0; i < n; ++i) {
    double kv = 1.0;
    Eigen::VectorXd diff(d);
    for (std::size_t j = 0; j < d; ++j) {
      diff[static_cast<Eigen::Index>(j)] = data.x(i, j) - x[j];
      kv *= kernel(diff[static_cast<Eigen::Index>(j)] / H);
    }
    out.kernel[i] = kv;
    if (kv > 0.0) {
      window.push_back(i);
      t.push_back(diff * kv);
    }
  }
  out.window = window.size();
  if (window.empty()) {
    throw ExtrapolationError("anw_weights_multivariate: no observations inside the kernel window");
  }

  const auto dim = static_cast<Eigen::Index>(d);
  Eigen::VectorXd lambda = Eigen::VectorXd::Zero(dim);
  auto dual = [&](const Eigen::VectorXd& l, bool& feasible) {
    double acc = 0.0;
    feasible = true;
    for (const auto& ti : t) {
      const double a = 1.0 + l.dot(ti);
      if (!(a > 0.0)) {
        feasible = false;
        return 0.0;
      }
      acc -= std::log(a);
    }
    return acc;
  };

  Eigen::VectorXd grad(dim);
  double residual = 0.0;
  for (int step = 0; step < 200; ++step) {
    grad.setZero();
    Eigen::MatrixXd hess = Eigen::MatrixXd::Zero(dim, dim);
    for (const auto& ti : t) {
      const double a = 1.0 + lambda.dot(ti);
      grad -= ti / a;
      hess += ti * ti.transpose() / (a * a);
    }
    // sum p_i t_i = -grad / m at the normalised weights
    residual = grad.cwiseAbs().maxCoeff() / static_cast<double>(t.size());
    if (residual <= 1e-13) {
      break;
    }
    const Eigen::VectorXd delta = hess.ldlt().solve(-grad);
    if (!delta.allFinite()) {
      throw BracketError("anw_weights_multivariate: singular constraint system (window spans "
                         "fewer dimensions than the covariates)");
    }
    bool feasible = false;
    const double base = dual(lambda, feasible);
    double step_size = 1.0;
    Eigen::VectorXd next = lambda;
    for (int halving = 0; halving < 60; ++halving) {
      next = lambda + step_size * delta;
      const double value = dual(next, feasible);
      if (feasible && value <= base + 1e-4 * step_size * grad.dot(delta)) {
        break;
      }
      step_size *= 0.5;
    }
    if (!feasible || next == lambda) {
      break;
    }
    lambda = next;
    out.newton_steps = step + 1;
  }

  double total = 0.0;
  for (std::size_t q = 0; q < window.size(); ++q) {
    const double v = 1.0 / (1.0 + lambda.dot(t[q]));
    out.p[window[q]] = v;
    total += v;
  }
  Eigen::VectorXd moment = Eigen::VectorXd::Zero(dim);
  for (std::size_t q = 0; q < window.size(); ++q) {
    out.p[window[q]] /= total;
    moment += out.p[window[q]] * t[q];
  }
  out.constraint_residual = moment.cwiseAbs().maxCoeff();
  if (!(out.constraint_residual <= kAnwConstraintTolerance)) {
    throw BracketError("anw_weights_multivariate: the evaluation point is not inside the convex "
                       "hull of the in-window moment vectors");
  }
  out.lambda.assign(lambda.data(), lambda.data() + dim);
  return out;
}

template<Kernel K = Epanechnikov>
StepCdf anw_distribution_multivariate(const Dataset& data, std::span<const double> x, double H,
                                      K kernel = {})
{
  const MultivariateAnwWeights aw = anw_weights_multivariate(data, x, H, kernel);
  return detail::weighted_step_cdf(aw.p, aw.kernel, data.responses());
}

} // namespace sicdf
