#pragma once

// Slow, direct reference implementations used as test oracles. They follow
// the defining formulas term by term and share no code with the library
// beyond the Dataset container and the kernel function.

#include "sicdf/dataset.hpp"
#include "sicdf/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace oracle {

inline double kernel(double u)
{
  return std::abs(u) < 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
}

//! Local linear CDF at index value z from the points `keep`, normalising
//! the moment sums by (count * h), with the Nadaraya-Watson and global
//! empirical-CDF fallbacks, clamped to [0, 1].
inline double local_linear(const std::vector<double>& z, const std::vector<double>& y,
                           const std::vector<std::size_t>& keep, double at, double h, double level)
{
  const double m = static_cast<double>(keep.size());
  double t0 = 0.0, t1 = 0.0, t2 = 0.0;
  for (std::size_t k : keep) {
    const double u = (at - z[k]) / h;
    t0 += kernel(u) / (m * h);
    t1 += kernel(u) * u / (m * h);
    t2 += kernel(u) * u * u / (m * h);
  }
  (void)t0;
  double num = 0.0, den = 0.0;
  for (std::size_t k : keep) {
    const double u = (at - z[k]) / h;
    const double w = kernel(u) * (t2 - u * t1);
    den += w;
    if (y[k] <= level) {
      num += w;
    }
  }
  double value = 0.0;
  if (std::abs(den) > 1e-12) {
    value = num / den;
  } else {
    double nw_num = 0.0, nw_den = 0.0;
    for (std::size_t k : keep) {
      const double kv = kernel((at - z[k]) / h);
      nw_den += kv;
      if (y[k] <= level) {
        nw_num += kv;
      }
    }
    if (nw_den > 1e-12) {
      value = nw_num / nw_den;
    } else {
      double count = 0.0;
      for (std::size_t k : keep) {
        if (y[k] <= level) {
          count += 1.0;
        }
      }
      value = count / m;
    }
  }
  return std::clamp(value, 0.0, 1.0);
}

inline std::vector<double> project(const sicdf::Dataset& data, const std::vector<double>& theta)
{
  std::vector<double> z(data.size(), 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j = 0; j < data.dim(); ++j) {
      z[i] += theta[j] * data.x(i, j);
    }
  }
  return z;
}

//! F_{-i,-j}(level | theta^T X_i).
inline double loo2(const sicdf::Dataset& data, const std::vector<double>& theta, double h,
                   std::size_t i, std::size_t j, double level)
{
  const std::vector<double> z = project(data, theta);
  std::vector<std::size_t> keep;
  for (std::size_t k = 0; k < data.size(); ++k) {
    if (k != i && k != j) {
      keep.push_back(k);
    }
  }
  return local_linear(z, data.responses(), keep, z[i], h, level);
}

struct Ball
{
  std::vector<double> center;
  double radius;
};

inline bool inside(const sicdf::Dataset& data, std::size_t i, const Ball& b)
{
  double ss = 0.0;
  for (std::size_t j = 0; j < data.dim(); ++j) {
    ss += (data.x(i, j) - b.center[j]) * (data.x(i, j) - b.center[j]);
  }
  return std::sqrt(ss) <= b.radius;
}

//! Sum over j of [ F_{-j}(A, Y_j) - (1/(n-1)) sum_{i != j, X_i in A} F_{-i,-j}(Y_j | theta^T X_i) ]^2,
//! every inner estimate recomputed from scratch.
inline double sphere_term(const sicdf::Dataset& data, const std::vector<double>& theta, double h,
                          const Ball& ball)
{
  const std::size_t n = data.size();
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double joint = 0.0, smoothed = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (i == j || !inside(data, i, ball)) {
        continue;
      }
      if (data.y(i) <= data.y(j)) {
        joint += 1.0;
      }
      smoothed += loo2(data, theta, h, i, j, data.y(j));
    }
    const double diff = (joint - smoothed) / static_cast<double>(n - 1);
    total += diff * diff;
  }
  return total;
}

inline double criterion(const sicdf::Dataset& data, const std::vector<double>& theta, double h,
                        const std::vector<Ball>& balls)
{
  double total = 0.0;
  for (const auto& b : balls) {
    total += sphere_term(data, theta, h, b);
  }
  return total / static_cast<double>(balls.size());
}

//! Least squares through the normal equations (X^T X) b = X^T y with an
//! intercept column, solved by Gaussian elimination with partial pivoting.
inline std::vector<double> normal_equations(const sicdf::Dataset& data)
{
  const std::size_t p = data.dim() + 1;
  std::vector<std::vector<double>> a(p, std::vector<double>(p + 1, 0.0));
  for (std::size_t i = 0; i < data.size(); ++i) {
    std::vector<double> row{1.0};
    for (std::size_t j = 0; j < data.dim(); ++j) {
      row.push_back(data.x(i, j));
    }
    for (std::size_t r = 0; r < p; ++r) {
      for (std::size_t c = 0; c < p; ++c) {
        a[r][c] += row[r] * row[c];
      }
      a[r][p] += row[r] * data.y(i);
    }
  }
  for (std::size_t c = 0; c < p; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < p; ++r) {
      if (std::abs(a[r][c]) > std::abs(a[piv][c])) {
        piv = r;
      }
    }
    std::swap(a[c], a[piv]);
    for (std::size_t r = 0; r < p; ++r) {
      if (r == c) {
        continue;
      }
      const double f = a[r][c] / a[c][c];
      for (std::size_t k = c; k <= p; ++k) {
        a[r][k] -= f * a[c][k];
      }
    }
  }
  std::vector<double> b(p);
  for (std::size_t r = 0; r < p; ++r) {
    b[r] = a[r][p] / a[r][r];
  }
  return b;  // intercept first
}

struct AnwSolution
{
  double lambda;
  std::vector<double> p;  // over all points, zero outside the window
};

//! Empirical-likelihood weights by scanning lambda over a fine grid of the
//! admissible interval for the sign change of sum t/(1 + lambda t), then
//! refining the bracketing cell with regula falsi (Illinois variant).
inline AnwSolution anw(const std::vector<double>& z, double at, double H, std::size_t scan = 200000)
{
  std::vector<double> t, kv;
  double tmax = 0.0, tmin = 0.0;
  for (double zi : z) {
    const double k = kernel((zi - at) / H);
    kv.push_back(k);
    t.push_back((zi - at) * k);
    tmax = std::max(tmax, t.back());
    tmin = std::min(tmin, t.back());
  }
  auto g = [&](double l) {
    double acc = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      if (kv[i] > 0.0) {
        acc += t[i] / (1.0 + l * t[i]);
      }
    }
    return acc;
  };
  double lambda = 0.0;
  if (tmax > 0.0 && tmin < 0.0) {
    const double lo = -1.0 / tmax, hi = -1.0 / tmin;
    double a = lo, ga = 0.0, b = hi, gb = 0.0;
    double prev = lo + (hi - lo) / static_cast<double>(scan);
    double gprev = g(prev);
    for (std::size_t s = 2; s < scan; ++s) {
      const double l = lo + (hi - lo) * static_cast<double>(s) / static_cast<double>(scan);
      const double gl = g(l);
      if (gprev >= 0.0 && gl <= 0.0) {
        a = prev, ga = gprev, b = l, gb = gl;
        break;
      }
      prev = l, gprev = gl;
    }
    int side = 0;
    for (int it = 0; it < 500 && b - a > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
      const double c = (a * gb - b * ga) / (gb - ga);
      const double gc = g(c);
      if (gc == 0.0) {
        a = b = c;
        break;
      }
      if ((gc > 0.0) == (ga > 0.0)) {
        a = c, ga = gc;
        if (side == -1) {
          gb *= 0.5;
        }
        side = -1;
      } else {
        b = c, gb = gc;
        if (side == 1) {
          ga *= 0.5;
        }
        side = 1;
      }
    }
    lambda = 0.5 * (a + b);
  }
  AnwSolution sol{lambda, std::vector<double>(z.size(), 0.0)};
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    if (kv[i] > 0.0) {
      sol.p[i] = 1.0 / (1.0 + lambda * t[i]);
      total += sol.p[i];
    }
  }
  for (double& v : sol.p) {
    v /= total;
  }
  return sol;
}

//! sum p K I(Y <= y) / sum p K with the oracle weights.
inline double anw_cdf(const std::vector<double>& z, const std::vector<double>& y, double at, double H,
                      double level)
{
  const AnwSolution sol = anw(z, at, H);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double w = sol.p[i] * kernel((z[i] - at) / H);
    den += w;
    if (y[i] <= level) {
      num += w;
    }
  }
  return num / den;
}

//! Best unit vector of a 3-D objective over a polar grid of the hemisphere
//! with first component >= 0 at `step_deg` resolution.
inline std::vector<double> grid_search_sphere(const std::function<double(const std::vector<double>&)>& f,
                                              double step_deg = 1.0)
{
  const double pi = std::acos(-1.0);
  const double step = step_deg * pi / 180.0;
  std::vector<double> best;
  double best_value = INFINITY;
  // theta = (cos a, sin a cos b, sin a sin b), a in [0, 90], b in [0, 360)
  for (double a = 0.0; a <= pi / 2 + 1e-12; a += step) {
    for (double b = 0.0; b < 2 * pi - 1e-12; b += step) {
      std::vector<double> v{std::cos(a), std::sin(a) * std::cos(b), std::sin(a) * std::sin(b)};
      const double value = f(v);
      if (value < best_value) {
        best_value = value;
        best = v;
      }
      if (a == 0.0) {
        break;
      }
    }
  }
  return best;
}

} // namespace oracle
