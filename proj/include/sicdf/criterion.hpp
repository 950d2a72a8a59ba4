#pragma once

// Sphere-averaged least-squares criterion S(theta).
//
// For one ball A,
//
//   S(theta, A) = sum_j { Fhat_{-j}(A, Y_j)
//                         - (1/(n-1)) sum_{i != j, X_i in A} Fhat_{-i,-j}(Y_j | theta^T X_i) }^2
//
// and S(theta) is the mean of S(theta, A) over a finite set of balls.
//
// The leave-two-out estimates Fhat_{-i,-j}(Y_j | theta^T X_i) do not depend
// on the ball, so one evaluation fills the n x n matrix of them once and the
// balls only contribute membership sums. Each matrix row costs O(n): the
// kernel neighbours of X_i are collected in ascending-Y order, the moment
// sums over them are downdated by the single excluded point j, and the
// indicator-weighted sums are running totals swept in the same order.

#include "sicdf/dataset.hpp"
#include "sicdf/direction.hpp"
#include "sicdf/error.hpp"
#include "sicdf/kernel.hpp"
#include "sicdf/local_linear.hpp"
#include "sicdf/parallel.hpp"
#include "sicdf/summation.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <numeric>
#include <span>
#include <vector>

namespace sicdf {

struct Sphere
{
  std::vector<double> center;
  double radius = 1.0;
};

//! Closed Euclidean ball membership.
inline bool sphere_contains(const Sphere& s, std::span<const double> x)
{
  if (x.size() != s.center.size()) {
    throw ValidationError("sphere_contains: dimension mismatch");
  }
  double ss = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) {
    const double diff = x[j] - s.center[j];
    ss += diff * diff;
  }
  return ss <= s.radius * s.radius;
}

struct SphereSet
{
  std::vector<Sphere> spheres;

  std::size_t size() const { return spheres.size(); }
  bool empty() const { return spheres.empty(); }

  //! Concatenation; the way to mix radii.
  SphereSet& append(const SphereSet& other)
  {
    spheres.insert(spheres.end(), other.spheres.begin(), other.spheres.end());
    return *this;
  }
};

inline constexpr std::size_t kDefaultMaxSpheres = 1'000'000;

//! Balls of radius r centred on the Cartesian grid with `points_per_axis`
//! equispaced values in [low, high] along every axis. A one-point axis sits
//! at the midpoint.
inline SphereSet make_sphere_grid(double low, double high, std::size_t points_per_axis,
                                  std::size_t d, double r,
                                  std::size_t max_spheres = kDefaultMaxSpheres)
{
  if (points_per_axis == 0) {
    throw ValidationError("make_sphere_grid: points_per_axis must be at least 1");
  }
  if (!(low < high)) {
    throw ValidationError("make_sphere_grid: low must be below high");
  }
  if (!(r > 0.0)) {
    throw ValidationError("make_sphere_grid: radius must be positive");
  }
  if (d == 0) {
    throw ValidationError("make_sphere_grid: dimension must be at least 1");
  }
  std::size_t count = 1;
  for (std::size_t k = 0; k < d; ++k) {
    if (count > max_spheres / points_per_axis) {
      throw ValidationError("make_sphere_grid: grid exceeds the cap of " +
                            std::to_string(max_spheres) + " spheres");
    }
    count *= points_per_axis;
  }
  std::vector<double> axis(points_per_axis);
  if (points_per_axis == 1) {
    axis[0] = 0.5 * (low + high);
  } else {
    const double spacing = (high - low) / static_cast<double>(points_per_axis - 1);
    for (std::size_t k = 0; k < points_per_axis; ++k) {
      axis[k] = low + spacing * static_cast<double>(k);
    }
    axis.back() = high;
  }
  SphereSet set;
  set.spheres.reserve(count);
  std::vector<std::size_t> digit(d, 0);
  for (std::size_t c = 0; c < count; ++c) {
    Sphere s{std::vector<double>(d), r};
    for (std::size_t k = 0; k < d; ++k) {
      s.center[k] = axis[digit[k]];
    }
    set.spheres.push_back(std::move(s));
    for (std::size_t k = d; k-- > 0;) {
      if (++digit[k] < points_per_axis) {
        break;
      }
      digit[k] = 0;
    }
  }
  return set;
}

//! One ball of radius r around every data row (duplicates kept).
inline SphereSet make_data_spheres(const Dataset& data, double r)
{
  if (!(r > 0.0)) {
    throw ValidationError("make_data_spheres: radius must be positive");
  }
  SphereSet set;
  set.spheres.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto row = data.row(i);
    set.spheres.push_back(Sphere{std::vector<double>(row.begin(), row.end()), r});
  }
  return set;
}

//! Proportion of the n-1 pairs other than j with X_i in s and Y_i <= y.
inline double empirical_joint(const Dataset& data, const Sphere& s, double y,
                              std::size_t excluded_j)
{
  const std::size_t n = data.size();
  if (n < 2) {
    throw ValidationError("empirical_joint: need at least 2 observations");
  }
  if (excluded_j >= n) {
    throw ValidationError("empirical_joint: index out of range");
  }
  std::size_t count = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (i != excluded_j && data.y(i) <= y && sphere_contains(s, data.row(i))) {
      ++count;
    }
  }
  return static_cast<double>(count) / static_cast<double>(n - 1);
}

//! Rows of X inside each ball. Depends on X only, so bootstrap resamples
//! that keep X can share one instance.
class SphereMembership
{
public:
  SphereMembership(const Dataset& data, const SphereSet& spheres)
    : n_(data.size())
    , members_(spheres.size())
    , in_any_(data.size(), 0)
  {
    if (spheres.empty()) {
      throw ValidationError("criterion: empty sphere set");
    }
    for (std::size_t s = 0; s < spheres.size(); ++s) {
      if (spheres.spheres[s].center.size() != data.dim()) {
        throw ValidationError("criterion: sphere dimension does not match the data");
      }
      if (!(spheres.spheres[s].radius > 0.0)) {
        throw ValidationError("criterion: sphere radius must be positive");
      }
      for (std::size_t i = 0; i < n_; ++i) {
        if (sphere_contains(spheres.spheres[s], data.row(i))) {
          members_[s].push_back(i);
          in_any_[i] = 1;
        }
      }
    }
  }

  std::size_t rows() const { return n_; }
  std::size_t sphere_count() const { return members_.size(); }
  const std::vector<std::size_t>& members(std::size_t s) const { return members_[s]; }
  bool in_any(std::size_t i) const { return in_any_[i] != 0; }

private:
  std::size_t n_;
  std::vector<std::vector<std::size_t>> members_;
  std::vector<char> in_any_;
};

//! values[i * n + j] = clamped Fhat_{-i,-j}(Y_j | z_i); the diagonal is 0.
//! Rows not requested are left at 0.
struct Loo2Matrix
{
  std::size_t n = 0;
  std::vector<double> values;
  std::size_t degenerate_terms = 0;

  double operator()(std::size_t i, std::size_t j) const { return values[i * n + j]; }
};

namespace detail {

struct Neighbour
{
  std::size_t index;
  double k;
  double u;
  double y;
};

//! Rank helpers shared by every evaluation on one response vector.
struct ResponseOrder
{
  std::vector<std::size_t> ascending;   // indices sorted by Y, ties by index
  std::vector<std::size_t> count_le;    // #{k : Y_k <= Y_j}

  explicit ResponseOrder(std::span<const double> y)
    : ascending(y.size())
    , count_le(y.size())
  {
    std::iota(ascending.begin(), ascending.end(), std::size_t{0});
    std::stable_sort(ascending.begin(), ascending.end(),
                     [&](std::size_t a, std::size_t b) { return y[a] < y[b]; });
    std::size_t pos = 0;
    while (pos < ascending.size()) {
      std::size_t end = pos;
      while (end < ascending.size() && y[ascending[end]] == y[ascending[pos]]) {
        ++end;
      }
      for (std::size_t q = pos; q < end; ++q) {
        count_le[ascending[q]] = end;
      }
      pos = end;
    }
  }
};

//! Leave-two-out estimate from explicit sums over nbrs minus `skip`, using
//! the same arithmetic as moment_sums/weighted_cdf. Used when the downdated
//! determinant is too close to cancellation to trust.
inline double direct_loo2(const std::vector<Neighbour>& nbrs, std::size_t skip, double yj,
                          double norm, double ecdf, Fallback& fallback)
{
  double t0 = 0.0, t1 = 0.0, t2 = 0.0;
  for (const auto& nb : nbrs) {
    if (nb.index == skip) {
      continue;
    }
    t0 += nb.k;
    t1 += nb.k * nb.u;
    t2 += nb.k * nb.u * nb.u;
  }
  t0 /= norm;
  t1 /= norm;
  t2 /= norm;
  double num = 0.0, den = 0.0, nw_num = 0.0, nw_den = 0.0;
  for (const auto& nb : nbrs) {
    if (nb.index == skip) {
      continue;
    }
    const double w = nb.k * (t2 - nb.u * t1);
    den += w;
    nw_den += nb.k;
    if (nb.y <= yj) {
      num += w;
      nw_num += nb.k;
    }
  }
  if (std::abs(den) > kDegenerateWeightSum) {
    fallback = Fallback::none;
    return num / den;
  }
  if (nw_den > kDegenerateWeightSum) {
    fallback = Fallback::nadaraya_watson;
    return nw_num / nw_den;
  }
  fallback = Fallback::global_ecdf;
  return ecdf;
}

//! Fills row i of the leave-two-out matrix; returns the fallback count.
template<Kernel K>
std::size_t fill_loo2_row(std::size_t i, std::span<const double> z, std::span<const double> y,
                          const ResponseOrder& order, double h, K kernel, double* row,
                          std::vector<Neighbour>& nbrs, std::vector<double>& k_of,
                          std::vector<double>& u_of)
{
  const std::size_t n = z.size();
  const double zi = z[i];
  nbrs.clear();
  double s0 = 0.0, s1 = 0.0, s2 = 0.0;
  for (std::size_t k : order.ascending) {
    if (k == i) {
      continue;
    }
    const double u = (zi - z[k]) / h;
    const double kv = kernel(u);
    if (kv > 0.0) {
      nbrs.push_back({k, kv, u, y[k]});
      k_of[k] = kv;
      u_of[k] = u;
      s0 += kv;
      s1 += kv * u;
      s2 += kv * u * u;
    }
  }

  const double m = static_cast<double>(n - 2);
  const double norm = m * h;
  std::size_t degenerate = 0;
  double c0 = 0.0, c1 = 0.0;
  std::size_t p = 0;
  for (std::size_t j : order.ascending) {
    const double yj = y[j];
    while (p < nbrs.size() && nbrs[p].y <= yj) {
      c0 += nbrs[p].k;
      c1 += nbrs[p].k * nbrs[p].u;
      ++p;
    }
    if (j == i) {
      row[j] = 0.0;
      continue;
    }
    double a0 = s0, a1 = s1, a2 = s2, b0 = c0, b1 = c1;
    const double kj = k_of[j];
    if (kj > 0.0) {
      const double uj = u_of[j];
      a0 -= kj;
      a1 -= kj * uj;
      a2 -= kj * uj * uj;
      b0 -= kj;
      b1 -= kj * uj;
    }
    const double det = a0 * a2 - a1 * a1;
    const double ecdf =
      static_cast<double>(order.count_le[j] - 1 - (y[i] <= yj ? 1 : 0)) / m;
    double raw = 0.0;
    Fallback fb = Fallback::none;
    const bool suspicious = !(std::abs(det) / norm > 1e-6) || !(det > 1e-9 * a0 * a2);
    if (suspicious) {
      raw = direct_loo2(nbrs, kj > 0.0 ? j : n, yj, norm, ecdf, fb);
    } else {
      raw = (a2 * b0 - a1 * b1) / det;
    }
    if (fb != Fallback::none) {
      ++degenerate;
    }
    row[j] = std::clamp(raw, 0.0, 1.0);
  }
  for (const auto& nb : nbrs) {
    k_of[nb.index] = 0.0;
  }
  return degenerate;
}

} // namespace detail

//! Leave-two-out CDF matrix for index values z; rows with need[i] == 0 are
//! skipped (left zero).
template<Kernel K = Epanechnikov>
Loo2Matrix loo2_matrix(std::span<const double> z, std::span<const double> y,
                       const detail::ResponseOrder& order, double h, std::span<const char> need,
                       K kernel = {})
{
  const std::size_t n = z.size();
  if (n < 3) {
    throw ValidationError("criterion: need at least 3 observations");
  }
  if (!(h > 0.0)) {
    throw ValidationError("criterion: bandwidth must be positive");
  }
  Loo2Matrix out;
  out.n = n;
  out.values.assign(n * n, 0.0);
  std::vector<std::size_t> degenerate(n, 0);
  const std::size_t workers = std::min<std::size_t>(thread_count(), n);
  const std::size_t chunk = (n + workers - 1) / workers;
  parallel_for(workers, [&](std::size_t w) {
    std::vector<detail::Neighbour> nbrs;
    nbrs.reserve(n);
    std::vector<double> k_of(n, 0.0), u_of(n, 0.0);
    const std::size_t end = std::min(n, (w + 1) * chunk);
    for (std::size_t i = w * chunk; i < end; ++i) {
      if (need.empty() || need[i]) {
        degenerate[i] = detail::fill_loo2_row(i, z, y, order, h, kernel,
                                              out.values.data() + i * n, nbrs, k_of, u_of);
      }
    }
  });
  out.degenerate_terms = std::accumulate(degenerate.begin(), degenerate.end(), std::size_t{0});
  return out;
}

template<Kernel K = Epanechnikov>
Loo2Matrix loo2_matrix(const Dataset& data, const Direction& theta, double h, K kernel = {})
{
  const std::vector<double> z = data.project(theta.components());
  const detail::ResponseOrder order(data.responses());
  return loo2_matrix(z, data.responses(), order, h, {}, kernel);
}

struct CriterionValue
{
  double total = 0.0;
  std::vector<double> per_sphere;
  std::size_t degenerate_terms = 0;  // (i, j) pairs, i in some ball, that used a fallback
};

//! S(theta) for a fixed dataset and ball set. Construction precomputes the
//! membership lists and the empirical joint proportions, which do not depend
//! on theta or h.
template<Kernel K = Epanechnikov>
class CriterionEvaluator
{
public:
  CriterionEvaluator(const Dataset& data, const SphereSet& spheres, K kernel = {})
    : CriterionEvaluator(data, std::make_shared<const SphereMembership>(data, spheres), kernel)
  {}

  CriterionEvaluator(Dataset data, std::shared_ptr<const SphereMembership> membership,
                     K kernel = {})
    : data_(std::move(data))
    , membership_(std::move(membership))
    , order_(data_.responses())
    , kernel_(kernel)
  {
    const std::size_t n = data_.size();
    if (n < 3) {
      throw ValidationError("criterion: need at least 3 observations");
    }
    if (membership_->rows() != n) {
      throw ValidationError("criterion: sphere membership built for a different dataset");
    }
    need_.assign(n, 0);
    const std::size_t b = membership_->sphere_count();
    joint_.assign(b * n, 0.0);
    // joint_[s*n + j] = #{i in A_s, i != j, Y_i <= Y_j} / (n-1)
    for (std::size_t s = 0; s < b; ++s) {
      const auto& members = membership_->members(s);
      for (std::size_t i : members) {
        need_[i] = 1;
      }
      if (members.empty()) {
        continue;
      }
      for (std::size_t j = 0; j < n; ++j) {
        std::size_t count = 0;
        for (std::size_t i : members) {
          if (i != j && data_.y(i) <= data_.y(j)) {
            ++count;
          }
        }
        joint_[s * n + j] = static_cast<double>(count) / static_cast<double>(n - 1);
      }
    }
  }

  const Dataset& data() const { return data_; }
  const SphereMembership& membership() const { return *membership_; }
  std::shared_ptr<const SphereMembership> shared_membership() const { return membership_; }

  CriterionValue evaluate(const Direction& theta, double h) const
  {
    const std::size_t n = data_.size();
    const std::vector<double> z = data_.project(theta.components());
    const Loo2Matrix f = loo2_matrix(z, data_.responses(), order_, h, need_, kernel_);
    const std::size_t b = membership_->sphere_count();
    CriterionValue out;
    out.per_sphere.assign(b, 0.0);
    out.degenerate_terms = f.degenerate_terms;
    const double inv = 1.0 / static_cast<double>(n - 1);
    const std::size_t workers = std::min<std::size_t>(thread_count(), b);
    const std::size_t chunk = (b + workers - 1) / workers;
    parallel_for(workers, [&](std::size_t w) {
      std::vector<double> acc(n);
      const std::size_t end = std::min(b, (w + 1) * chunk);
      for (std::size_t s = w * chunk; s < end; ++s) {
        const auto& members = membership_->members(s);
        if (members.empty()) {
          continue;
        }
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t i : members) {
          const double* row = f.values.data() + i * n;
          for (std::size_t j = 0; j < n; ++j) {
            acc[j] += row[j];
          }
        }
        // Four interleaved partial sums, combined in a fixed order.
        const double* joint = joint_.data() + s * n;
        double lane[4] = {0.0, 0.0, 0.0, 0.0};
        std::size_t j = 0;
        for (; j + 4 <= n; j += 4) {
          for (std::size_t l = 0; l < 4; ++l) {
            const double diff = joint[j + l] - acc[j + l] * inv;
            lane[l] += diff * diff;
          }
        }
        for (; j < n; ++j) {
          const double diff = joint[j] - acc[j] * inv;
          lane[0] += diff * diff;
        }
        out.per_sphere[s] = (lane[0] + lane[1]) + (lane[2] + lane[3]);
      }
    });
    CompensatedSum total;
    for (double v : out.per_sphere) {
      total.add(v);
    }
    out.total = total.value() / static_cast<double>(b);
    return out;
  }

  double operator()(const Direction& theta, double h) const { return evaluate(theta, h).total; }

private:
  Dataset data_;
  std::shared_ptr<const SphereMembership> membership_;
  detail::ResponseOrder order_;
  K kernel_;
  std::vector<char> need_;
  std::vector<double> joint_;
};

template<Kernel K = Epanechnikov>
CriterionValue criterion_total(const Dataset& data, const Direction& theta, double h,
                               const SphereSet& spheres, K kernel = {})
{
  return CriterionEvaluator<K>(data, spheres, kernel).evaluate(theta, h);
}

template<Kernel K = Epanechnikov>
double criterion_sphere(const Dataset& data, const Direction& theta, double h, const Sphere& s,
                        K kernel = {})
{
  return criterion_total(data, theta, h, SphereSet{{s}}, kernel).total;
}

} // namespace sicdf
