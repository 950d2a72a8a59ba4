#pragma once

#include "sicdf/error.hpp"

#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace sicdf {

//! Unit vector whose first nonzero component is positive. Every ray through
//! the origin has exactly one such representative.
class Direction
{
public:
  static constexpr double zero_tolerance = 1e-12;

  //! v / |v|, sign-flipped so the first component with |v_j| > 1e-12 is
  //! positive.
  static Direction canonicalize(std::span<const double> v)
  {
    double ss = 0.0;
    for (double c : v) {
      ss += c * c;
    }
    const double norm = std::sqrt(ss);
    if (v.empty() || !(norm > zero_tolerance) || !std::isfinite(norm)) {
      throw NumericalError("canonicalize: vector norm is zero or not finite");
    }
    double sign = 1.0;
    for (double c : v) {
      if (std::abs(c) > zero_tolerance) {
        sign = c < 0.0 ? -1.0 : 1.0;
        break;
      }
    }
    // an already unit vector is kept as is, so canonicalize is idempotent
    const double scale = std::abs(norm - 1.0) <= 8.0 * std::numeric_limits<double>::epsilon() ? 1.0 : norm;
    Direction d;
    d.components_.resize(v.size());
    for (std::size_t j = 0; j < v.size(); ++j) {
      d.components_[j] = sign * v[j] / scale;
    }
    return d;
  }

  static Direction canonicalize(const std::vector<double>& v)
  {
    return canonicalize(std::span<const double>(v));
  }

  std::span<const double> components() const { return components_; }
  const std::vector<double>& vector() const { return components_; }
  std::size_t dim() const { return components_.size(); }
  double operator[](std::size_t j) const { return components_[j]; }

  bool operator==(const Direction&) const = default;

private:
  std::vector<double> components_;
};

} // namespace sicdf
