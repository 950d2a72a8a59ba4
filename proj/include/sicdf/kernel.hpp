#pragma once

#include "sicdf/error.hpp"

#include <cmath>
#include <concepts>
#include <string>
#include <string_view>

namespace sicdf {

//! A smoothing kernel: nonnegative, symmetric, zero outside
//! [-support_radius, support_radius], unit mass.
template<typename K>
concept Kernel = requires(const K k, double u) {
  { k(u) } -> std::convertible_to<double>;
  { K::support_radius } -> std::convertible_to<double>;
  { K::name } -> std::convertible_to<std::string_view>;
};

constexpr double epanechnikov(double u)
{
  return (u > -1.0 && u < 1.0) ? 0.75 * (1.0 - u * u) : 0.0;
}

struct Epanechnikov
{
  static constexpr double support_radius = 1.0;
  static constexpr std::string_view name = "epanechnikov";

  constexpr double operator()(double u) const { return epanechnikov(u); }
};

//! Resolves a kernel name from configuration. Only the Epanechnikov kernel
//! is built in.
inline Epanechnikov kernel_from_name(std::string_view name)
{
  if (name == Epanechnikov::name) {
    return {};
  }
  throw ValidationError("unknown kernel '" + std::string(name) + "'");
}

} // namespace sicdf
