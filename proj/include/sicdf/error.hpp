#pragma once

#include <stdexcept>
#include <string>

namespace sicdf {

//! Bad input: malformed files, out-of-range arguments, violated preconditions.
//! The CLI maps this to exit code 2.
class ValidationError : public std::invalid_argument
{
public:
  using std::invalid_argument::invalid_argument;
};

//! A computation that could not produce a defined answer. CLI exit code 1.
class NumericalError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

//! The kernel window around an evaluation point holds no data.
class ExtrapolationError : public NumericalError
{
public:
  using NumericalError::NumericalError;
};

//! The constraint multiplier of the adjusted Nadaraya-Watson weights has no
//! admissible root (all in-window points on one side of the target).
class BracketError : public NumericalError
{
public:
  using NumericalError::NumericalError;
};

} // namespace sicdf
