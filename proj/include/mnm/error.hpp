#pragma once

#include <stdexcept>
#include <string>

namespace mnm {

/// Argument outside the mathematical domain of a function (NaN, x < 0 for a
/// chi-square CDF, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Quantile requested at p = 0 or p = 1 where the answer is infinite.
class InfiniteQuantileError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A meta-test name that is not in the registry.
class UnknownTestError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// The requested test is not defined for this (d, m) regime, e.g. a
/// coordinate partition with fewer trials than coordinates.
class UnsupportedRegimeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bit budget below the number of bits needed for sign and integer part.
class InsufficientBitsError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace mnm
