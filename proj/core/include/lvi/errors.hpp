#pragma once

#include <stdexcept>
#include <string>

namespace lvi {

/// Argument outside the mathematical domain of an operation (negative time lag, u >= t, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Inconsistent configuration: incompatible grids, bank/spec mismatch, undersized bank.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File-level failure: unreadable, truncated or corrupted bank, unwritable output.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// NaN/inf produced by an estimator, or an undefined ratio (zero benchmark).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace lvi
