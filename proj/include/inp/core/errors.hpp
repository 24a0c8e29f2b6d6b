#pragma once

#include <stdexcept>
#include <string>

namespace inp {

/// Bad input: shapes, ranges, invariants of user-supplied data.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// NaN/Inf produced, failed factorization, singular solve.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File missing, unreadable, corrupt, or version mismatch.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace inp
