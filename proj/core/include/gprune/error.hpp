#pragma once

#include <stdexcept>
#include <string>

namespace gprune {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input: bad shapes, non-finite values, non-bijective
/// permutations, group counts that do not divide the channel counts,
/// unreadable files.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// No configuration satisfies the requested budget.
class InfeasibleError : public Error {
 public:
  InfeasibleError() : Error("infeasible budget") {}
  explicit InfeasibleError(const std::string& detail)
      : Error("infeasible budget: " + detail) {}
};

/// An exhaustive oracle refused an instance whose enumeration exceeds its cap.
class OracleCapError : public Error {
 public:
  explicit OracleCapError(const std::string& detail)
      : Error("instance too large for oracle: " + detail) {}
};

}  // namespace gprune
