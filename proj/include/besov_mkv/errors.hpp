#pragma once

#include <stdexcept>
#include <string>

namespace besov_mkv {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// A check was refused because its hypotheses do not hold for the inputs.
class RefusedError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The grid cannot resolve the requested object; `suggested_N` is a
/// resolution that would.
class RefinementError : public std::runtime_error {
 public:
  RefinementError(const std::string& what, int suggested_N)
      : std::runtime_error(what), suggested_N(suggested_N) {}
  int suggested_N;
};

/// A numerical procedure failed (divergence, mass drift, instability).
class NumericError : public std::runtime_error {
 public:
  enum class Kind { picard_divergence, mass_drift, instability, convergence };
  NumericError(Kind kind, const std::string& what) : std::runtime_error(what), kind(kind) {}
  Kind kind;
};

}  // namespace besov_mkv
