#pragma once

#include <stdexcept>
#include <string>

namespace polymer {

// Base of every error raised by the library. `kind()` is the stable
// machine-readable tag the CLI puts into its error JSON.
class Error : public std::runtime_error {
 public:
  Error(std::string kind, const std::string& what)
      : std::runtime_error(what), kind_(std::move(kind)) {}
  const std::string& kind() const noexcept { return kind_; }

 private:
  std::string kind_;
};

// Bad input: a precondition on user-supplied values does not hold.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error("validation", what) {}
};

// An iterative method ran out of budget or two estimates disagree.
class ConvergenceError : public Error {
 public:
  explicit ConvergenceError(const std::string& what) : Error("convergence", what) {}
};

// The truncated radial domain is too small for the requested (beta, t).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error("domain", what) {}
};

// No sign change of the secular function inside the search interval.
class BracketError : public Error {
 public:
  explicit BracketError(const std::string& what) : Error("bracket", what) {}
};

// Too many failed points in a sweep.
class SweepError : public Error {
 public:
  explicit SweepError(const std::string& what) : Error("sweep", what) {}
};

}  // namespace polymer
