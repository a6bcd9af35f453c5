#pragma once

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace rmtk {

/// Input that violates an operation's precondition (bad probabilities,
/// mismatched dimensions, parameters out of range).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// File could not be opened, read or written; the message names the path.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical routine could not deliver a result.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Iterative eigen/singular solver hit its iteration cap. Carries whatever
/// had converged before giving up.
class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, std::size_t converged,
                   std::vector<std::complex<double>> partial)
      : NumericalError(what), converged_(converged), partial_(std::move(partial)) {}

  std::size_t converged() const noexcept { return converged_; }
  const std::vector<std::complex<double>>& partial() const noexcept { return partial_; }

 private:
  std::size_t converged_;
  std::vector<std::complex<double>> partial_;
};

/// Raised by routines that require a well-conditioned matrix.
class NearSingularError : public NumericalError {
 public:
  NearSingularError(const std::string& what, double smallest, double largest)
      : NumericalError(what), smallest_(smallest), largest_(largest) {}

  double smallest() const noexcept { return smallest_; }
  double largest() const noexcept { return largest_; }

 private:
  double smallest_;
  double largest_;
};

}  // namespace rmtk
