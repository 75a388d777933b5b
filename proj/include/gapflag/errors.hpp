#pragma once

#include <optional>
#include <stdexcept>
#include <string>

namespace gapflag {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Input violates a documented precondition (ordering, normalization,
/// polytope membership, index range, dimension mismatch, ...).
class ValidationError : public Error {
public:
  using Error::Error;
};

/// Numerical breakdown: degenerate spectra, singular metrics, positivity loss.
class NumericalError : public Error {
public:
  using Error::Error;
};

/// Spectrum too close to degenerate for the spectral-angular chart.
/// `time()` is set when the breakdown happened during time integration.
class DegeneracyError : public NumericalError {
public:
  explicit DegeneracyError(const std::string& what,
                           std::optional<double> time = std::nullopt)
      : NumericalError(what), time_(time) {}
  std::optional<double> time() const { return time_; }

private:
  std::optional<double> time_;
};

/// Some p_k coincides with 1/n, so the crossover index is ambiguous.
class CrossoverTieError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

/// Fisher metric evaluated where some eigenvalue vanishes.
class SingularMetricError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

class PositivityError : public NumericalError {
public:
  explicit PositivityError(const std::string& what, double time, double min_eigenvalue)
      : NumericalError(what), time_(time), min_eigenvalue_(min_eigenvalue) {}
  double time() const { return time_; }
  double min_eigenvalue() const { return min_eigenvalue_; }

private:
  double time_;
  double min_eigenvalue_;
};

class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace gapflag
