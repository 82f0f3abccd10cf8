#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace cedr {

// Base class for every error thrown by the library. Each failure mode gets
// its own subclass so callers (and the CLI exit-code mapping) can react to
// the category rather than parsing message text.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid numeric input (non-finite argument, probability outside (0,1), ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Structurally valid input that is too small or too flat to work with
// (sample of one point, constant vector, ...).
class DegenerateInputError : public Error {
 public:
  using Error::Error;
};

// Cholesky factorization hit a negative pivot: the matrix is not positive
// semidefinite. Records which pivot failed so an invalid correlation choice
// can be traced to a coordinate.
class DecompositionError : public Error {
 public:
  DecompositionError(const std::string& msg, std::size_t pivot)
      : Error(msg), pivot_index(pivot) {}
  std::size_t pivot_index;
};

// Rank-deficient (or numerically near-deficient) design matrix. Lists the
// columns that are linearly dependent on the preceding ones.
class CollinearityError : public Error {
 public:
  CollinearityError(const std::string& msg, std::vector<std::string> cols)
      : Error(msg), columns(std::move(cols)) {}
  std::vector<std::string> columns;
};

// Perfect (or quasi-perfect) separation in a probit fit: the MLE diverges,
// so the propensity model is unusable.
class SeparationError : public Error {
 public:
  using Error::Error;
};

// Iterative fit exhausted its iteration budget.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& msg, double grad_norm)
      : Error(msg), gradient_norm(grad_norm) {}
  double gradient_norm;
};

// A fitted propensity reached 0 or 1 exactly, violating the overlap
// assumption required by inverse-probability weighting.
class OverlapError : public Error {
 public:
  using Error::Error;
};

// Every endogenous covariate looks normal: the copula correction is not
// identified and CEDR refuses to run unless forced.
class WeakIdentificationError : public Error {
 public:
  using Error::Error;
};

// Too many bootstrap replicates failed for the resulting intervals to be
// trustworthy.
class InferenceUnreliableError : public Error {
 public:
  InferenceUnreliableError(const std::string& msg, std::size_t failed,
                           std::size_t requested)
      : Error(msg), n_failed(failed), n_requested(requested) {}
  std::size_t n_failed;
  std::size_t n_requested;
};

// Prediction design does not line up with the fitted model's columns.
class DesignMismatchError : public Error {
 public:
  using Error::Error;
};

// Bad study configuration (unknown column names, overlapping roles, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed input file (CSV cell that does not parse, non-binary treatment).
class ParseError : public Error {
 public:
  using Error::Error;
};

// A study that became unusable after filtering (an empty treatment arm).
class DegenerateStudyError : public Error {
 public:
  using Error::Error;
};

// Intercept calibration could not bracket the target treated share.
class CalibrationError : public Error {
 public:
  using Error::Error;
};

}  // namespace cedr
