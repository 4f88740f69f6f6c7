#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mbadmm {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class NotPsdError : public Error {
 public:
  NotPsdError(const std::string& what, double min_eigenvalue)
      : Error(what), min_eigenvalue_(min_eigenvalue) {}
  double min_eigenvalue() const noexcept { return min_eigenvalue_; }

 private:
  double min_eigenvalue_;
};

/// An iterative method ran out of iterations. Carries its last estimate.
class NonConvergenceError : public Error {
 public:
  NonConvergenceError(const std::string& what, double last_estimate)
      : Error(what), last_estimate_(last_estimate) {}
  double last_estimate() const noexcept { return last_estimate_; }

 private:
  double last_estimate_;
};

/// Cholesky breakdown; `pivot` is the 0-based row where it happened.
class FactorizationError : public Error {
 public:
  FactorizationError(const std::string& what, std::size_t pivot)
      : Error(what), pivot_(pivot) {}
  std::size_t pivot() const noexcept { return pivot_; }

 private:
  std::size_t pivot_;
};

/// A step-size bound does not exist because some block lacks strong convexity.
class NoGuaranteeError : public Error {
 public:
  NoGuaranteeError(const std::string& what, std::size_t block)
      : Error(what), block_(block) {}
  std::size_t block() const noexcept { return block_; }

 private:
  std::size_t block_;
};

class UnsupportedError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class InsufficientDataError : public Error {
 public:
  InsufficientDataError(const std::string& what, std::size_t samples)
      : Error(what), samples_(samples) {}
  std::size_t samples() const noexcept { return samples_; }

 private:
  std::size_t samples_;
};

class OutOfRangeError : public Error {
 public:
  using Error::Error;
};

}  // namespace mbadmm
