#pragma once

#include <stdexcept>
#include <string>

namespace zeno {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Inconsistent shapes, unknown labels, capacity limits.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// A value violates a documented precondition or invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed to reach its tolerance.
class NumericsError : public Error {
 public:
  NumericsError(const std::string& what, double achieved)
      : Error(what + " (achieved tolerance " + std::to_string(achieved) + ")"),
        achieved_(achieved) {}
  explicit NumericsError(const std::string& what) : Error(what) {}

  double achieved() const { return achieved_; }

 private:
  double achieved_ = 0.0;
};

/// A model does not satisfy the superoperator interchange required by
/// the single-integral broadening profile.
class AssumptionError : public Error {
 public:
  using Error::Error;
};

/// The oracle error signal is below the resolvable floor.
class InconclusiveError : public Error {
 public:
  using Error::Error;
};

/// Malformed or incomplete scenario document.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace zeno
