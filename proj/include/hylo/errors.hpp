#pragma once

#include <stdexcept>
#include <string>

namespace hylo {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Argument outside the mathematical domain of an operation (e.g. W at s < 0).
class DomainError : public Error {
public:
  using Error::Error;
};

/// A documented precondition of an operation does not hold.
class PreconditionError : public Error {
public:
  using Error::Error;
};

/// Field and grid (or two fields) do not share a discretization.
class GridMismatchError : public Error {
public:
  using Error::Error;
};

/// Invalid user configuration (CLI flags, config files, potential files).
class ConfigError : public Error {
public:
  using Error::Error;
};

/// K(u) collapsed during descent, so omega = sigma / 2K is undefined.
class VanishingChargeError : public Error {
public:
  using Error::Error;
};

/// No exponentially decaying standing wave exists at the requested frequency.
class NoDecayingSolutionError : public Error {
public:
  using Error::Error;
};

/// The shooting parameter could not be bracketed.
class BracketError : public Error {
public:
  using Error::Error;
};

/// An iterative method hit its iteration cap.
class ConvergenceError : public Error {
public:
  using Error::Error;
};

}  // namespace hylo
