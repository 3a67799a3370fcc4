#pragma once

#include <stdexcept>
#include <string>

namespace pf {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input (manifest, annotation files, config).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Arguments that violate an operation's preconditions.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// A statistic has no defined value (e.g. every weight is zero).
class UndefinedStatisticError : public Error {
 public:
  using Error::Error;
};

}  // namespace pf
