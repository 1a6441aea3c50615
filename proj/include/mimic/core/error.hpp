#pragma once

#include <stdexcept>
#include <string>

namespace mimic {

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed, inconsistent or unreadable input data.
class DataError : public Error {
 public:
  using Error::Error;
};

/// Precondition violated by a caller (bad argument, bad configuration).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Model fitting failed (divergence, degenerate training data).
class TrainingError : public Error {
 public:
  using Error::Error;
};

}  // namespace mimic
