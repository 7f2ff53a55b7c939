#pragma once

#include <stdexcept>
#include <string>

namespace parstable {

/// Base class for all failures raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data cannot support the requested computation (degenerate sums,
/// malformed files, too-short samples).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A numerical procedure failed (table range exceeded, solver breakdown,
/// ill-posed fit).
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace parstable
