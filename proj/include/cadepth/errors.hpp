#pragma once

#include <stdexcept>
#include <string>

namespace cadepth {

// Base of every error raised by the library. The CLI maps these to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Non-physical camera parameters or malformed configuration.
class InvalidConfiguration : public Error {
 public:
  using Error::Error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A code or kernel that transmits no light, so normalization is undefined.
class DegenerateKernel : public Error {
 public:
  using Error::Error;
};

// Unregularized inverse filtering hit an exact spectral zero.
class DivisionGuard : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace cadepth
