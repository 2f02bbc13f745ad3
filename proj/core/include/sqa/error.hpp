#pragma once

#include <stdexcept>
#include <string>

namespace sqa {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or truncated file contents (WAV, SQAF, manifest, model files).
class FormatError : public Error {
 public:
  using Error::Error;
};

// A caller-supplied value is outside its allowed domain.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Vector or matrix shapes that do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace sqa
