#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace cogsr {

// Base for every error raised by the library. Callers that only care about
// "something went wrong in cogsr" catch this.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Shape or dimension contract violated (matmul inner dims, frame alignment...).
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Input value outside its documented domain.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// File system or stream failure; the message always carries the path.
class IoError : public Error {
 public:
  using Error::Error;
};

// Training diverged or another runtime invariant broke mid-computation.
class RuntimeFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace cogsr
