#pragma once

#include <stdexcept>
#include <string>

namespace cnisp {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A point lies outside the parameter hypercube.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A factorization, eigen-solve or root search failed.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// A construction would exceed a configured size cap.
class ResourceError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace cnisp
