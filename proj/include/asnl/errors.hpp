#pragma once

#include <stdexcept>
#include <string>

namespace asnl {

// Base class for every error raised by the toolkit. The CLI maps
// PreconditionError subclasses to exit code 2.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class CoincidentPoints : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class InvalidGraph : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class DimensionMismatch : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class LengthMismatch : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class EmptyAnchorSet : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class NotDecomposable : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class PreconditionViolated : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class CollinearBasis : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class CollinearRays : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class NetworkFormatError : public PreconditionError {
 public:
  using PreconditionError::PreconditionError;
};

class GenerationFailed : public Error {
 public:
  using Error::Error;
};

class NumericalFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace asnl
