#pragma once

#include <stdexcept>
#include <string>

namespace sparsehm {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input outside a function's mathematical domain (e.g. non-positive
/// element passed to a power mean).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid parameter or configuration value.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Data that makes a computation degenerate: all-zero envelope, zero
/// variance baseline, singular identity.
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// Unreadable or malformed dataset file.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// A single row of an otherwise well-formed file failed to parse.
class MalformedRowError : public FormatError {
 public:
  using FormatError::FormatError;
};

/// Dataset-level problem (missing directory, no usable files).
class DataError : public Error {
 public:
  using Error::Error;
};

/// An internal invariant was breached.
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace sparsehm
