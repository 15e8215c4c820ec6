#pragma once

#include <stdexcept>
#include <string>

namespace brw {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A file could not be read or does not follow its documented schema.
class ParseError : public Error {
public:
  using Error::Error;
};

/// A query fell outside a model's declared validity range.
class RangeError : public Error {
public:
  using Error::Error;
};

/// A numerical procedure failed (no root, lost mode, bad normalization).
class NumericalError : public Error {
public:
  using Error::Error;
};

/// A mode could not be followed continuously across a frequency step.
class TrackingError : public NumericalError {
public:
  using NumericalError::NumericalError;
};

/// Raised by the QPM solver when the process is already phase matched.
class AlreadyPhaseMatched : public NumericalError {
public:
  using NumericalError::NumericalError;
};

} // namespace brw
