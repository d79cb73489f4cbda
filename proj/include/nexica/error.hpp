#pragma once

#include <stdexcept>
#include <string>

namespace nexica {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (CSV row, timestamp, JSON).
class ParseError : public Error {
public:
  using Error::Error;
};

/// Input parsed but violates a structural rule (e.g. timestamp off the 5-minute grid).
class FormatError : public Error {
public:
  using Error::Error;
};

/// Violated matrix or dataset invariant.
class ValidationError : public Error {
public:
  using Error::Error;
};

/// Two inputs that must agree do not.
class ConsistencyError : public Error {
public:
  using Error::Error;
};

/// Argument outside its allowed range.
class ParameterError : public Error {
public:
  using Error::Error;
};

/// Value outside the mathematical domain of an operation.
class DomainError : public Error {
public:
  using Error::Error;
};

class TrainingError : public Error {
public:
  using Error::Error;
};

} // namespace nexica
