#pragma once

#include <stdexcept>
#include <string>

namespace discrimq {

/// Root of the library's exception hierarchy.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Input/config validation failures. The CLI maps these to exit code 1.
class ValidationError : public Error {
  public:
    using Error::Error;
};

class ConfigError : public ValidationError {
  public:
    using ValidationError::ValidationError;
};

class ParseError : public ValidationError {
  public:
    using ValidationError::ValidationError;
};

class SchemaError : public ValidationError {
  public:
    using ValidationError::ValidationError;
};

class InputError : public ValidationError {
  public:
    using ValidationError::ValidationError;
};

// Failures while a stage is running. Exit code 2.
class ShapeError : public Error {
  public:
    using Error::Error;
};

class IndexError : public Error {
  public:
    using Error::Error;
};

class StateError : public Error {
  public:
    using Error::Error;
};

class NumericError : public Error {
  public:
    using Error::Error;
};

class DomainError : public Error {
  public:
    using Error::Error;
};

class DataError : public Error {
  public:
    using Error::Error;
};

}  // namespace discrimq
