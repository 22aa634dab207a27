#pragma once

#include <stdexcept>
#include <string>

namespace automeco {

// Every failure raised by the library derives from Error. The CLI maps
// IoError to exit code 2 and everything else to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text (JSON syntax, wrong field types, unknown fields).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Well-formed input that violates a type invariant or precondition.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Threshold orderings and other configuration mistakes.
class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// A lens or metric needs an input that is absent (hidden states, PRM scores).
class MissingInputError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Empty steps, zero-norm hidden vectors, trajectories with zero total change.
class DegenerateError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

// Ranking metric asked for on single-class data, or correlation on a constant vector.
class UndefinedMetricError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

}  // namespace automeco
