#pragma once

#include <stdexcept>
#include <string>

namespace bevlift {

// Error categories map onto the CLI exit codes: config errors exit 2,
// data errors exit 3, numeric failures exit 4.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

// -- data errors -----------------------------------------------------------

class ShapeMismatch : public DataError {
 public:
  using DataError::DataError;
};

class NonPositiveDepth : public DataError {
 public:
  using DataError::DataError;
};

class IndexOutOfRange : public DataError {
 public:
  using DataError::DataError;
};

class OutOfRange : public DataError {
 public:
  using DataError::DataError;
};

class WrongBinCount : public DataError {
 public:
  using DataError::DataError;
};

class EmptyDepthMap : public DataError {
 public:
  using DataError::DataError;
};

class IndivisibleDimensions : public DataError {
 public:
  using DataError::DataError;
};

class DegenerateScene : public DataError {
 public:
  using DataError::DataError;
};

// -- numeric failures ------------------------------------------------------

class NonFiniteInput : public NumericError {
 public:
  using NumericError::NumericError;
};

class NonFiniteEvaluation : public NumericError {
 public:
  using NumericError::NumericError;
};

class NotNormalized : public NumericError {
 public:
  using NumericError::NumericError;
};

}  // namespace bevlift
