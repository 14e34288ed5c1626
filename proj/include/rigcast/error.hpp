#pragma once

#include <stdexcept>
#include <string>

namespace rigcast {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Problems with user-supplied input: malformed files, bad shapes, bad config.
// The CLI maps these to exit code 1; every other Error maps to 2.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public ValidationError {
 public:
  SchemaError(const std::string& what, std::string column)
      : ValidationError(what), column_(std::move(column)) {}
  const std::string& column() const { return column_; }

 private:
  std::string column_;
};

class FormatError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ParseError : public ValidationError {
 public:
  ParseError(const std::string& what, std::string value)
      : ValidationError(what), value_(std::move(value)) {}
  const std::string& value() const { return value_; }

 private:
  std::string value_;
};

class ShapeError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class ConfigurationError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class CorruptArtifactError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class UnusableChannelError : public Error {
 public:
  UnusableChannelError(const std::string& what, std::string channel)
      : Error(what), channel_(std::move(channel)) {}
  const std::string& channel() const { return channel_; }

 private:
  std::string channel_;
};

class EmptySliceError : public Error {
 public:
  using Error::Error;
};

class DecompositionError : public Error {
 public:
  DecompositionError(const std::string& what, int max_level)
      : Error(what), max_level_(max_level) {}
  int max_level() const { return max_level_; }

 private:
  int max_level_;
};

class InsufficientDataError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace rigcast
