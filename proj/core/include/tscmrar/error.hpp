#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tscmrar {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor extents disagree with what an operation or checkpoint expects.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// NaN/Inf, non-deterministic model functions, misuse of the tape.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Bad inputs that are not tied to one line of a log file (empty sets,
// bad config keys, corrupt checkpoints).
class DataError : public Error {
 public:
  using Error::Error;
};

enum class ParseErrorKind {
  kFieldCount,
  kTimestamp,
  kUnknownSensor,
  kLabelRange,
  kOutOfOrder,
  kIo,
};

const char* to_string(ParseErrorKind kind);

// A log line could not be turned into a SensorEvent. what() reads
// "file:line: <kind>: <detail>".
class ParseError : public DataError {
 public:
  ParseError(ParseErrorKind kind, std::string file, std::size_t line,
             const std::string& detail);

  ParseErrorKind kind() const { return kind_; }
  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  ParseErrorKind kind_;
  std::string file_;
  std::size_t line_;
};

}  // namespace tscmrar
