#pragma once

#include <stdexcept>
#include <string>

namespace kinorrt {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

// The horizon is too short (or otherwise degenerate) for the Gramian block
// the solve needs to be invertible. Callers may retry with another time.
class DegenerateHorizon : public Error {
 public:
  using Error::Error;
};

class NoConnection : public Error {
 public:
  using Error::Error;
};

class EnvironmentSaturated : public Error {
 public:
  using Error::Error;
};

class InvalidScenario : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public InvalidScenario {
 public:
  DimensionMismatch(std::string field, const std::string& detail)
      : InvalidScenario(field + ": " + detail), field_(std::move(field)) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& source, int line, int column, const std::string& detail)
      : Error(source + ":" + std::to_string(line) + ":" + std::to_string(column) + ": " + detail),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

}  // namespace kinorrt
