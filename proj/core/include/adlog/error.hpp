#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace adlog {

// Base class for every failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class SimulationError : public Error {
 public:
  using Error::Error;
};

class ModelError : public Error {
 public:
  using Error::Error;
};

class TrainingError : public Error {
 public:
  using Error::Error;
};

class FormatError : public Error {
 public:
  using Error::Error;
};

// A trace line that does not follow the ns-2 grammar. `column` is the
// 1-based character offset of the offending field; `line` is filled in by
// file-level readers (0 when parsing a single line).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t column, std::size_t line = 0);

  std::size_t column() const { return column_; }
  std::size_t line() const { return line_; }
  std::string reason() const { return reason_; }

 private:
  std::string reason_;
  std::size_t column_;
  std::size_t line_;
};

}  // namespace adlog
