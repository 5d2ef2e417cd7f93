#pragma once

#include <stdexcept>
#include <string>

namespace wmforge {

// Base class for every error raised by the library. Messages are meant to be
// shown to a user as-is.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration or bad arguments to an operation.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed input file (JSONL line, model file, config file).
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : Error(line ? what + " (line " + std::to_string(line) + ")" : what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace wmforge
