#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace simflood {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. `line` is 1-based, 0 when not line-specific.
class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : Error(file + (line ? ":" + std::to_string(line) : std::string()) + ": " + what),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class EmptyGraphError : public Error {
 public:
  using Error::Error;
};

/// A label that does not name any entity of the graph it was looked up in.
class ResolutionError : public Error {
 public:
  explicit ResolutionError(const std::string& label)
      : Error("unknown entity label: " + label), label_(label) {}
  const std::string& label() const { return label_; }

 private:
  std::string label_;
};

class ConsistencyError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace simflood
