#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vulnsib {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input (bad JSON, missing or mistyped field).
class ParseError : public Error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}
  explicit ParseError(const std::string& what) : Error(what) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_ = 0;
};

// Well-formed input that violates a data invariant (duplicate id, empty group, ...).
class IntegrityError : public Error {
 public:
  using Error::Error;
};

// Vector or matrix shapes that do not chain.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Caller-supplied argument outside its documented domain.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

}  // namespace vulnsib
