#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace planspace {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Task data references something that does not exist (atom/operator id).
class StructuralError : public Error {
 public:
  using Error::Error;
};

// A documented precondition of an operation was violated by the caller.
class ContractError : public Error {
 public:
  using Error::Error;
};

class QueryError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Raised when a model contradicts the encoding's structure. Indicates a
// compiler bug rather than a user error.
class CorruptionError : public Error {
 public:
  using Error::Error;
};

class NoModelsError : public Error {
 public:
  NoModelsError() : Error("no models") {}
  explicit NoModelsError(const std::string& what) : Error(what) {}
};

class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& msg)
      : Error("line " + std::to_string(line) + ": " + msg), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace planspace
