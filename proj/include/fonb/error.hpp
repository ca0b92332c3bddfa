#pragma once

#include <stdexcept>
#include <string>

namespace fonb {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Schema or configuration does not match the data (missing column, bad JSON).
class SchemaError : public Error {
 public:
  using Error::Error;
};

/// A value violates a declared invariant (non-binary protected value, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A cell could not be parsed. Carries the 0-based data row index.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row)
      : Error(what + " (data row " + std::to_string(row) + ")"), row_(row) {}
  std::size_t row() const { return row_; }

 private:
  std::size_t row_;
};

/// The request cannot be satisfied with the given data (e.g. too few rows per class).
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

/// A metric is mathematically undefined on the given counts.
class UndefinedMetricError : public Error {
 public:
  using Error::Error;
};

/// Invalid parameters supplied by the caller.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace fonb
