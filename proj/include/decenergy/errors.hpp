#pragma once

#include <stdexcept>
#include <string>

namespace decenergy {

// Base of every error the library raises. The CLI maps all of these to exit
// status 1; usage errors are handled separately by the argument parser.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Argument outside an operation's domain (bad block shape, length mismatch).
class InvalidInput : public Error {
 public:
  using Error::Error;
};

// Dataset header does not match the catalog's canonical columns.
class SchemaError : public Error {
 public:
  explicit SchemaError(std::string column, const std::string& what)
      : Error(what), column_(std::move(column)) {}
  const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

// A row-level value violates a record invariant.
class ValidationError : public Error {
 public:
  ValidationError(std::size_t row, std::string field, const std::string& what)
      : Error(what), row_(row), field_(std::move(field)) {}
  std::size_t row() const noexcept { return row_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::size_t row_;
  std::string field_;
};

class FitError : public Error {
 public:
  using Error::Error;
};

class MeasurementError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace decenergy
