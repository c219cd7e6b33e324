#pragma once

#include <stdexcept>
#include <string>

namespace seqcfa {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed model syntax. Line and column are 1-based.
class SyntaxError : public Error {
 public:
  SyntaxError(const std::string& what, int line, int column)
      : Error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  int line_;
  int column_;
};

/// Structurally invalid or unidentified model.
class ModelError : public Error {
 public:
  using Error::Error;
};

/// Problems with input data (missing columns, zero variance, bad CSV).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Linear-algebra failures: non positive definite or singular matrices.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace seqcfa
