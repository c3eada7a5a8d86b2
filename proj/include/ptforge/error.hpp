#pragma once

#include <stdexcept>
#include <string>

namespace ptforge {

// Base class for every error raised by the library. The CLI maps the
// subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller violated a documented precondition.
class ContractError : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent input data (files, symbols, corpora).
class DataError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DataError {
 public:
  ParseError(const std::string& what, int line)
      : DataError("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

// Shortest path requested on a machine without accepting paths.
class NoPathError : public DataError {
 public:
  using DataError::DataError;
};

// A lattice operation removed every path.
class EmptyLatticeError : public DataError {
 public:
  using DataError::DataError;
};

// Non-finite values during training or decoding.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace ptforge
