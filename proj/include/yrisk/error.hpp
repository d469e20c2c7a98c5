#pragma once

#include <stdexcept>
#include <string>

namespace yrisk {

// Base for everything the library throws on purpose.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input: ragged CSV rows, unparsable cells.
class ParseError : public Error {
 public:
  using Error::Error;
};

// A referenced column/feature does not exist or does not match.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Values outside their coded domain, degenerate or insufficient data.
class DataError : public Error {
 public:
  using Error::Error;
};

// Argument outside the operation's domain (empty input, shape mismatch, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Operation not defined for this model kind.
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

}  // namespace yrisk
