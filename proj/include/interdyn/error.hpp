#pragma once

#include <stdexcept>
#include <string>

namespace interdyn {

// Base for every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A caller-supplied value violates a precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Vector or table length does not match what the model/decomposition expects.
class DimensionError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// Requested problem size exceeds a hard cap (e.g. more than 16 variables).
class LimitError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// A file exists but its content is malformed or has the wrong version.
class ParseError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// A loss, score or objective became NaN/inf.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace interdyn
