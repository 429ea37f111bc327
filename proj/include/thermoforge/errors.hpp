#pragma once

#include <stdexcept>
#include <string>

namespace thermoforge {

// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input: bad files, bad matrices, inconsistent tables.
class InputError : public Error {
 public:
  using Error::Error;
};

// A precondition of an operation was violated (e.g. a reversal that does
// not preserve the subshift).
class ContractError : public Error {
 public:
  using Error::Error;
};

// An enumeration or recoding cap would be exceeded.
class ResourceError : public Error {
 public:
  using Error::Error;
};

// Numerical failure: non-convergence, reducible transfer matrix, zero mass.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace thermoforge
