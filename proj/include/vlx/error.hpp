#pragma once

#include <stdexcept>
#include <string>

namespace vlx {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Violated precondition on an argument.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Iteration failed to converge, defect too large, NaN/overflow.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Invalid or inconsistent user configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace vlx
