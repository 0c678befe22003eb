#pragma once

#include <stdexcept>
#include <string>

namespace gmmimm {

/// Invalid argument or configuration value. CLI exit code 2.
class ParameterError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or missing input data (files, rows, cells). CLI exit code 3.
class DataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A numerical invariant was violated at run time. CLI exit code 4.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace gmmimm
