#pragma once

#include <stdexcept>
#include <string>

namespace coexist {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid user-supplied parameters.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Two computations that must agree did not; indicates a bug, never bad input.
class ModelConsistencyError : public Error {
 public:
  using Error::Error;
};

// A boundary parameterization makes a linear system singular.
class DegenerateParameterError : public Error {
 public:
  using Error::Error;
};

// No parameterization attains the requested throughput ratio.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// Iterative solver failed to converge or lost its bracket.
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace coexist
