#pragma once

#include <stdexcept>
#include <string>

namespace xlchan {

// Bad numeric argument to a math routine (angle out of range, radius below
// the guard limit, dimension mismatch, ...).
class DomainError : public std::invalid_argument {
public:
  explicit DomainError(const std::string& msg) : std::invalid_argument(msg) {}
};

// Invalid or inconsistent user-supplied configuration (unknown key, empty
// grid, parameter combination the sampling rules cannot honor, ...).
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure inside an otherwise valid computation (factorization
// breakdown, non-finite intermediate).
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace xlchan
