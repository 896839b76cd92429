#ifndef LDGMIN_ERRORS_HPP
#define LDGMIN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ldgmin {

/// Invalid problem or benchmark parameters.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A density was asked for a derivative it does not provide.
class UnsupportedOperation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Non-finite values or failed factorizations during assembly or solve.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ldgmin

#endif  // LDGMIN_ERRORS_HPP
