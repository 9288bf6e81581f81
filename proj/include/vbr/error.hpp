#pragma once

#include <stdexcept>
#include <string>

namespace vbr {

/// A value lies outside the parameter domain of its family or model.
class DomainError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// An iterative numerical routine failed to reach its tolerance.
class NumericalError : public std::runtime_error {
public:
  NumericalError(const std::string &what, double residual)
      : std::runtime_error(what), residual_(residual) {}

  [[nodiscard]] double residual() const noexcept { return residual_; }

private:
  double residual_;
};

/// Model/schedule combination that cannot be run (e.g. SVI without a global node).
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

} // namespace vbr
