#pragma once

#include <stdexcept>
#include <string>

namespace chemostat_es {

/// Invalid parameters or configuration (bad bracket, inverted bounds, unknown keys).
class ConfigError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the domain of a function, e.g. a negative concentration.
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

/// A state became NaN or infinite during integration.
class NumericalAbort : public std::runtime_error {
public:
  NumericalAbort(const std::string& what, double t) : std::runtime_error(what), time_(t) {}

  double time() const noexcept { return time_; }

private:
  double time_;
};

/// Act-and-wait evaluation did not settle within the allowed number of windows.
class SettleTimeout : public std::runtime_error {
public:
  SettleTimeout(const std::string& what, double last_std, double previous_std, int windows)
      : std::runtime_error(what), last_std_(last_std), previous_std_(previous_std), windows_(windows) {}

  double last_std() const noexcept { return last_std_; }
  double previous_std() const noexcept { return previous_std_; }
  int windows() const noexcept { return windows_; }

private:
  double last_std_;
  double previous_std_;
  int windows_;
};

}  // namespace chemostat_es
