#pragma once

#include <stdexcept>
#include <string>

namespace flexsmc {

/// Invalid parameters or configuration (bad inertia matrix, unknown config key, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The integrator produced a non-finite state.
class IntegrationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace flexsmc
