#pragma once

#include <stdexcept>
#include <string>

namespace dscaler {

// Out-of-range arguments use std::domain_error directly.

/// The requested operation has no implementation for this kernel family.
class CapabilityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical procedure failed to reach its stated precision.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace dscaler
