#pragma once

#include <stdexcept>
#include <string>

namespace ising {

/// Exact operations refuse rather than silently approximate once 2^P
/// enumeration would exceed the configured cap.
class CapExceededError : public std::runtime_error {
public:
  explicit CapExceededError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Raised when an unpenalized logistic fit is requested on degenerate data
/// (a constant response column, or a divergent fit). The message names the
/// offending node.
class SeparationError : public std::runtime_error {
public:
  explicit SeparationError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace ising
