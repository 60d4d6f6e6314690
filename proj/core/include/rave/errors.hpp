#pragma once

#include <stdexcept>
#include <string>

namespace rave {

// Invalid configuration or mismatched shapes, detected before any work is done.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

// An operation was called out of order or on an object in the wrong state.
class UsageError : public std::logic_error {
 public:
  explicit UsageError(const std::string& what) : std::logic_error(what) {}
};

// A numeric argument is outside the domain of the function.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

}  // namespace rave
