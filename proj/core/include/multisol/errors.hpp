#pragma once

#include <stdexcept>
#include <string>

namespace multisol {

/// Invalid argument or violated precondition.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure failed (non-convergence, broken model, ...).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A required callback or feature is not available on the given object.
class CapabilityError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Malformed run configuration. Carries the offending line or field.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& where, const std::string& what)
      : std::runtime_error(where + ": " + what), where_(where) {}

  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

}  // namespace multisol
