#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace xpmgem {

/// Invalid configuration or input data. Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what, std::string key = {})
      : std::runtime_error(what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// Validation failed; carries every violation, not just the first.
class ValidationError : public ConfigError {
 public:
  explicit ValidationError(std::vector<std::string> violations)
      : ConfigError(join(violations)), violations_(std::move(violations)) {}
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out = "invalid configuration";
    for (const auto& s : v) out += "; " + s;
    return out;
  }
  std::vector<std::string> violations_;
};

/// Integration blew up, lost trace, or an observable is undefined. Exit code 3.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A recall window without enough power to define a phase.
class NoEchoError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Least-squares fit failed or the data cannot constrain it. Exit code 4.
class FitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace xpmgem
