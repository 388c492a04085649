#pragma once

#include <stdexcept>
#include <string>

namespace fockme {

/// Input rejected by a precondition check (dimension mismatch, invalid state, ...).
class InvalidInput : public std::invalid_argument {
 public:
  explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

/// The time-bin oracle was asked to simulate something outside its sector model.
class UnsupportedConfiguration : public std::runtime_error {
 public:
  explicit UnsupportedConfiguration(const std::string& what) : std::runtime_error(what) {}
};

/// Raised by the integrator on step underflow or a non-finite state.
class IntegratorAbort : public std::runtime_error {
 public:
  IntegratorAbort(const std::string& what, double t) : std::runtime_error(what), time_(t) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Run-file validation failure; `path()` names the offending field.
class SchemaError : public std::runtime_error {
 public:
  SchemaError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(path) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace fockme
