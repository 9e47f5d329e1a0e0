#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace sird {

/// Invalid configuration or violated precondition on user input.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A numerical procedure could not complete (integrator failure, invariant
/// violation, backtracking overflow, ...).
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what, double last_time = 0.0)
      : std::runtime_error(what), last_time_(last_time) {}

  /// Last time reached by an integrator before failing (0 when not applicable).
  double last_time() const noexcept { return last_time_; }

 private:
  double last_time_;
};

/// Malformed input data; carries the 1-based row number of the offending line
/// (0 for header-level problems).
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t row)
      : std::runtime_error(row == 0 ? what : "row " + std::to_string(row) + ": " + what),
        row_(row) {}

  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

}  // namespace sird
