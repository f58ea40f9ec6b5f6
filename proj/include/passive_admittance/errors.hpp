#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace passive_admittance {

class NonPositiveParameter : public std::invalid_argument {
 public:
  NonPositiveParameter(std::string which, std::size_t index)
      : std::invalid_argument(which + "[" + std::to_string(index) +
                              "] must be finite and strictly positive"),
        which_(std::move(which)),
        index_(index) {}

  const std::string& which() const noexcept { return which_; }
  std::size_t index() const noexcept { return index_; }

 private:
  std::string which_;
  std::size_t index_;
};

/// Raised when the integrated state stops being finite. Scenario runs catch
/// it and return the partial trace.
class NonFiniteState : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An extraction would drain the tank below its floor.
class TankUnderflow : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InsufficientEnergy : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(int line, const std::string& reason)
      : std::runtime_error("line " + std::to_string(line) + ": " + reason),
        line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

class ValidationError : public std::runtime_error {
 public:
  ValidationError(std::string field, const std::string& reason)
      : std::runtime_error(field + ": " + reason), field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace passive_admittance
