#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace anchorlab {

enum class ErrorKind {
  InvalidInput,
  ShapeError,
  DegenerateDistribution,
  InvalidCoefficient,
  UnknownContext,
  InvalidLabel,
  Unsupported,
  NumericalDivergence,
  ConfigError,
};

std::string_view to_string(ErrorKind kind) noexcept;

// Every library failure is reported through this one exception type; callers
// branch on kind() (the CLI maps kinds to exit codes).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace anchorlab
