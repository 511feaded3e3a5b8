#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cqt {

enum class ErrorKind {
  ParseError,
  ValidationError,
  UnsupportedState,
  NodeProximity,
  StationaryPoint,
  DegeneratePoint,
  StepFailure,
  HorizonExceeded,
  NodeOnGrid,
  MaskViolation,
};

std::string_view to_string(ErrorKind kind);

/// True for failures of the numerics (CLI exit status 2); false for bad input.
constexpr bool is_numerical(ErrorKind kind) {
  return kind != ErrorKind::ParseError && kind != ErrorKind::ValidationError &&
         kind != ErrorKind::UnsupportedState;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace cqt
