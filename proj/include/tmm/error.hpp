#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tmm {

/// Every failure the engine reports. Each code has a stable machine-readable
/// name (see code_name) used by the CLI error line and the HTTP service.
enum class ErrorCode {
  IndexOutOfRange,
  NonFiniteCoordinate,
  MalformedDocument,
  SchemaViolation,
  UnsupportedVersion,
  StorageFailure,
  CapacityExceeded,
  NotFound,
  AlreadyLoaded,
  OrdinalOutOfRange,
  NoHit,
  PinLocked,
  NotARotation,
  DegenerateConfiguration,
  NonPositiveScale,
  InvalidArgument,
  MissingValue,
  NonPositiveValue,
  FractionOutOfRange,
  ObjectOutsideRoom,
  UnknownObject,
  ScriptError,
  AssertionFailed,
  PortUnavailable,
  LibraryUnreadable,
};

std::string_view code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace tmm
