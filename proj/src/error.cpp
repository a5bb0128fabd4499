#include "tmm/error.hpp"

namespace tmm {

std::string_view code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::NonFiniteCoordinate: return "NonFiniteCoordinate";
    case ErrorCode::MalformedDocument: return "MalformedDocument";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::StorageFailure: return "StorageFailure";
    case ErrorCode::CapacityExceeded: return "CapacityExceeded";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::AlreadyLoaded: return "AlreadyLoaded";
    case ErrorCode::OrdinalOutOfRange: return "OrdinalOutOfRange";
    case ErrorCode::NoHit: return "NoHit";
    case ErrorCode::PinLocked: return "PinLocked";
    case ErrorCode::NotARotation: return "NotARotation";
    case ErrorCode::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::NonPositiveScale: return "NonPositiveScale";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::MissingValue: return "MissingValue";
    case ErrorCode::NonPositiveValue: return "NonPositiveValue";
    case ErrorCode::FractionOutOfRange: return "FractionOutOfRange";
    case ErrorCode::ObjectOutsideRoom: return "ObjectOutsideRoom";
    case ErrorCode::UnknownObject: return "UnknownObject";
    case ErrorCode::ScriptError: return "ScriptError";
    case ErrorCode::AssertionFailed: return "AssertionFailed";
    case ErrorCode::PortUnavailable: return "PortUnavailable";
    case ErrorCode::LibraryUnreadable: return "LibraryUnreadable";
  }
  return "Unknown";
}

}  // namespace tmm
