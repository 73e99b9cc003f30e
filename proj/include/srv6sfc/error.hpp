#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace srv6sfc {

/// Every failure the library reports carries one of these codes.
enum class Errc {
  // wire
  TruncatedPacket,
  TrailingBytes,
  BadVersion,
  BadRoutingType,
  MalformedSrh,
  InvariantViolation,
  BadAddress,
  // chain
  DuplicateSidInChain,
  UnivocalMappingViolation,
  UnknownSid,
  InterfaceMismatch,
  InvalidChain,
  SidNotInChain,
  SidIsLast,
  BadPrefix,
  // dataplane
  EmptyChain,
  NotEncapsulated,
  NoSrh,
  AlreadyAtLastSegment,
  EditPermissionDenied,
  PositionOutOfRange,
  UnknownSidInEdit,
  InvalidEdit,
  UnawareEditForbidden,
  UnivocalMappingMissing,
  NotLastSegment,
  // sim
  RoutingLoop,
  NoRoute,
  UnknownNodeRef,
  UnreachableNextHop,
  EmptyNetwork,
  // bench
  EmptySweep,
  InsufficientPoints,
  DegenerateX,
  BadArgument,
  // cli / config
  ParseError,
  ValidationError,
  UnknownSegment,
  BadNextHop,
  IoError,
};

std::string_view to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace srv6sfc
