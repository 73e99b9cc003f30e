#include "srv6sfc/error.hpp"

namespace srv6sfc {

std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::TruncatedPacket: return "TruncatedPacket";
    case Errc::TrailingBytes: return "TrailingBytes";
    case Errc::BadVersion: return "BadVersion";
    case Errc::BadRoutingType: return "BadRoutingType";
    case Errc::MalformedSrh: return "MalformedSrh";
    case Errc::InvariantViolation: return "InvariantViolation";
    case Errc::BadAddress: return "BadAddress";
    case Errc::DuplicateSidInChain: return "DuplicateSidInChain";
    case Errc::UnivocalMappingViolation: return "UnivocalMappingViolation";
    case Errc::UnknownSid: return "UnknownSid";
    case Errc::InterfaceMismatch: return "InterfaceMismatch";
    case Errc::InvalidChain: return "InvalidChain";
    case Errc::SidNotInChain: return "SidNotInChain";
    case Errc::SidIsLast: return "SidIsLast";
    case Errc::BadPrefix: return "BadPrefix";
    case Errc::EmptyChain: return "EmptyChain";
    case Errc::NotEncapsulated: return "NotEncapsulated";
    case Errc::NoSrh: return "NoSrh";
    case Errc::AlreadyAtLastSegment: return "AlreadyAtLastSegment";
    case Errc::EditPermissionDenied: return "EditPermissionDenied";
    case Errc::PositionOutOfRange: return "PositionOutOfRange";
    case Errc::UnknownSidInEdit: return "UnknownSidInEdit";
    case Errc::InvalidEdit: return "InvalidEdit";
    case Errc::UnawareEditForbidden: return "UnawareEditForbidden";
    case Errc::UnivocalMappingMissing: return "UnivocalMappingMissing";
    case Errc::NotLastSegment: return "NotLastSegment";
    case Errc::RoutingLoop: return "RoutingLoop";
    case Errc::NoRoute: return "NoRoute";
    case Errc::UnknownNodeRef: return "UnknownNodeRef";
    case Errc::UnreachableNextHop: return "UnreachableNextHop";
    case Errc::EmptyNetwork: return "EmptyNetwork";
    case Errc::EmptySweep: return "EmptySweep";
    case Errc::InsufficientPoints: return "InsufficientPoints";
    case Errc::DegenerateX: return "DegenerateX";
    case Errc::BadArgument: return "BadArgument";
    case Errc::ParseError: return "ParseError";
    case Errc::ValidationError: return "ValidationError";
    case Errc::UnknownSegment: return "UnknownSegment";
    case Errc::BadNextHop: return "BadNextHop";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace srv6sfc
