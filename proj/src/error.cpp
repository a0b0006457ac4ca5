#include "pidalign/error.hpp"

namespace pidalign {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::UnknownEdge: return "UnknownEdge";
    case ErrorCode::DuplicateNode: return "DuplicateNode";
    case ErrorCode::DuplicateEdge: return "DuplicateEdge";
    case ErrorCode::DuplicateId: return "DuplicateId";
    case ErrorCode::DegreeTooHigh: return "DegreeTooHigh";
    case ErrorCode::EmptyGraph: return "EmptyGraph";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::NeighborsUnmatched: return "NeighborsUnmatched";
    case ErrorCode::MaxRoundsExceeded: return "MaxRoundsExceeded";
    case ErrorCode::Conflict: return "Conflict";
    case ErrorCode::NotFound: return "NotFound";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

bool is_validation_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonFinite:
    case ErrorCode::MaxRoundsExceeded:
    case ErrorCode::Io:
      return false;
    default:
      return true;
  }
}

}  // namespace pidalign
