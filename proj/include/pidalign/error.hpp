#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace pidalign {

enum class ErrorCode {
  InvalidInput,
  UnknownNode,
  UnknownEdge,
  DuplicateNode,
  DuplicateEdge,
  DuplicateId,
  DegreeTooHigh,
  EmptyGraph,
  NonFinite,
  NeighborsUnmatched,
  MaxRoundsExceeded,
  Conflict,
  NotFound,
  Io,
};

std::string_view to_string(ErrorCode code);

// Errors caused by bad input (as opposed to a failure while computing).
bool is_validation_error(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace pidalign
