#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace regkit {

enum class ErrorCode {
  DegeneratePoint,
  DegenerateConfiguration,
  InvalidHomography,
  ParseError,
  InsufficientData,
  NoConsensus,
  UnsupportedFormat,
  TruncatedData,
  TooSmall,
  OutOfBounds,
  ShapeMismatch,
  WeightSizeMismatch,
  LengthMismatch,
  ZeroVector,
  ConstantVector,
  BadOrder,
  DimMismatch,
  TooFewColumns,
  IndexOutOfRange,
  MissingFile,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace regkit
