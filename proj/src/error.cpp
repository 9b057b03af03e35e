#include "regkit/error.hpp"

namespace regkit {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegeneratePoint: return "DegeneratePoint";
    case ErrorCode::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorCode::InvalidHomography: return "InvalidHomography";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::NoConsensus: return "NoConsensus";
    case ErrorCode::UnsupportedFormat: return "UnsupportedFormat";
    case ErrorCode::TruncatedData: return "TruncatedData";
    case ErrorCode::TooSmall: return "TooSmall";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::WeightSizeMismatch: return "WeightSizeMismatch";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::ConstantVector: return "ConstantVector";
    case ErrorCode::BadOrder: return "BadOrder";
    case ErrorCode::DimMismatch: return "DimMismatch";
    case ErrorCode::TooFewColumns: return "TooFewColumns";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::MissingFile: return "MissingFile";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace regkit
