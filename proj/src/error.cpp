#include "errp/error.hpp"

namespace errp {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingMarker: return "MissingMarker";
    case ErrorCode::OrderViolation: return "OrderViolation";
    case ErrorCode::OutOfBounds: return "OutOfBounds";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::BadMagic: return "BadMagic";
    case ErrorCode::TruncatedFile: return "TruncatedFile";
    case ErrorCode::TrailingData: return "TrailingData";
    case ErrorCode::VersionUnsupported: return "VersionUnsupported";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::BadFactor: return "BadFactor";
    case ErrorCode::TooFewWindows: return "TooFewWindows";
    case ErrorCode::SingularCovariance: return "SingularCovariance";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::TooFewVectors: return "TooFewVectors";
    case ErrorCode::ZeroVector: return "ZeroVector";
    case ErrorCode::SingleClass: return "SingleClass";
    case ErrorCode::EmptyClass: return "EmptyClass";
    case ErrorCode::ClassTooSmall: return "ClassTooSmall";
    case ErrorCode::NoEvaluableWindows: return "NoEvaluableWindows";
    case ErrorCode::ChunkOutOfOrder: return "ChunkOutOfOrder";
    case ErrorCode::BufferOverrun: return "BufferOverrun";
    case ErrorCode::UnknownType: return "UnknownType";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ConnectionLost: return "ConnectionLost";
    case ErrorCode::ProtocolViolation: return "ProtocolViolation";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace errp
