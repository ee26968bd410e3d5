#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace errp {

enum class ErrorCode {
  // signal model
  MissingMarker,
  OrderViolation,
  OutOfBounds,
  InvalidArgument,
  // io
  BadMagic,
  TruncatedFile,
  TrailingData,
  VersionUnsupported,
  ParseError,
  SchemaError,
  IoError,
  // dsp
  BadFactor,
  // xdawn
  TooFewWindows,
  SingularCovariance,
  DimensionMismatch,
  // features
  ShapeMismatch,
  TooFewVectors,
  // pa1
  ZeroVector,
  SingleClass,
  EmptyClass,
  ClassTooSmall,
  // detector
  NoEvaluableWindows,
  ChunkOutOfOrder,
  BufferOverrun,
  // stream
  UnknownType,
  LengthMismatch,
  ConnectionLost,
  ProtocolViolation,
};

std::string_view to_string(ErrorCode code);

// Single exception type for the library; callers switch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what);

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] void fail(ErrorCode code, const std::string& what);

}  // namespace errp
