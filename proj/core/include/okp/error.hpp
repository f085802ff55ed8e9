#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace okp {

enum class ErrorCode {
    IoFailure,
    BadMagic,
    UnsupportedVersion,
    VersionMismatch,
    TruncatedPayload,
    NonFiniteValue,
    InvalidGeometry,
    OutOfBounds,
    MissingRawGeometry,
    ShapeMismatch,
    ChannelMismatch,
    InvalidConfig,
    DuplicateId,
    TooFewKeypoints,
    InvalidAnnotation,
    ZeroVector,
    FrameMismatch,
    EmptyGroup,
    SchemaViolation,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Every failure surfaced by the library carries one of the codes above.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

}  // namespace okp
