#include "okp/error.hpp"

namespace okp {

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::IoFailure: return "IoFailure";
        case ErrorCode::BadMagic: return "BadMagic";
        case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
        case ErrorCode::VersionMismatch: return "VersionMismatch";
        case ErrorCode::TruncatedPayload: return "TruncatedPayload";
        case ErrorCode::NonFiniteValue: return "NonFiniteValue";
        case ErrorCode::InvalidGeometry: return "InvalidGeometry";
        case ErrorCode::OutOfBounds: return "OutOfBounds";
        case ErrorCode::MissingRawGeometry: return "MissingRawGeometry";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::ChannelMismatch: return "ChannelMismatch";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::DuplicateId: return "DuplicateId";
        case ErrorCode::TooFewKeypoints: return "TooFewKeypoints";
        case ErrorCode::InvalidAnnotation: return "InvalidAnnotation";
        case ErrorCode::ZeroVector: return "ZeroVector";
        case ErrorCode::FrameMismatch: return "FrameMismatch";
        case ErrorCode::EmptyGroup: return "EmptyGroup";
        case ErrorCode::SchemaViolation: return "SchemaViolation";
    }
    return "Unknown";
}

}  // namespace okp
