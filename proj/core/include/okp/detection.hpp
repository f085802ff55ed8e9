#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace okp {

enum class CoordinateFrame { ModelInput, Raw };

struct DetectedKeypoint {
    int id = 0;
    double u = 0.0;
    double v = 0.0;
    double score = 0.0;

    bool operator==(const DetectedKeypoint&) const = default;
};

struct DetectedInstance {
    int n = 0;
    double cohesion = 0.0;
    std::vector<DetectedKeypoint> keypoints;

    bool operator==(const DetectedInstance&) const = default;
};

/// Per-image extraction result. Files always hold raw-image coordinates.
struct DetectionSet {
    std::string image;
    CoordinateFrame frame = CoordinateFrame::Raw;
    std::vector<DetectedInstance> instances;

    bool operator==(const DetectionSet&) const = default;
};

std::string detection_to_json(const DetectionSet& det);
/// Throws SchemaViolation; rejects duplicate identities within an instance.
DetectionSet parse_detection_json(const std::string& text);

DetectionSet read_detection_file(const std::filesystem::path& path);
void write_detection_file(const DetectionSet& det, const std::filesystem::path& path);

}  // namespace okp
