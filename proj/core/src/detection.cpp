#include "okp/detection.hpp"

#include <cmath>
#include <set>

#include <json.hpp>

#include "bytes.hpp"
#include "okp/error.hpp"

namespace okp {

using nlohmann::json;

std::string detection_to_json(const DetectionSet& det) {
    json j{{"image", det.image}, {"instances", json::array()}};
    for (const auto& inst : det.instances) {
        json ji{{"n", inst.n}, {"cohesion", inst.cohesion}, {"keypoints", json::array()}};
        for (const auto& kp : inst.keypoints) {
            ji["keypoints"].push_back({{"id", kp.id}, {"u", kp.u}, {"v", kp.v}, {"score", kp.score}});
        }
        j["instances"].push_back(std::move(ji));
    }
    return j.dump(2);
}

DetectionSet parse_detection_json(const std::string& text) {
    DetectionSet det;
    try {
        const json j = json::parse(text);
        det.image = j.at("image").get<std::string>();
        for (const auto& ji : j.at("instances")) {
            DetectedInstance inst;
            inst.n = ji.at("n").get<int>();
            inst.cohesion = ji.value("cohesion", 0.0);
            std::set<int> ids;
            for (const auto& jk : ji.at("keypoints")) {
                DetectedKeypoint kp{jk.at("id").get<int>(), jk.at("u").get<double>(),
                                    jk.at("v").get<double>(), jk.value("score", 0.0)};
                if (!std::isfinite(kp.u) || !std::isfinite(kp.v)) {
                    fail(ErrorCode::SchemaViolation, "detection coordinates must be finite");
                }
                if (!ids.insert(kp.id).second) {
                    fail(ErrorCode::SchemaViolation, "identity repeated within a detected instance");
                }
                inst.keypoints.push_back(kp);
            }
            det.instances.push_back(std::move(inst));
        }
    } catch (const json::exception& e) {
        fail(ErrorCode::SchemaViolation, std::string("detection: ") + e.what());
    }
    return det;
}

DetectionSet read_detection_file(const std::filesystem::path& path) {
    const auto bytes = detail::read_file_bytes(path);
    return parse_detection_json(std::string(bytes.begin(), bytes.end()));
}

void write_detection_file(const DetectionSet& det, const std::filesystem::path& path) {
    const std::string text = detection_to_json(det) + "\n";
    detail::write_file_bytes(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

}  // namespace okp
