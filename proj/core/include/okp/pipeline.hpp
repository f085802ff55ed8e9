#pragma once

#include <string>
#include <vector>

#include "okp/detection.hpp"
#include "okp/feature_map.hpp"
#include "okp/group.hpp"
#include "okp/match.hpp"
#include "okp/parallel.hpp"
#include "okp/prototype.hpp"

namespace okp {

struct ExtractConfig {
    MatchConfig match;
    GroupConfig group;
};

struct ExtractResult {
    std::vector<CandidateKeypoint> candidates;
    std::vector<Instance> instances;
    DetectionSet detections;
};

/// Converts grouped instances into raw-image detections. When the geometry
/// carries no raw size the model input is taken to be the raw image.
DetectionSet to_detections(const std::vector<Instance>& instances, const GridGeometry& geom,
                           const std::string& image);

/// enhance -> candidates -> grouping -> raw coordinates, for one query map.
/// Throws ChannelMismatch or InvalidGeometry when the query was produced
/// differently from the store's support map.
ExtractResult extract(const PrototypeStore& store, const FeatureMap& query, const ExtractConfig& cfg,
                      const std::string& image, ExecOptions exec = {});

}  // namespace okp
