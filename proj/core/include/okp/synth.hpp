#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "okp/evalkit.hpp"
#include "okp/feature_map.hpp"
#include "okp/prototype.hpp"

namespace okp {

/// Parameters of a synthetic support/query pair. `noise` is the standard
/// deviation of additive Gaussian noise on the query, relative to the RMS of
/// the clean query features.
struct SynthParams {
    int instances = 2;
    int keypoints = 4;
    int channels = 32;
    double noise = 0.0;
    std::uint64_t seed = 7;
    int grid = 64;
    int object_size = 16;

    /// Throws InvalidConfig, including when the instances cannot be placed
    /// without overlapping.
    void validate() const;
};

/// Support map with one object patch, its annotation, and a query holding
/// `instances` translated copies of that patch over a fresh background.
/// Keypoints sit at least four cells inside the patch, so noise-free copies
/// reproduce the support descriptors exactly after enhancement.
struct SynthFixture {
    FeatureMap support;
    Annotation annotation;
    FeatureMap query;
    GroundTruth ground_truth;
    GridIndex support_origin;
    std::vector<GridIndex> placements;        // query origin of each copy
    std::vector<GridIndex> keypoint_offsets;  // object-local, index k-1
};

/// Geometry used for synthetic grids: p = 8, s = 4, 512 x 512 raw image.
GridGeometry synth_geometry(int grid);

SynthFixture generate_fixture(const SynthParams& params);

/// Writes support.okpf, annotation.json, query.okpf and gt.json into `dir`.
void write_fixture(const SynthFixture& fixture, const std::filesystem::path& dir);

}  // namespace okp
