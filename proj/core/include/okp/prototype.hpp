#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "okp/enhance.hpp"
#include "okp/feature_map.hpp"
#include "okp/parallel.hpp"

namespace okp {

struct KeypointAnnotation {
    int id = 0;
    double u = 0.0;  // model-input pixels
    double v = 0.0;

    bool operator==(const KeypointAnnotation&) const = default;
};

/// Human annotation of the support image. Ids run 1..N_KP.
struct Annotation {
    std::vector<KeypointAnnotation> keypoints;
    std::vector<std::pair<int, int>> excluded_edges;

    /// Throws DuplicateId, TooFewKeypoints or InvalidAnnotation.
    void validate() const;

    std::size_t keypoint_count() const noexcept { return keypoints.size(); }
    bool is_excluded(int k, int l) const noexcept;

    bool operator==(const Annotation&) const = default;
};

Annotation parse_annotation_json(const std::string& text);
std::string annotation_to_json(const Annotation& ann);
Annotation read_annotation_file(const std::filesystem::path& path);

struct LearnConfig {
    EnhanceConfig enhance;
    int n_seg = 8;

    void validate() const;

    bool operator==(const LearnConfig&) const = default;
};

/// n_seg descriptors of `channels` floats each, stored contiguously.
class EdgeDescriptor {
public:
    EdgeDescriptor() = default;
    EdgeDescriptor(std::size_t segments, std::size_t channels)
        : segments_(segments), channels_(channels), data_(segments * channels, 0.0f) {}

    std::size_t segments() const noexcept { return segments_; }
    std::size_t channels() const noexcept { return channels_; }

    std::span<const float> segment(std::size_t m) const noexcept {
        return {data_.data() + m * channels_, channels_};
    }
    std::span<float> segment(std::size_t m) noexcept {
        return {data_.data() + m * channels_, channels_};
    }

    bool operator==(const EdgeDescriptor&) const = default;

private:
    std::size_t segments_ = 0;
    std::size_t channels_ = 0;
    std::vector<float> data_;
};

/// Samples taken per sub-segment when rasterizing an edge.
inline constexpr int kEdgeSamplesPerSegment = 4;

/// Splits the segment a -> b (cell coordinates) into n_seg equal parts, reads
/// the nearest cell at kEdgeSamplesPerSegment midpoint-offset samples of each
/// part and averages them. Reversing a and b reverses the descriptor list.
EdgeDescriptor edge_descriptor(const FeatureMap& map, GridIndex a, GridIndex b, int n_seg);

struct KeypointPrototype {
    int id = 0;
    GridIndex cell;
    std::vector<float> vector;
    /// 4-neighborhood of `cell`, clamped to the grid, without `cell` itself.
    std::vector<GridIndex> adjacent_cells;

    bool operator==(const KeypointPrototype&) const = default;
};

struct EdgePrototype {
    int k = 0;  // k < l
    int l = 0;
    EdgeDescriptor segments;

    bool operator==(const EdgePrototype&) const = default;
};

/// One-shot learned model. Only the support map, annotation and config are
/// persisted; everything else is recomputed from them.
class PrototypeStore {
public:
    static PrototypeStore learn(FeatureMap support, Annotation annotation, LearnConfig cfg,
                                ExecOptions exec = {});

    const FeatureMap& support_map() const noexcept { return support_; }
    const Annotation& annotation() const noexcept { return annotation_; }
    const LearnConfig& config() const noexcept { return cfg_; }
    const FeatureMap& enhanced_support() const noexcept { return enhanced_; }

    std::size_t keypoint_count() const noexcept { return keypoints_.size(); }
    int n_seg() const noexcept { return cfg_.n_seg; }
    std::size_t raw_channels() const noexcept { return support_.channels(); }
    std::size_t binned_channels() const noexcept { return enhanced_.channels(); }

    /// Sorted by id; keypoint(k) is keypoints()[k - 1].
    const std::vector<KeypointPrototype>& keypoints() const noexcept { return keypoints_; }
    const KeypointPrototype& keypoint(int id) const { return keypoints_.at(static_cast<std::size_t>(id - 1)); }

    /// Sorted by (k, l).
    const std::vector<EdgePrototype>& edges() const noexcept { return edges_; }
    /// Prototype for the unordered pair {k, l}, or nullptr when excluded.
    const EdgePrototype* edge(int k, int l) const noexcept;

    bool operator==(const PrototypeStore&) const = default;

private:
    FeatureMap support_;
    Annotation annotation_;
    LearnConfig cfg_;
    FeatureMap enhanced_;
    std::vector<KeypointPrototype> keypoints_;
    std::vector<EdgePrototype> edges_;
};

inline PrototypeStore learn_prototypes(FeatureMap support, Annotation annotation,
                                       LearnConfig cfg = {}, ExecOptions exec = {}) {
    return PrototypeStore::learn(std::move(support), std::move(annotation), cfg, exec);
}

/// OKPP: "OKPP", u8 version, u32-prefixed annotation JSON, u32-prefixed config
/// JSON, then an embedded OKPF support map.
inline constexpr std::uint8_t kOkppVersion = 1;

std::vector<std::uint8_t> encode_store(const PrototypeStore& store);
PrototypeStore decode_store(std::span<const std::uint8_t> bytes, ExecOptions exec = {});

void save_store(const PrototypeStore& store, const std::filesystem::path& path);
PrototypeStore load_store(const std::filesystem::path& path, ExecOptions exec = {});

}  // namespace okp
