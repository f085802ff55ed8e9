#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "okp/detection.hpp"
#include "okp/feature_map.hpp"

namespace okp {

struct GtInstance {
    int id = 0;
    std::map<int, PixelCoord> keypoints;  // identity -> raw pixel
};

struct GroundTruth {
    std::string image;
    int width = 0;
    int height = 0;
    std::vector<GtInstance> instances;

    std::size_t keypoint_count() const noexcept;
    /// Largest identity present, 0 when there are no keypoints.
    int max_identity() const noexcept;
};

GroundTruth parse_ground_truth_json(const std::string& text);
std::string ground_truth_to_json(const GroundTruth& gt);
GroundTruth read_ground_truth_file(const std::filesystem::path& path);
void write_ground_truth_file(const GroundTruth& gt, const std::filesystem::path& path);

/// A predicted keypoint is a hit when it lies strictly closer than this
/// fraction of the image width to a same-identity ground-truth point.
inline constexpr double kTpDistanceFraction = 0.05;

struct GtRef {
    std::size_t instance = 0;  // index into GroundTruth::instances
    int identity = 0;
};

/// matches[i][k] is the ground-truth point matched by keypoint k of predicted
/// instance i, if any.
struct KeypointMatching {
    std::vector<std::vector<std::optional<GtRef>>> matches;
    std::size_t true_positives = 0;
};

/// Greedy one-to-one matching per identity, by ascending distance.
/// Throws FrameMismatch unless `pred` is in raw-image coordinates.
KeypointMatching match_keypoints(const DetectionSet& pred, const GroundTruth& gt);

struct EvalResult {
    double r_kp = 1.0;
    double p_kp = 1.0;
    double r_ins = 1.0;
    double p_ins = 1.0;
    std::size_t tp_kp = 0, fp_kp = 0, fn_kp = 0;
    std::size_t tp_ins = 0, fp_ins = 0, fn_ins = 0;
};

/// Keypoint and instance precision/recall for one image. A predicted
/// instance is a true positive when its hit count t satisfies
/// min_keypoints <= t <= n_kp and it is the first (by descending t) to claim
/// the ground-truth instance most of its hits landed on.
EvalResult score_image(const DetectionSet& pred, const GroundTruth& gt, int min_keypoints, int n_kp);

struct MetricBars {
    double r_kp = 0.0;
    double p_kp = 0.0;
    double r_ins = 0.0;
    double p_ins = 0.0;
};

struct SequenceInput {
    std::string name;
    std::vector<EvalResult> images;
};

struct SequenceSummary {
    std::string name;
    std::size_t images = 0;
    MetricBars bars;
};

struct EvalReport {
    std::vector<SequenceSummary> sequences;
    MetricBars mean;
};

/// Unweighted mean over images per sequence, then over sequences.
/// Throws EmptyGroup for an empty sequence or no sequences.
EvalReport aggregate(const std::vector<SequenceInput>& sequences);

/// Aligned text table: one row per sequence plus a Mean row.
std::string format_report_table(const EvalReport& report);

}  // namespace okp
