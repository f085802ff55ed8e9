#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "okp/feature_map.hpp"
#include "okp/parallel.hpp"

namespace okp {

struct EnhanceConfig {
    double alpha = 5.0;
    bool use_objectness_attention = true;
    int bin_spacing = 3;
    int pool_kernel = 3;

    /// Throws InvalidConfig.
    void validate() const;

    bool operator==(const EnhanceConfig&) const = default;
};

/// Per-cell objectness, min-max normalized to [-1, 1].
struct ActivationMap {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> values;

    double at(std::size_t row, std::size_t col) const { return values[row * cols + col]; }
};

/// Center + 8 adjacent + 8 spaced neighbors.
inline constexpr std::size_t kBinBlocks = 17;

constexpr std::size_t binned_channels(std::size_t channels) noexcept {
    return kBinBlocks * channels;
}

/// Row-major neighbor offsets (dr, dc) used for blocks 1..8 (and, scaled by
/// the bin spacing, blocks 9..16).
inline constexpr std::array<std::array<int, 2>, 8> kNeighborOffsets = {{
    {-1, -1}, {-1, 0}, {-1, 1}, {0, -1}, {0, 1}, {1, -1}, {1, 0}, {1, 1},
}};

ActivationMap objectness_activation(const FeatureMap& map);

/// Logistic of alpha * activation; the per-cell attention multiplier.
double attention_scale(double activation, double alpha) noexcept;

FeatureMap apply_objectness_attention(const FeatureMap& map, const ActivationMap& act,
                                      const EnhanceConfig& cfg);

/// Mean over a kernel x kernel window (stride 1) with clamp-to-edge borders.
FeatureMap average_pool(const FeatureMap& map, int kernel, ExecOptions exec = {});
FeatureMap average_pool_3x3(const FeatureMap& map, ExecOptions exec = {});

/// Concatenates, per cell, the center and its 8 neighbors from `attended`
/// with the 8 neighbors at Chebyshev offset `bin_spacing` from `pooled`.
FeatureMap neighborhood_binning(const FeatureMap& attended, const FeatureMap& pooled,
                                const EnhanceConfig& cfg, ExecOptions exec = {});

/// attention (optional) -> pool -> bin. Output has binned_channels(D) channels.
FeatureMap enhance(const FeatureMap& map, const EnhanceConfig& cfg, ExecOptions exec = {});

}  // namespace okp
