#include "okp/enhance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "okp/error.hpp"

namespace okp {

namespace {

std::size_t clamp_axis(std::ptrdiff_t x, std::size_t n) {
    return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(x, 0, static_cast<std::ptrdiff_t>(n) - 1));
}

void require_same_shape(const FeatureMap& a, const FeatureMap& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols() || a.channels() != b.channels()) {
        fail(ErrorCode::ShapeMismatch, what);
    }
}

}  // namespace

void EnhanceConfig::validate() const {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) fail(ErrorCode::InvalidConfig, "alpha must be > 0");
    if (bin_spacing < 1) fail(ErrorCode::InvalidConfig, "bin_spacing must be >= 1");
    if (pool_kernel < 1 || pool_kernel % 2 == 0) {
        fail(ErrorCode::InvalidConfig, "pool_kernel must be odd and >= 1");
    }
}

ActivationMap objectness_activation(const FeatureMap& map) {
    ActivationMap act{map.rows(), map.cols(), std::vector<double>(map.cell_count())};
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i = 0; i < map.cell_count(); ++i) {
        double sum = 0.0;
        for (float x : map.cell(i)) sum += std::fabs(static_cast<double>(x));
        const double o = sum / static_cast<double>(map.channels());
        act.values[i] = o;
        lo = std::min(lo, o);
        hi = std::max(hi, o);
    }
    for (double& o : act.values) {
        o = hi > lo ? 2.0 * (o - lo) / (hi - lo) - 1.0 : 0.0;
    }
    return act;
}

double attention_scale(double activation, double alpha) noexcept {
    return 1.0 / (1.0 + std::exp(-alpha * activation));
}

FeatureMap apply_objectness_attention(const FeatureMap& map, const ActivationMap& act,
                                      const EnhanceConfig& cfg) {
    if (act.rows != map.rows() || act.cols != map.cols() || act.values.size() != map.cell_count()) {
        fail(ErrorCode::ShapeMismatch, "activation map does not match the feature grid");
    }
    std::vector<float> out(map.data().begin(), map.data().end());
    const std::size_t d = map.channels();
    for (std::size_t i = 0; i < map.cell_count(); ++i) {
        const double s = attention_scale(act.values[i], cfg.alpha);
        for (std::size_t c = 0; c < d; ++c) {
            out[i * d + c] = static_cast<float>(static_cast<double>(out[i * d + c]) * s);
        }
    }
    return FeatureMap(map.rows(), map.cols(), d, std::move(out), map.geometry());
}

FeatureMap average_pool(const FeatureMap& map, int kernel, ExecOptions exec) {
    if (kernel < 1 || kernel % 2 == 0) fail(ErrorCode::InvalidConfig, "pool kernel must be odd and >= 1");
    const std::size_t rows = map.rows(), cols = map.cols(), d = map.channels();
    const int half = kernel / 2;
    const double inv = 1.0 / (static_cast<double>(kernel) * kernel);
    FeatureMap out(rows, cols, d, map.geometry());
    parallel_for(rows, exec, [&](std::size_t r0, std::size_t r1) {
        std::vector<double> acc(d);
        for (std::size_t r = r0; r < r1; ++r) {
            for (std::size_t c = 0; c < cols; ++c) {
                std::fill(acc.begin(), acc.end(), 0.0);
                for (int dr = -half; dr <= half; ++dr) {
                    const std::size_t rr = clamp_axis(static_cast<std::ptrdiff_t>(r) + dr, rows);
                    for (int dc = -half; dc <= half; ++dc) {
                        const std::size_t cc = clamp_axis(static_cast<std::ptrdiff_t>(c) + dc, cols);
                        const auto src = map.cell(rr, cc);
                        for (std::size_t k = 0; k < d; ++k) acc[k] += src[k];
                    }
                }
                auto dst = out.cell(r, c);
                for (std::size_t k = 0; k < d; ++k) dst[k] = static_cast<float>(acc[k] * inv);
            }
        }
    });
    return out;
}

FeatureMap average_pool_3x3(const FeatureMap& map, ExecOptions exec) {
    return average_pool(map, 3, exec);
}

FeatureMap neighborhood_binning(const FeatureMap& attended, const FeatureMap& pooled,
                                const EnhanceConfig& cfg, ExecOptions exec) {
    require_same_shape(attended, pooled, "attended and pooled maps differ in shape");
    if (cfg.bin_spacing < 1) fail(ErrorCode::InvalidConfig, "bin_spacing must be >= 1");
    const std::size_t rows = attended.rows(), cols = attended.cols(), d = attended.channels();
    FeatureMap out(rows, cols, binned_channels(d), attended.geometry());

    parallel_for(rows, exec, [&](std::size_t r0, std::size_t r1) {
        for (std::size_t r = r0; r < r1; ++r) {
            for (std::size_t c = 0; c < cols; ++c) {
                auto dst = out.cell(r, c).begin();
                const auto put = [&](const FeatureMap& src, int dr, int dc) {
                    const auto cell = src.cell(clamp_axis(static_cast<std::ptrdiff_t>(r) + dr, rows),
                                               clamp_axis(static_cast<std::ptrdiff_t>(c) + dc, cols));
                    dst = std::copy(cell.begin(), cell.end(), dst);
                };
                put(attended, 0, 0);
                for (const auto& [dr, dc] : kNeighborOffsets) put(attended, dr, dc);
                for (const auto& [dr, dc] : kNeighborOffsets) {
                    put(pooled, dr * cfg.bin_spacing, dc * cfg.bin_spacing);
                }
            }
        }
    });
    return out;
}

FeatureMap enhance(const FeatureMap& map, const EnhanceConfig& cfg, ExecOptions exec) {
    cfg.validate();
    if (!cfg.use_objectness_attention) {
        return neighborhood_binning(map, average_pool(map, cfg.pool_kernel, exec), cfg, exec);
    }
    const FeatureMap attended = apply_objectness_attention(map, objectness_activation(map), cfg);
    return neighborhood_binning(attended, average_pool(attended, cfg.pool_kernel, exec), cfg, exec);
}

}  // namespace okp
