#include "okp/feature_map.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "okp/error.hpp"

namespace okp {

namespace {

std::size_t axis_cells(std::uint32_t src, std::uint32_t patch, std::uint32_t stride) {
    if (stride == 0 || src < patch) return 0;
    return (src - patch) / stride + 1;
}

void check_geometry(const GridGeometry& g, std::size_t rows, std::size_t cols) {
    if (g.patch < 1 || g.stride < 1 || g.stride > g.patch) {
        fail(ErrorCode::InvalidGeometry, "patch/stride must satisfy 1 <= stride <= patch");
    }
    if (g.grid_rows() != rows || g.grid_cols() != cols) {
        fail(ErrorCode::InvalidGeometry,
             "geometry implies a " + std::to_string(g.grid_rows()) + "x" +
                 std::to_string(g.grid_cols()) + " grid but the map is " +
                 std::to_string(rows) + "x" + std::to_string(cols));
    }
}

}  // namespace

GridGeometry GridGeometry::unit(std::size_t rows, std::size_t cols) {
    GridGeometry g;
    g.src_w = static_cast<std::uint32_t>(cols);
    g.src_h = static_cast<std::uint32_t>(rows);
    g.patch = 1;
    g.stride = 1;
    return g;
}

std::size_t GridGeometry::grid_rows() const noexcept { return axis_cells(src_h, patch, stride); }
std::size_t GridGeometry::grid_cols() const noexcept { return axis_cells(src_w, patch, stride); }

std::size_t chebyshev(GridIndex a, GridIndex b) noexcept {
    const std::size_t dr = a.row > b.row ? a.row - b.row : b.row - a.row;
    const std::size_t dc = a.col > b.col ? a.col - b.col : b.col - a.col;
    return std::max(dr, dc);
}

FeatureMap::FeatureMap(std::size_t rows, std::size_t cols, std::size_t channels,
                       std::vector<float> data, GridGeometry geom)
    : rows_(rows), cols_(cols), channels_(channels), data_(std::move(data)), geom_(geom) {
    if (rows_ == 0 || cols_ == 0 || channels_ == 0) {
        fail(ErrorCode::InvalidGeometry, "feature map dimensions must be >= 1");
    }
    if (data_.size() != rows_ * cols_ * channels_) {
        fail(ErrorCode::InvalidGeometry, "feature map data length does not match its shape");
    }
    check_geometry(geom_, rows_, cols_);
}

FeatureMap::FeatureMap(std::size_t rows, std::size_t cols, std::size_t channels, GridGeometry geom)
    : FeatureMap(rows, cols, channels, std::vector<float>(rows * cols * channels, 0.0f), geom) {}

bool FeatureMap::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(), [](float x) { return std::isfinite(x); });
}

bool FeatureMap::operator==(const FeatureMap& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_ && channels_ == other.channels_ &&
           geom_ == other.geom_ &&
           std::equal(data_.begin(), data_.end(), other.data_.begin(), other.data_.end(),
                      [](float a, float b) { return std::bit_cast<std::uint32_t>(a) ==
                                                    std::bit_cast<std::uint32_t>(b); });
}

PixelCoord grid_to_pixel(GridIndex idx, const GridGeometry& geom) {
    const double half = (static_cast<double>(geom.patch) - 1.0) / 2.0;
    return {static_cast<double>(idx.col) * geom.stride + half,
            static_cast<double>(idx.row) * geom.stride + half};
}

GridIndex pixel_to_grid(PixelCoord p, const GridGeometry& geom) {
    if (!(p.u >= 0.0 && p.u < geom.src_w && p.v >= 0.0 && p.v < geom.src_h)) {
        fail(ErrorCode::OutOfBounds, "pixel (" + std::to_string(p.u) + ", " + std::to_string(p.v) +
                                         ") lies outside the model input");
    }
    const double half = (static_cast<double>(geom.patch) - 1.0) / 2.0;
    const auto nearest = [&](double x, std::size_t cells) {
        const double k = std::floor((x - half) / geom.stride + 0.5);
        const double hi = static_cast<double>(cells) - 1.0;
        return static_cast<std::size_t>(std::clamp(k, 0.0, std::max(hi, 0.0)));
    };
    return {nearest(p.v, geom.grid_rows()), nearest(p.u, geom.grid_cols())};
}

PixelCoord scale_to_raw(PixelCoord p, const GridGeometry& geom) {
    if (!geom.has_raw()) {
        fail(ErrorCode::MissingRawGeometry, "geometry carries no raw image size");
    }
    const double side = std::max(geom.raw_w, geom.raw_h);
    return {p.u * side / geom.src_w - geom.pad_left, p.v * side / geom.src_h - geom.pad_top};
}

}  // namespace okp
