#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace okp {

/// Geometry of the model input that produced a feature grid.
///
/// `src_w`/`src_h` is the (square, resized) model input, `patch`/`stride` the
/// tokenizer geometry. The raw/pad fields describe how the original image was
/// padded to a square before resizing; zero means "unknown".
struct GridGeometry {
    std::uint32_t src_w = 0;
    std::uint32_t src_h = 0;
    std::uint32_t patch = 1;
    std::uint32_t stride = 1;
    std::uint32_t raw_w = 0;
    std::uint32_t raw_h = 0;
    std::uint32_t pad_left = 0;
    std::uint32_t pad_top = 0;

    /// Geometry where every grid cell is one model-input pixel.
    static GridGeometry unit(std::size_t rows, std::size_t cols);

    bool has_raw() const noexcept { return raw_w != 0 && raw_h != 0; }

    /// floor((src - patch) / stride) + 1 along each axis; 0 when src < patch.
    std::size_t grid_rows() const noexcept;
    std::size_t grid_cols() const noexcept;

    bool operator==(const GridGeometry&) const = default;
};

struct GridIndex {
    std::size_t row = 0;
    std::size_t col = 0;

    std::size_t flat(std::size_t cols) const noexcept { return row * cols + col; }

    bool operator==(const GridIndex&) const = default;
};

/// Chebyshev (chessboard) distance between two cells.
std::size_t chebyshev(GridIndex a, GridIndex b) noexcept;

struct PixelCoord {
    double u = 0.0;
    double v = 0.0;
};

/// Dense rows x cols x channels grid of float descriptors, channel-last.
class FeatureMap {
public:
    FeatureMap() = default;

    /// Throws InvalidGeometry when the shape is empty, the data length is
    /// wrong, or `geom` does not reproduce the grid shape.
    FeatureMap(std::size_t rows, std::size_t cols, std::size_t channels,
               std::vector<float> data, GridGeometry geom);

    /// Zero-filled map.
    FeatureMap(std::size_t rows, std::size_t cols, std::size_t channels, GridGeometry geom);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t channels() const noexcept { return channels_; }
    std::size_t cell_count() const noexcept { return rows_ * cols_; }
    const GridGeometry& geometry() const noexcept { return geom_; }

    std::span<const float> data() const noexcept { return data_; }
    std::span<float> data() noexcept { return data_; }

    std::span<const float> cell(std::size_t row, std::size_t col) const noexcept {
        return {data_.data() + (row * cols_ + col) * channels_, channels_};
    }
    std::span<float> cell(std::size_t row, std::size_t col) noexcept {
        return {data_.data() + (row * cols_ + col) * channels_, channels_};
    }
    std::span<const float> cell(std::size_t flat) const noexcept {
        return {data_.data() + flat * channels_, channels_};
    }
    std::span<const float> cell(GridIndex idx) const noexcept { return cell(idx.row, idx.col); }

    bool contains(GridIndex idx) const noexcept { return idx.row < rows_ && idx.col < cols_; }
    GridIndex index_of(std::size_t flat) const noexcept { return {flat / cols_, flat % cols_}; }

    bool all_finite() const noexcept;

    bool operator==(const FeatureMap& other) const;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::size_t channels_ = 0;
    std::vector<float> data_;
    GridGeometry geom_;
};

/// Patch center of a cell in model-input pixels: (col*s + (p-1)/2, row*s + (p-1)/2).
PixelCoord grid_to_pixel(GridIndex idx, const GridGeometry& geom);

/// Nearest patch center to a model-input pixel, clamped into the grid.
/// Throws OutOfBounds when (u, v) lies outside [0, src_w) x [0, src_h).
GridIndex pixel_to_grid(PixelCoord p, const GridGeometry& geom);

/// Model-input pixel to raw-image pixel: undo the resize of the padded square,
/// then remove the padding. Throws MissingRawGeometry when raw size is unknown.
PixelCoord scale_to_raw(PixelCoord p, const GridGeometry& geom);

}  // namespace okp
