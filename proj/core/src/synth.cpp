#include "okp/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "bytes.hpp"
#include "okp/error.hpp"
#include "okp/okpf.hpp"

namespace okp {

namespace {

constexpr int kInteriorMargin = 4;  // cells of unchanged context around a keypoint
constexpr double kAnchorActivation = 0.25;
constexpr double kPeakActivation = 1.0;
constexpr int kPlacementAttempts = 10000;
constexpr int kSmoothRadius = 1;  // object field blur, in cells

using Rng = std::mt19937_64;

Rng stream(std::uint64_t seed, std::uint64_t id) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(id)};
    return Rng(seq);
}

// Writes `v` scaled so its mean absolute value is `activation`.
void scale_to_activation(const std::vector<double>& v, double activation, std::span<float> cell) {
    double mean_abs = 0.0;
    for (double x : v) mean_abs += std::fabs(x);
    mean_abs /= static_cast<double>(v.size());
    for (std::size_t c = 0; c < cell.size(); ++c) {
        cell[c] = static_cast<float>(mean_abs > 0.0 ? v[c] * activation / mean_abs : activation);
    }
}

// Random direction scaled so its mean absolute value is `activation`.
void fill_cell(std::span<float> cell, double activation, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> g(cell.size());
    for (double& x : g) x = normal(rng);
    scale_to_activation(g, activation, cell);
}

void fill_background(FeatureMap& map, Rng& rng) {
    std::uniform_real_distribution<double> level(0.3, 0.55);
    for (std::size_t r = 0; r < map.rows(); ++r) {
        for (std::size_t c = 0; c < map.cols(); ++c) fill_cell(map.cell(r, c), level(rng), rng);
    }
}

struct Rect {
    int r, c, size;
    bool overlaps(const Rect& o) const {
        return r < o.r + o.size && o.r < r + size && c < o.c + o.size && o.c < c + size;
    }
};

}  // namespace

void SynthParams::validate() const {
    if (instances < 1) fail(ErrorCode::InvalidConfig, "instances must be >= 1");
    if (keypoints < 2) fail(ErrorCode::InvalidConfig, "keypoints must be >= 2");
    if (channels < 1) fail(ErrorCode::InvalidConfig, "channels must be >= 1");
    if (!(noise >= 0.0) || !std::isfinite(noise)) fail(ErrorCode::InvalidConfig, "noise must be >= 0");
    if (object_size < 2 * kInteriorMargin + 1) {
        fail(ErrorCode::InvalidConfig, "object_size must be >= " + std::to_string(2 * kInteriorMargin + 1));
    }
    if (grid < object_size + 1) fail(ErrorCode::InvalidConfig, "grid too small for the object");
    const int interior = object_size - 2 * kInteriorMargin;
    if (keypoints > interior * interior) {
        fail(ErrorCode::InvalidConfig, "object interior cannot hold " + std::to_string(keypoints) + " keypoints");
    }
    const long long free_side = grid - 1;
    if (static_cast<long long>(instances) * object_size * object_size > free_side * free_side) {
        fail(ErrorCode::InvalidConfig, std::to_string(instances) + " instances cannot fit the grid without overlap");
    }
}

GridGeometry synth_geometry(int grid) {
    GridGeometry g;
    g.patch = 8;
    g.stride = 4;
    g.src_w = g.src_h = static_cast<std::uint32_t>((grid - 1) * 4 + 8);
    g.raw_w = g.raw_h = 512;
    return g;
}

SynthFixture generate_fixture(const SynthParams& p) {
    p.validate();
    const auto grid = static_cast<std::size_t>(p.grid);
    const auto d = static_cast<std::size_t>(p.channels);
    const GridGeometry geom = synth_geometry(p.grid);
    const int size = p.object_size;

    Rng layout = stream(p.seed, 0);
    Rng support_bg = stream(p.seed, 1);
    Rng object_rng = stream(p.seed, 2);
    Rng query_bg = stream(p.seed, 3);
    Rng noise_rng = stream(p.seed, 4);

    SynthFixture fx{FeatureMap(grid, grid, d, geom), {}, FeatureMap(grid, grid, d, geom), {}, {}, {}, {}};

    // Object patch: a box-blurred Gaussian field, so neighboring cells are
    // correlated like real backbone features, rescaled per cell to its
    // activation level. The activation peak sits at the center.
    FeatureMap object(static_cast<std::size_t>(size), static_cast<std::size_t>(size), d,
                      GridGeometry::unit(static_cast<std::size_t>(size), static_cast<std::size_t>(size)));
    {
        const int side = size + 2 * kSmoothRadius;
        std::normal_distribution<double> normal(0.0, 1.0);
        std::vector<double> field(static_cast<std::size_t>(side * side) * d);
        for (double& x : field) x = normal(object_rng);
        std::uniform_real_distribution<double> level(0.6, 0.95);
        std::vector<double> acc(d);
        for (int r = 0; r < size; ++r) {
            for (int c = 0; c < size; ++c) {
                std::fill(acc.begin(), acc.end(), 0.0);
                for (int dr = 0; dr <= 2 * kSmoothRadius; ++dr) {
                    for (int dc = 0; dc <= 2 * kSmoothRadius; ++dc) {
                        const std::size_t at = static_cast<std::size_t>((r + dr) * side + (c + dc)) * d;
                        for (std::size_t k = 0; k < d; ++k) acc[k] += field[at + k];
                    }
                }
                const bool peak = r == size / 2 && c == size / 2;
                scale_to_activation(acc, peak ? kPeakActivation : level(object_rng), object.cell(r, c));
            }
        }
    }
    // Shared low-activation anchor at (0, 0) pins the activation range.
    std::vector<float> anchor(d);
    fill_cell(anchor, kAnchorActivation, object_rng);

    // Keypoints: interior cells, spread out as far as the interior allows.
    std::vector<GridIndex> interior;
    for (int r = kInteriorMargin; r < size - kInteriorMargin; ++r) {
        for (int c = kInteriorMargin; c < size - kInteriorMargin; ++c) {
            interior.push_back({static_cast<std::size_t>(r), static_cast<std::size_t>(c)});
        }
    }
    std::shuffle(interior.begin(), interior.end(), layout);
    for (std::size_t sep : {3u, 2u, 1u}) {
        fx.keypoint_offsets.clear();
        for (const auto& cand : interior) {
            const bool far = std::all_of(fx.keypoint_offsets.begin(), fx.keypoint_offsets.end(),
                                         [&](GridIndex k) { return chebyshev(k, cand) >= sep; });
            if (far) fx.keypoint_offsets.push_back(cand);
            if (fx.keypoint_offsets.size() == static_cast<std::size_t>(p.keypoints)) break;
        }
        if (fx.keypoint_offsets.size() == static_cast<std::size_t>(p.keypoints)) break;
    }

    const auto paste = [&](FeatureMap& dst, GridIndex origin) {
        for (int r = 0; r < size; ++r) {
            for (int c = 0; c < size; ++c) {
                const auto src = object.cell(r, c);
                std::copy(src.begin(), src.end(), dst.cell(origin.row + r, origin.col + c).begin());
            }
        }
    };
    std::uniform_int_distribution<int> origin_dist(1, p.grid - size);

    fill_background(fx.support, support_bg);
    std::copy(anchor.begin(), anchor.end(), fx.support.cell(0, 0).begin());
    fx.support_origin = {static_cast<std::size_t>(origin_dist(layout)), static_cast<std::size_t>(origin_dist(layout))};
    paste(fx.support, fx.support_origin);

    fill_background(fx.query, query_bg);
    std::copy(anchor.begin(), anchor.end(), fx.query.cell(0, 0).begin());
    std::vector<Rect> placed;
    for (int m = 0; m < p.instances; ++m) {
        bool ok = false;
        for (int attempt = 0; attempt < kPlacementAttempts && !ok; ++attempt) {
            const Rect rect{origin_dist(layout), origin_dist(layout), size};
            if (std::none_of(placed.begin(), placed.end(), [&](const Rect& o) { return o.overlaps(rect); })) {
                placed.push_back(rect);
                ok = true;
            }
        }
        if (!ok) fail(ErrorCode::InvalidConfig, std::to_string(p.instances) + " instances cannot be placed without overlap");
        const GridIndex origin{static_cast<std::size_t>(placed.back().r), static_cast<std::size_t>(placed.back().c)};
        fx.placements.push_back(origin);
        paste(fx.query, origin);
    }

    if (p.noise > 0.0) {
        double ss = 0.0;
        for (float x : fx.query.data()) ss += static_cast<double>(x) * x;
        const double rms = std::sqrt(ss / static_cast<double>(fx.query.data().size()));
        std::normal_distribution<double> normal(0.0, p.noise * rms);
        for (float& x : fx.query.data()) x = static_cast<float>(x + normal(noise_rng));
    }

    for (std::size_t k = 0; k < fx.keypoint_offsets.size(); ++k) {
        const GridIndex cell{fx.support_origin.row + fx.keypoint_offsets[k].row,
                             fx.support_origin.col + fx.keypoint_offsets[k].col};
        const PixelCoord px = grid_to_pixel(cell, geom);
        fx.annotation.keypoints.push_back({static_cast<int>(k + 1), px.u, px.v});
    }

    fx.ground_truth.image = "query";
    fx.ground_truth.width = static_cast<int>(geom.raw_w);
    fx.ground_truth.height = static_cast<int>(geom.raw_h);
    for (std::size_t m = 0; m < fx.placements.size(); ++m) {
        GtInstance inst{static_cast<int>(m + 1), {}};
        for (std::size_t k = 0; k < fx.keypoint_offsets.size(); ++k) {
            const GridIndex cell{fx.placements[m].row + fx.keypoint_offsets[k].row,
                                 fx.placements[m].col + fx.keypoint_offsets[k].col};
            inst.keypoints[static_cast<int>(k + 1)] = scale_to_raw(grid_to_pixel(cell, geom), geom);
        }
        fx.ground_truth.instances.push_back(std::move(inst));
    }
    return fx;
}

void write_fixture(const SynthFixture& fx, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) fail(ErrorCode::IoFailure, "cannot create " + dir.string() + ": " + ec.message());
    write_feature_file(fx.support, dir / "support.okpf");
    write_feature_file(fx.query, dir / "query.okpf");
    const std::string ann = annotation_to_json(fx.annotation) + "\n";
    detail::write_file_bytes(dir / "annotation.json",
                             {reinterpret_cast<const std::uint8_t*>(ann.data()), ann.size()});
    write_ground_truth_file(fx.ground_truth, dir / "gt.json");
}

}  // namespace okp
