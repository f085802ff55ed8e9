#include "okp/prototype.hpp"

#include <algorithm>
#include <set>
#include <string>

#include <json.hpp>

#include "bytes.hpp"
#include "okp/error.hpp"
#include "okp/okpf.hpp"

namespace okp {

using nlohmann::json;

namespace {

constexpr std::uint8_t kMagic[4] = {0x4F, 0x4B, 0x50, 0x50};

std::pair<int, int> ordered(int k, int l) { return k < l ? std::pair{k, l} : std::pair{l, k}; }

json parse_or_fail(const std::string& text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        fail(ErrorCode::SchemaViolation, std::string(what) + ": " + e.what());
    }
}

json config_to_json(const LearnConfig& cfg) {
    return json{{"alpha", cfg.enhance.alpha},
                {"use_objectness_attention", cfg.enhance.use_objectness_attention},
                {"bin_spacing", cfg.enhance.bin_spacing},
                {"pool_kernel", cfg.enhance.pool_kernel},
                {"n_seg", cfg.n_seg}};
}

LearnConfig config_from_json(const json& j) {
    try {
        LearnConfig cfg;
        cfg.enhance.alpha = j.at("alpha").get<double>();
        cfg.enhance.use_objectness_attention = j.at("use_objectness_attention").get<bool>();
        cfg.enhance.bin_spacing = j.at("bin_spacing").get<int>();
        cfg.enhance.pool_kernel = j.at("pool_kernel").get<int>();
        cfg.n_seg = j.at("n_seg").get<int>();
        return cfg;
    } catch (const json::exception& e) {
        fail(ErrorCode::SchemaViolation, std::string("store config: ") + e.what());
    }
}

std::vector<GridIndex> four_neighbors(GridIndex c, std::size_t rows, std::size_t cols) {
    std::vector<GridIndex> out;
    const auto add = [&](GridIndex g) {
        if (!(g == c) && std::find(out.begin(), out.end(), g) == out.end()) out.push_back(g);
    };
    add({c.row == 0 ? 0 : c.row - 1, c.col});
    add({std::min(c.row + 1, rows - 1), c.col});
    add({c.row, std::min(c.col + 1, cols - 1)});
    add({c.row, c.col == 0 ? 0 : c.col - 1});
    return out;
}

}  // namespace

void Annotation::validate() const {
    std::set<int> ids;
    for (const auto& kp : keypoints) {
        if (!ids.insert(kp.id).second) {
            fail(ErrorCode::DuplicateId, "duplicate keypoint id " + std::to_string(kp.id));
        }
        if (!std::isfinite(kp.u) || !std::isfinite(kp.v)) {
            fail(ErrorCode::InvalidAnnotation, "keypoint coordinates must be finite");
        }
    }
    if (keypoints.size() < 2) {
        fail(ErrorCode::TooFewKeypoints, "at least two keypoints are required to form edges");
    }
    if (*ids.begin() != 1 || *ids.rbegin() != static_cast<int>(ids.size())) {
        fail(ErrorCode::InvalidAnnotation, "keypoint ids must be contiguous from 1 to N_KP");
    }
    for (const auto& [k, l] : excluded_edges) {
        if (k == l || !ids.contains(k) || !ids.contains(l)) {
            fail(ErrorCode::InvalidAnnotation, "excluded edge (" + std::to_string(k) + ", " +
                                                   std::to_string(l) + ") is not a valid pair");
        }
    }
}

bool Annotation::is_excluded(int k, int l) const noexcept {
    const auto key = ordered(k, l);
    return std::any_of(excluded_edges.begin(), excluded_edges.end(),
                       [&](const auto& e) { return ordered(e.first, e.second) == key; });
}

Annotation parse_annotation_json(const std::string& text) {
    const json j = parse_or_fail(text, "annotation");
    Annotation ann;
    try {
        for (const auto& kp : j.at("keypoints")) {
            ann.keypoints.push_back(
                {kp.at("id").get<int>(), kp.at("u").get<double>(), kp.at("v").get<double>()});
        }
        if (j.contains("excluded_edges")) {
            for (const auto& e : j.at("excluded_edges")) {
                if (!e.is_array() || e.size() != 2) {
                    fail(ErrorCode::SchemaViolation, "excluded edge must be a pair of ids");
                }
                ann.excluded_edges.emplace_back(e[0].get<int>(), e[1].get<int>());
            }
        }
    } catch (const json::exception& e) {
        fail(ErrorCode::SchemaViolation, std::string("annotation: ") + e.what());
    }
    std::sort(ann.keypoints.begin(), ann.keypoints.end(),
              [](const auto& a, const auto& b) { return a.id < b.id; });
    return ann;
}

std::string annotation_to_json(const Annotation& ann) {
    json j;
    j["keypoints"] = json::array();
    for (const auto& kp : ann.keypoints) {
        j["keypoints"].push_back({{"id", kp.id}, {"u", kp.u}, {"v", kp.v}});
    }
    j["excluded_edges"] = json::array();
    for (const auto& [k, l] : ann.excluded_edges) j["excluded_edges"].push_back({k, l});
    return j.dump();
}

Annotation read_annotation_file(const std::filesystem::path& path) {
    const auto bytes = detail::read_file_bytes(path);
    return parse_annotation_json(std::string(bytes.begin(), bytes.end()));
}

void LearnConfig::validate() const {
    enhance.validate();
    if (n_seg < 1) fail(ErrorCode::InvalidConfig, "n_seg must be >= 1");
}

EdgeDescriptor edge_descriptor(const FeatureMap& map, GridIndex a, GridIndex b, int n_seg) {
    if (!map.contains(a) || !map.contains(b)) fail(ErrorCode::OutOfBounds, "edge endpoint outside grid");
    if (n_seg < 1) fail(ErrorCode::InvalidConfig, "n_seg must be >= 1");

    // Sample q of segment m sits at t = (m + (q + 0.5) / T) / n_seg. With
    // N = 2 * T * n_seg and j = 2 * (T * m + q) + 1 the position is
    // (a * (N - j) + b * j) / N, which keeps rasterization exact and
    // symmetric under endpoint reversal.
    constexpr std::int64_t T = kEdgeSamplesPerSegment;
    const std::int64_t big_n = 2 * T * n_seg;
    const auto nearest = [&](std::int64_t from, std::int64_t to, std::int64_t j) {
        const std::int64_t num = from * (big_n - j) + to * j;
        return static_cast<std::size_t>((2 * num + big_n) / (2 * big_n));
    };

    const std::size_t d = map.channels();
    EdgeDescriptor out(static_cast<std::size_t>(n_seg), d);
    std::vector<std::size_t> samples(T);
    std::vector<double> acc(d);
    for (int m = 0; m < n_seg; ++m) {
        for (std::int64_t q = 0; q < T; ++q) {
            const std::int64_t j = 2 * (T * m + q) + 1;
            const GridIndex g{nearest(static_cast<std::int64_t>(a.row), static_cast<std::int64_t>(b.row), j),
                              nearest(static_cast<std::int64_t>(a.col), static_cast<std::int64_t>(b.col), j)};
            samples[static_cast<std::size_t>(q)] = g.flat(map.cols());
        }
        // Summation order independent of direction.
        std::sort(samples.begin(), samples.end());
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t flat : samples) {
            const auto cell = map.cell(flat);
            for (std::size_t c = 0; c < d; ++c) acc[c] += cell[c];
        }
        auto dst = out.segment(static_cast<std::size_t>(m));
        for (std::size_t c = 0; c < d; ++c) dst[c] = static_cast<float>(acc[c] / T);
    }
    return out;
}

PrototypeStore PrototypeStore::learn(FeatureMap support, Annotation annotation, LearnConfig cfg,
                                     ExecOptions exec) {
    annotation.validate();
    cfg.validate();
    std::sort(annotation.keypoints.begin(), annotation.keypoints.end(),
              [](const auto& a, const auto& b) { return a.id < b.id; });

    PrototypeStore s;
    s.enhanced_ = enhance(support, cfg.enhance, exec);
    for (const auto& kp : annotation.keypoints) {
        const GridIndex cell = pixel_to_grid({kp.u, kp.v}, support.geometry());
        const auto vec = s.enhanced_.cell(cell);
        s.keypoints_.push_back({kp.id, cell, {vec.begin(), vec.end()},
                                four_neighbors(cell, support.rows(), support.cols())});
    }
    const int n = static_cast<int>(s.keypoints_.size());
    for (int k = 1; k <= n; ++k) {
        for (int l = k + 1; l <= n; ++l) {
            if (annotation.is_excluded(k, l)) continue;
            s.edges_.push_back({k, l, edge_descriptor(s.enhanced_, s.keypoint(k).cell,
                                                      s.keypoint(l).cell, cfg.n_seg)});
        }
    }
    s.support_ = std::move(support);
    s.annotation_ = std::move(annotation);
    s.cfg_ = cfg;
    return s;
}

const EdgePrototype* PrototypeStore::edge(int k, int l) const noexcept {
    const auto key = ordered(k, l);
    const auto it = std::lower_bound(edges_.begin(), edges_.end(), key, [](const EdgePrototype& e, const auto& v) {
        return std::pair{e.k, e.l} < v;
    });
    if (it == edges_.end() || it->k != key.first || it->l != key.second) return nullptr;
    return &*it;
}

std::vector<std::uint8_t> encode_store(const PrototypeStore& store) {
    const std::string ann = annotation_to_json(store.annotation());
    const std::string cfg = config_to_json(store.config()).dump();
    detail::ByteWriter w;
    for (auto b : kMagic) w.u8(b);
    w.u8(kOkppVersion);
    w.u32(static_cast<std::uint32_t>(ann.size()));
    w.text(ann);
    w.u32(static_cast<std::uint32_t>(cfg.size()));
    w.text(cfg);
    w.bytes(encode_okpf(store.support_map()));
    return w.take();
}

PrototypeStore decode_store(std::span<const std::uint8_t> bytes, ExecOptions exec) {
    detail::ByteReader r(bytes);
    if (bytes.size() < 4) fail(ErrorCode::BadMagic, "file too short for OKPP magic");
    for (auto b : kMagic) {
        if (r.u8() != b) fail(ErrorCode::BadMagic, "not an OKPP prototype store");
    }
    const std::uint8_t version = r.u8();
    if (version != kOkppVersion) {
        fail(ErrorCode::VersionMismatch, "OKPP version " + std::to_string(version));
    }
    const auto read_blob = [&] {
        const std::uint32_t n = r.u32();
        const auto blob = r.take(n);
        return std::string(blob.begin(), blob.end());
    };
    Annotation ann = parse_annotation_json(read_blob());
    const LearnConfig cfg = config_from_json(parse_or_fail(read_blob(), "store config"));
    FeatureMap support = decode_okpf(r.rest());
    return PrototypeStore::learn(std::move(support), std::move(ann), cfg, exec);
}

void save_store(const PrototypeStore& store, const std::filesystem::path& path) {
    detail::write_file_bytes(path, encode_store(store));
}

PrototypeStore load_store(const std::filesystem::path& path, ExecOptions exec) {
    return decode_store(detail::read_file_bytes(path), exec);
}

}  // namespace okp
