#include "okp/match.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <string>

#include "okp/error.hpp"

namespace okp {

namespace {

#if defined(__AVX512F__)
constexpr std::size_t kLanes = 16;
constexpr std::size_t kMr = 12;
#else
constexpr std::size_t kLanes = 8;
constexpr std::size_t kMr = 6;
#endif
constexpr std::size_t kNr = 2 * kLanes;  // query cells per micro-tile

typedef float vfloat __attribute__((vector_size(kLanes * sizeof(float))));

// Unaligned vector load/store; these compile to plain unaligned moves.
inline vfloat load(const float* p) {
    vfloat v;
    std::memcpy(&v, p, sizeof v);
    return v;
}
inline void store(float* p, vfloat v) { std::memcpy(p, &v, sizeof v); }

constexpr std::size_t kKc = 256;  // depth per pass; a kKc x kNr query panel stays in L1
constexpr std::size_t kMc = 384;  // support rows per pass; kMc x kKc stays in L2

std::size_t round_up(std::size_t x, std::size_t m) { return (x + m - 1) / m * m; }

// Unit-norm cells packed depth-major in panels of `width` cells:
// panel p holds data[(p * depth + k) * width + r] for cell p * width + r.
struct PackedPanels {
    std::size_t cells = 0;
    std::size_t width = 0;
    std::size_t depth = 0;
    std::vector<float> data;
    std::vector<char> zero;

    const float* panel(std::size_t p, std::size_t k0) const { return data.data() + (p * depth + k0) * width; }
    std::size_t panels() const { return (cells + width - 1) / width; }
};

PackedPanels pack_normalized(const FeatureMap& m, std::size_t width, ExecOptions exec) {
    PackedPanels n;
    n.cells = m.cell_count();
    n.width = width;
    n.depth = m.channels();
    n.data.assign(round_up(n.cells, width) * n.depth, 0.0f);
    n.zero.assign(n.cells, 0);
    parallel_for(n.panels(), exec, [&](std::size_t p0, std::size_t p1) {
        for (std::size_t p = p0; p < p1; ++p) {
            for (std::size_t r = 0; r < width && p * width + r < n.cells; ++r) {
                const auto cell = m.cell(p * width + r);
                double ss = 0.0;
                for (float x : cell) ss += static_cast<double>(x) * x;
                if (ss == 0.0) {
                    n.zero[p * width + r] = 1;
                    continue;
                }
                const double inv = 1.0 / std::sqrt(ss);
                float* dst = n.data.data() + p * n.depth * width + r;
                for (std::size_t k = 0; k < n.depth; ++k) dst[k * width] = static_cast<float>(cell[k] * inv);
            }
        }
    });
    return n;
}

// kMr x kNr tile of dot products over kc channels, accumulated in k order.
// `first` stores instead of adding to what earlier depth passes left in c.
inline void micro_kernel(const float* a, const float* b, std::size_t kc, float* c, std::size_t ldc,
                         std::size_t rows, std::size_t cols, bool first) {
    vfloat acc[kMr][2] = {};
    for (std::size_t k = 0; k < kc; ++k) {
        const vfloat b0 = load(b + k * kNr);
        const vfloat b1 = load(b + k * kNr + kLanes);
        for (std::size_t i = 0; i < kMr; ++i) {
            const float x = a[k * kMr + i];
            acc[i][0] += x * b0;
            acc[i][1] += x * b1;
        }
    }
    if (rows == kMr && cols == kNr) {
        for (std::size_t i = 0; i < kMr; ++i) {
            float* dst = c + i * ldc;
            if (first) {
                store(dst, acc[i][0]);
                store(dst + kLanes, acc[i][1]);
            } else {
                store(dst, load(dst) + acc[i][0]);
                store(dst + kLanes, load(dst + kLanes) + acc[i][1]);
            }
        }
        return;
    }
    for (std::size_t i = 0; i < rows; ++i) {
        for (std::size_t j = 0; j < cols; ++j) {
            const float v = acc[i][j / kLanes][j % kLanes];
            c[i * ldc + j] = first ? v : c[i * ldc + j] + v;
        }
    }
}

}  // namespace

void MatchConfig::validate() const {
    if (!std::isfinite(cand_threshold)) fail(ErrorCode::InvalidConfig, "cand_threshold must be finite");
    if (nms_radius < 0) fail(ErrorCode::InvalidConfig, "nms_radius must be >= 0");
}

double cosine_similarity(std::span<const float> x, std::span<const float> y) {
    if (x.size() != y.size()) fail(ErrorCode::ShapeMismatch, "cosine of vectors with different lengths");
    double dot = 0.0, xx = 0.0, yy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        dot += static_cast<double>(x[i]) * y[i];
        xx += static_cast<double>(x[i]) * x[i];
        yy += static_cast<double>(y[i]) * y[i];
    }
    if (xx == 0.0 || yy == 0.0) fail(ErrorCode::ZeroVector, "cosine of a zero vector");
    return std::clamp(dot / (std::sqrt(xx) * std::sqrt(yy)), -1.0, 1.0);
}

double cosine_or_floor(std::span<const float> x, std::span<const float> y) {
    try {
        return cosine_similarity(x, y);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::ZeroVector) return -1.0;
        throw;
    }
}

SimilarityMatrix similarity_matrix(const FeatureMap& support, const FeatureMap& query, ExecOptions exec) {
    if (support.channels() != query.channels()) {
        fail(ErrorCode::ChannelMismatch, "support has " + std::to_string(support.channels()) +
                                             " channels, query has " + std::to_string(query.channels()));
    }
    const PackedPanels ps = pack_normalized(support, kMr, exec);
    const PackedPanels pq = pack_normalized(query, kNr, exec);
    const std::size_t rows = ps.cells, cols = pq.cells, depth = ps.depth;
    SimilarityMatrix out(rows, cols);
    float* c = out.values().data();

    // Each worker owns whole query panels and every entry is accumulated in
    // the same k order, so results do not depend on the worker count.
    parallel_for(pq.panels(), exec, [&](std::size_t q0, std::size_t q1) {
        for (std::size_t k0 = 0; k0 < depth; k0 += kKc) {
            const std::size_t kc = std::min(kKc, depth - k0);
            for (std::size_t s0 = 0; s0 < ps.panels(); s0 += kMc / kMr) {
                const std::size_t s1 = std::min(s0 + kMc / kMr, ps.panels());
                for (std::size_t qp = q0; qp < q1; ++qp) {
                    const float* b = pq.panel(qp, k0);
                    const std::size_t j0 = qp * kNr, nc = std::min(kNr, cols - j0);
                    for (std::size_t sp = s0; sp < s1; ++sp) {
                        const std::size_t i0 = sp * kMr, nr = std::min(kMr, rows - i0);
                        micro_kernel(ps.panel(sp, k0), b, kc, c + i0 * cols + j0, cols, nr, nc, k0 == 0);
                    }
                }
            }
        }
        for (std::size_t i = 0; i < rows; ++i) {
            float* row = c + i * cols;
            for (std::size_t j = q0 * kNr; j < std::min(q1 * kNr, cols); ++j) {
                row[j] = (ps.zero[i] || pq.zero[j]) ? -1.0f : std::clamp(row[j], -1.0f, 1.0f);
            }
        }
    });
    return out;
}

std::vector<std::size_t> best_prototypes(const SimilarityMatrix& s) {
    const std::size_t pq = s.query_cells();
    std::vector<std::size_t> best(pq, 0);
    if (s.support_cells() == 0) return best;
    std::vector<float> best_val(s.values().begin(), s.values().begin() + static_cast<std::ptrdiff_t>(pq));
    for (std::size_t i = 1; i < s.support_cells(); ++i) {
        for (std::size_t j = 0; j < pq; ++j) {
            const float v = s.at(i, j);
            if (v > best_val[j]) {
                best_val[j] = v;
                best[j] = i;
            }
        }
    }
    return best;
}

std::vector<CandidateKeypoint> nms(std::vector<CandidateKeypoint> cands, int radius) {
    std::stable_sort(cands.begin(), cands.end(), [](const auto& a, const auto& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.direct != b.direct) return a.direct;
        return a.flat < b.flat;
    });
    std::vector<CandidateKeypoint> kept;
    const auto r = static_cast<std::size_t>(std::max(radius, 0));
    for (const auto& c : cands) {
        const bool suppressed = std::any_of(kept.begin(), kept.end(),
                                            [&](const auto& k) { return chebyshev(k.cell, c.cell) <= r; });
        if (!suppressed) kept.push_back(c);
    }
    return kept;
}

std::vector<CandidateKeypoint> extract_candidates(const PrototypeStore& store,
                                                  const FeatureMap& query_enhanced,
                                                  const SimilarityMatrix& s, const MatchConfig& cfg) {
    cfg.validate();
    const FeatureMap& support = store.enhanced_support();
    if (query_enhanced.channels() != support.channels()) {
        fail(ErrorCode::ChannelMismatch, "store expects " + std::to_string(support.channels()) +
                                             " channels, query has " +
                                             std::to_string(query_enhanced.channels()));
    }
    if (s.support_cells() != support.cell_count() || s.query_cells() != query_enhanced.cell_count()) {
        fail(ErrorCode::ShapeMismatch, "similarity matrix does not match the maps");
    }

    // support cell -> identities it votes for
    std::map<std::size_t, std::vector<std::pair<int, bool>>> votes;
    for (const auto& kp : store.keypoints()) {
        votes[kp.cell.flat(support.cols())].emplace_back(kp.id, true);
        for (const auto& adj : kp.adjacent_cells) votes[adj.flat(support.cols())].emplace_back(kp.id, false);
    }

    const auto bpp = best_prototypes(s);
    std::vector<std::vector<CandidateKeypoint>> per_id(store.keypoint_count());
    for (std::size_t j = 0; j < bpp.size(); ++j) {
        const auto it = votes.find(bpp[j]);
        if (it == votes.end()) continue;
        // Rescore the winning pair in double so identical descriptors score exactly 1.
        const auto score = static_cast<float>(cosine_or_floor(support.cell(bpp[j]), query_enhanced.cell(j)));
        if (!(score > cfg.cand_threshold)) continue;
        for (const auto& [id, direct] : it->second) {
            per_id[static_cast<std::size_t>(id - 1)].push_back(
                {id, query_enhanced.index_of(j), j, score, bpp[j], direct});
        }
    }

    std::vector<CandidateKeypoint> out;
    for (auto& group : per_id) {
        // Several adjacency votes of one identity may land on the same query cell.
        std::sort(group.begin(), group.end(), [](const auto& a, const auto& b) {
            return a.flat != b.flat ? a.flat < b.flat : a.direct > b.direct;
        });
        group.erase(std::unique(group.begin(), group.end(),
                                [](const auto& a, const auto& b) { return a.flat == b.flat; }),
                    group.end());
        auto kept = nms(std::move(group), cfg.nms_radius);
        out.insert(out.end(), kept.begin(), kept.end());
    }
    return out;
}

std::vector<CandidateKeypoint> extract_candidates(const PrototypeStore& store,
                                                  const FeatureMap& query_enhanced,
                                                  const MatchConfig& cfg, ExecOptions exec) {
    cfg.validate();
    if (query_enhanced.channels() != store.binned_channels()) {
        fail(ErrorCode::ChannelMismatch, "store expects " + std::to_string(store.binned_channels()) +
                                             " channels, query has " +
                                             std::to_string(query_enhanced.channels()));
    }
    return extract_candidates(store, query_enhanced,
                              similarity_matrix(store.enhanced_support(), query_enhanced, exec), cfg);
}

}  // namespace okp
