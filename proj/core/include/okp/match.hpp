#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "okp/feature_map.hpp"
#include "okp/parallel.hpp"
#include "okp/prototype.hpp"

namespace okp {

struct MatchConfig {
    double cand_threshold = 0.0;  // candidates need score > this
    int nms_radius = 2;           // Chebyshev, in cells

    void validate() const;
};

struct CandidateKeypoint {
    int identity = 0;
    GridIndex cell;          // query grid
    std::size_t flat = 0;    // query flat index
    float score = 0.0f;      // cosine to the matched support cell
    std::size_t support_flat = 0;
    bool direct = false;     // matched the keypoint cell itself, not a neighbor

    bool operator==(const CandidateKeypoint&) const = default;
};

/// Cosine similarity. Throws ShapeMismatch on length mismatch and ZeroVector
/// when either input has zero norm.
double cosine_similarity(std::span<const float> x, std::span<const float> y);

/// As above, but a zero-norm input yields -1.
double cosine_or_floor(std::span<const float> x, std::span<const float> y);

/// Dense support x query cosine matrix, row-major by support cell.
class SimilarityMatrix {
public:
    SimilarityMatrix() = default;
    SimilarityMatrix(std::size_t support_cells, std::size_t query_cells)
        : rows_(support_cells), cols_(query_cells), values_(support_cells * query_cells, 0.0f) {}

    std::size_t support_cells() const noexcept { return rows_; }
    std::size_t query_cells() const noexcept { return cols_; }

    float at(std::size_t support, std::size_t query) const noexcept { return values_[support * cols_ + query]; }
    float& at(std::size_t support, std::size_t query) noexcept { return values_[support * cols_ + query]; }

    std::span<const float> values() const noexcept { return values_; }
    std::span<float> values() noexcept { return values_; }

    bool operator==(const SimilarityMatrix&) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<float> values_;
};

/// Pre-normalizes both maps and evaluates all dot products with a
/// register-blocked kernel. Entries touching a zero-norm cell are -1.
/// Throws ChannelMismatch.
SimilarityMatrix similarity_matrix(const FeatureMap& support, const FeatureMap& query,
                                   ExecOptions exec = {});

/// Per query column, the support row with the largest similarity (first on ties).
std::vector<std::size_t> best_prototypes(const SimilarityMatrix& s);

/// Greedy per-identity suppression. Candidates are visited by descending
/// score, then direct matches first, then ascending flat index; a candidate is
/// kept unless it lies within `radius` of an already-kept one.
std::vector<CandidateKeypoint> nms(std::vector<CandidateKeypoint> cands, int radius);

/// Best-prototype-pair candidates for every keypoint identity, after the
/// score threshold and per-identity NMS. Sorted by identity, then keep order.
std::vector<CandidateKeypoint> extract_candidates(const PrototypeStore& store,
                                                  const FeatureMap& query_enhanced,
                                                  const MatchConfig& cfg, ExecOptions exec = {});

/// Same, reusing a precomputed similarity matrix.
std::vector<CandidateKeypoint> extract_candidates(const PrototypeStore& store,
                                                  const FeatureMap& query_enhanced,
                                                  const SimilarityMatrix& s, const MatchConfig& cfg);

}  // namespace okp
