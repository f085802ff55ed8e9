#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "okp/feature_map.hpp"
#include "okp/match.hpp"
#include "okp/parallel.hpp"
#include "okp/prototype.hpp"

namespace okp {

struct GroupConfig {
    double tau_e = 0.3;
    std::optional<int> min_keypoints_override;

    void validate() const;
};

struct GraphEdge {
    std::size_t a = 0;  // vertex indices, a < b
    std::size_t b = 0;
    double similarity = 0.0;

    bool operator==(const GraphEdge&) const = default;
};

struct InstanceGraph {
    std::vector<CandidateKeypoint> vertices;
    std::vector<GraphEdge> edges;

    bool operator==(const InstanceGraph&) const = default;
};

/// Vertex and edge indices (into the owning graph) of one connected piece.
struct Component {
    std::vector<std::size_t> vertices;
    std::vector<std::size_t> edges;
};

struct InstanceKeypoint {
    int identity = 0;
    GridIndex cell;
    float score = 0.0f;

    bool operator==(const InstanceKeypoint&) const = default;
};

struct Instance {
    std::vector<InstanceKeypoint> keypoints;  // one per identity, ascending
    double cohesion = 0.0;                    // mean similarity of internal edges

    bool operator==(const Instance&) const = default;
};

/// Mean per-segment cosine; zero-norm segments count as -1.
double edge_similarity(const EdgeDescriptor& candidate, const EdgeDescriptor& prototype);

/// Links every pair of candidates with different identities whose identity
/// pair has an edge prototype, scored against that prototype.
InstanceGraph build_initial_graph(const std::vector<CandidateKeypoint>& cands,
                                  const PrototypeStore& store, const FeatureMap& query_enhanced,
                                  ExecOptions exec = {});

/// Drops edges below tau_e, then keeps, for every vertex and neighbor
/// identity, only the strongest edge. An edge survives step two only if it is
/// the strongest at both of its endpoints.
InstanceGraph prune(const InstanceGraph& graph, const GroupConfig& cfg);

/// Ordered by the smallest query flat index they contain.
std::vector<Component> connected_components(const InstanceGraph& graph);

/// Minimum keypoints for an instance to survive.
int min_keypoints(std::size_t n_kp, std::optional<int> override_count = std::nullopt);

std::vector<Instance> assemble_instances(const InstanceGraph& graph,
                                         const std::vector<Component>& components,
                                         std::size_t n_kp, const GroupConfig& cfg);

/// build -> prune -> components -> assemble.
std::vector<Instance> group_candidates(const std::vector<CandidateKeypoint>& cands,
                                       const PrototypeStore& store, const FeatureMap& query_enhanced,
                                       const GroupConfig& cfg, ExecOptions exec = {});

}  // namespace okp
