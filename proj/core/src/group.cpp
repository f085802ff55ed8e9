#include "okp/group.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "okp/error.hpp"

namespace okp {

void GroupConfig::validate() const {
    if (!(tau_e >= -1.0 && tau_e <= 1.0)) fail(ErrorCode::InvalidConfig, "tau_e must lie in [-1, 1]");
    if (min_keypoints_override && *min_keypoints_override < 1) {
        fail(ErrorCode::InvalidConfig, "min keypoints must be >= 1");
    }
}

double edge_similarity(const EdgeDescriptor& candidate, const EdgeDescriptor& prototype) {
    if (candidate.segments() != prototype.segments() || candidate.channels() != prototype.channels() ||
        candidate.segments() == 0) {
        fail(ErrorCode::ShapeMismatch, "edge descriptors differ in shape");
    }
    double sum = 0.0;
    for (std::size_t m = 0; m < candidate.segments(); ++m) {
        sum += cosine_or_floor(candidate.segment(m), prototype.segment(m));
    }
    return sum / static_cast<double>(candidate.segments());
}

InstanceGraph build_initial_graph(const std::vector<CandidateKeypoint>& cands,
                                  const PrototypeStore& store, const FeatureMap& query_enhanced,
                                  ExecOptions exec) {
    InstanceGraph g;
    g.vertices = cands;
    struct Pending {
        std::size_t a, b;
        const EdgePrototype* proto;
    };
    std::vector<Pending> pending;
    for (std::size_t a = 0; a < cands.size(); ++a) {
        for (std::size_t b = a + 1; b < cands.size(); ++b) {
            if (cands[a].identity == cands[b].identity) continue;
            if (const auto* proto = store.edge(cands[a].identity, cands[b].identity)) {
                pending.push_back({a, b, proto});
            }
        }
    }
    g.edges.resize(pending.size());
    parallel_for(pending.size(), exec, [&](std::size_t e0, std::size_t e1) {
        for (std::size_t e = e0; e < e1; ++e) {
            const auto& p = pending[e];
            // Oriented from the lower identity, like the prototype.
            const bool forward = cands[p.a].identity < cands[p.b].identity;
            const GridIndex from = forward ? cands[p.a].cell : cands[p.b].cell;
            const GridIndex to = forward ? cands[p.b].cell : cands[p.a].cell;
            const auto desc = edge_descriptor(query_enhanced, from, to, store.n_seg());
            g.edges[e] = {p.a, p.b, edge_similarity(desc, p.proto->segments)};
        }
    });
    return g;
}

InstanceGraph prune(const InstanceGraph& graph, const GroupConfig& cfg) {
    cfg.validate();
    InstanceGraph out;
    out.vertices = graph.vertices;

    std::vector<GraphEdge> strong;
    for (const auto& e : graph.edges) {
        if (e.similarity >= cfg.tau_e) strong.push_back(e);
    }

    // Is `e` preferable to `f` as the edge from `v` towards one identity?
    const auto better = [&](const GraphEdge& e, const GraphEdge& f, std::size_t v) {
        if (e.similarity != f.similarity) return e.similarity > f.similarity;
        const std::size_t oe = e.a == v ? e.b : e.a;
        const std::size_t of = f.a == v ? f.b : f.a;
        const auto& ve = graph.vertices[oe];
        const auto& vf = graph.vertices[of];
        if (ve.flat != vf.flat) return ve.flat < vf.flat;
        return oe < of;
    };
    std::vector<std::vector<std::size_t>> incident(graph.vertices.size());
    for (std::size_t i = 0; i < strong.size(); ++i) {
        incident[strong[i].a].push_back(i);
        incident[strong[i].b].push_back(i);
    }
    const auto strongest_at = [&](std::size_t ei, std::size_t v) {
        const GraphEdge& e = strong[ei];
        const int id = graph.vertices[e.a == v ? e.b : e.a].identity;
        for (std::size_t fi : incident[v]) {
            if (fi == ei) continue;
            const GraphEdge& f = strong[fi];
            const std::size_t of = f.a == v ? f.b : f.a;
            if (graph.vertices[of].identity == id && better(f, e, v)) return false;
        }
        return true;
    };
    for (std::size_t i = 0; i < strong.size(); ++i) {
        if (strongest_at(i, strong[i].a) && strongest_at(i, strong[i].b)) out.edges.push_back(strong[i]);
    }
    return out;
}

std::vector<Component> connected_components(const InstanceGraph& graph) {
    const std::size_t n = graph.vertices.size();
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    const auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (const auto& e : graph.edges) {
        const std::size_t ra = find(e.a), rb = find(e.b);
        if (ra != rb) parent[std::max(ra, rb)] = std::min(ra, rb);
    }

    std::vector<Component> comps;
    std::vector<std::size_t> slot(n, n);
    for (std::size_t v = 0; v < n; ++v) {
        const std::size_t r = find(v);
        if (slot[r] == n) {
            slot[r] = comps.size();
            comps.emplace_back();
        }
        comps[slot[r]].vertices.push_back(v);
    }
    for (std::size_t e = 0; e < graph.edges.size(); ++e) {
        comps[slot[find(graph.edges[e].a)]].edges.push_back(e);
    }

    const auto key = [&](const Component& c) {
        std::size_t best = c.vertices.front();
        for (std::size_t v : c.vertices) {
            const auto& x = graph.vertices[v];
            const auto& y = graph.vertices[best];
            if (x.flat < y.flat || (x.flat == y.flat && v < best)) best = v;
        }
        return std::pair{graph.vertices[best].flat, best};
    };
    std::sort(comps.begin(), comps.end(), [&](const auto& x, const auto& y) { return key(x) < key(y); });
    return comps;
}

int min_keypoints(std::size_t n_kp, std::optional<int> override_count) {
    if (override_count) return *override_count;
    if (n_kp <= 4) return std::max(2, static_cast<int>(n_kp) - 1);
    return 4;
}

std::vector<Instance> assemble_instances(const InstanceGraph& graph,
                                         const std::vector<Component>& components,
                                         std::size_t n_kp, const GroupConfig& cfg) {
    cfg.validate();
    const int needed = min_keypoints(n_kp, cfg.min_keypoints_override);
    std::vector<Instance> out;
    for (const auto& comp : components) {
        std::vector<double> total(graph.vertices.size(), 0.0);
        for (std::size_t e : comp.edges) {
            total[graph.edges[e].a] += graph.edges[e].similarity;
            total[graph.edges[e].b] += graph.edges[e].similarity;
        }
        // One vertex per identity: strongest total edge similarity wins.
        std::vector<std::size_t> chosen;
        for (std::size_t v : comp.vertices) {
            const auto& cv = graph.vertices[v];
            const auto same = std::find_if(chosen.begin(), chosen.end(), [&](std::size_t u) {
                return graph.vertices[u].identity == cv.identity;
            });
            if (same == chosen.end()) {
                chosen.push_back(v);
                continue;
            }
            const auto& cu = graph.vertices[*same];
            const bool wins = total[v] != total[*same] ? total[v] > total[*same]
                              : cv.score != cu.score   ? cv.score > cu.score
                                                       : cv.flat < cu.flat;
            if (wins) *same = v;
        }
        if (static_cast<int>(chosen.size()) < needed) continue;

        Instance inst;
        for (std::size_t v : chosen) {
            const auto& c = graph.vertices[v];
            inst.keypoints.push_back({c.identity, c.cell, c.score});
        }
        std::sort(inst.keypoints.begin(), inst.keypoints.end(),
                  [](const auto& a, const auto& b) { return a.identity < b.identity; });
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t e : comp.edges) {
            const auto& edge = graph.edges[e];
            const bool inside = std::find(chosen.begin(), chosen.end(), edge.a) != chosen.end() &&
                                std::find(chosen.begin(), chosen.end(), edge.b) != chosen.end();
            if (inside) {
                sum += edge.similarity;
                ++count;
            }
        }
        inst.cohesion = count ? sum / static_cast<double>(count) : 0.0;
        out.push_back(std::move(inst));
    }
    return out;
}

std::vector<Instance> group_candidates(const std::vector<CandidateKeypoint>& cands,
                                       const PrototypeStore& store, const FeatureMap& query_enhanced,
                                       const GroupConfig& cfg, ExecOptions exec) {
    cfg.validate();
    const InstanceGraph pruned = prune(build_initial_graph(cands, store, query_enhanced, exec), cfg);
    return assemble_instances(pruned, connected_components(pruned), store.keypoint_count(), cfg);
}

}  // namespace okp
