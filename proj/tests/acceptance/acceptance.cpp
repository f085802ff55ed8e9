// Acceptance suite: one PASS/FAIL line per primary criterion.
// Every tolerance used below is pinned in the constants block.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "okp/detection.hpp"
#include "okp/enhance.hpp"
#include "okp/error.hpp"
#include "okp/evalkit.hpp"
#include "okp/group.hpp"
#include "okp/match.hpp"
#include "okp/okpf.hpp"
#include "okp/pipeline.hpp"
#include "okp/prototype.hpp"
#include "okp/synth.hpp"
#include "oracles.hpp"

using namespace okp;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances and budgets.
constexpr double kMatchTolerance = 1e-4;
constexpr double kMatchBudgetSec = 10.0;
constexpr int kMatchPairs = 100;
constexpr int kEnhanceMaps = 50;
constexpr double kSynthBudgetSec = 60.0;
constexpr int kNoiseSeeds = 20;
constexpr double kNoiseLevel = 0.1;
constexpr double kNoisyMinRecallKp = 0.9;
constexpr double kNoisyMinPrecisionIns = 0.9;
constexpr double kSelfQueryMinScore = 0.999;
constexpr double kFullScaleBudgetSec = 30.0;
constexpr double kCiScaleBudgetSec = 2.0;
constexpr double kMetricExact = 1e-12;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(const char* name, bool pass, const std::string& detail) {
    std::printf("%s  %-34s %s\n", pass ? "PASS" : "FAIL", name, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

void guarded(const char* name, const std::function<void()>& body) {
    try {
        body();
    } catch (const std::exception& e) {
        report(name, false, std::string("exception: ") + e.what());
    }
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// ---------------------------------------------------------------------------

void matching_oracle() {
    std::mt19937_64 rng(20240611);
    double worst = 0.0;
    std::size_t argmax_mismatch = 0, columns = 0;
    const auto t0 = Clock::now();
    for (int t = 0; t < kMatchPairs; ++t) {
        const std::size_t d = 1 + rng() % 32;
        const FeatureMap s = test::random_map(1 + rng() % 16, 1 + rng() % 16, d, rng());
        const FeatureMap q = test::random_map(1 + rng() % 16, 1 + rng() % 16, d, rng());
        const SimilarityMatrix got = similarity_matrix(s, q);
        const auto want = test::naive_similarity(s, q);
        for (std::size_t i = 0; i < want.size(); ++i) worst = std::max(worst, std::fabs(got.values()[i] - want[i]));
        const auto bpp = best_prototypes(got);
        const auto ref = test::naive_argmax_columns(want, s.cell_count(), q.cell_count());
        for (std::size_t j = 0; j < ref.size(); ++j) argmax_mismatch += bpp[j] != ref[j];
        columns += ref.size();
    }
    const double secs = seconds_since(t0);
    report("matching oracle", worst < kMatchTolerance && argmax_mismatch == 0 && secs < kMatchBudgetSec,
           fmt("%d pairs, max |err| %.2e (< %.0e), argmax mismatches %zu/%zu, %.2f s (< %.0f s)", kMatchPairs,
               worst, kMatchTolerance, argmax_mismatch, columns, secs, kMatchBudgetSec));
}

// Literal attention -> pooling -> gather, sharing no code with the library.
FeatureMap brute_force_enhance(const FeatureMap& m, double alpha, int spacing) {
    const long rows = static_cast<long>(m.rows()), cols = static_cast<long>(m.cols());
    const std::size_t d = m.channels();
    std::vector<double> o(m.cell_count());
    for (std::size_t i = 0; i < m.cell_count(); ++i) {
        double sum = 0.0;
        for (std::size_t k = 0; k < d; ++k) sum += std::fabs(static_cast<double>(m.data()[i * d + k]));
        o[i] = sum / static_cast<double>(d);
    }
    const double lo = *std::min_element(o.begin(), o.end()), hi = *std::max_element(o.begin(), o.end());
    std::vector<float> att(m.data().begin(), m.data().end());
    for (std::size_t i = 0; i < m.cell_count(); ++i) {
        const double a = hi > lo ? 2.0 * (o[i] - lo) / (hi - lo) - 1.0 : 0.0;
        const double s = 1.0 / (1.0 + std::exp(-alpha * a));
        for (std::size_t k = 0; k < d; ++k) att[i * d + k] = static_cast<float>(static_cast<double>(att[i * d + k]) * s);
    }
    const auto at = [&](const std::vector<float>& v, long r, long c, std::size_t k) {
        r = std::clamp(r, 0L, rows - 1);
        c = std::clamp(c, 0L, cols - 1);
        return v[(static_cast<std::size_t>(r) * m.cols() + static_cast<std::size_t>(c)) * d + k];
    };
    std::vector<float> pool(att.size());
    for (long r = 0; r < rows; ++r) {
        for (long c = 0; c < cols; ++c) {
            for (std::size_t k = 0; k < d; ++k) {
                double acc = 0.0;
                for (long dr = -1; dr <= 1; ++dr) {
                    for (long dc = -1; dc <= 1; ++dc) acc += at(att, r + dr, c + dc, k);
                }
                pool[(static_cast<std::size_t>(r) * m.cols() + static_cast<std::size_t>(c)) * d + k] =
                    static_cast<float>(acc * (1.0 / 9.0));
            }
        }
    }
    const long offs[8][2] = {{-1, -1}, {-1, 0}, {-1, 1}, {0, -1}, {0, 1}, {1, -1}, {1, 0}, {1, 1}};
    std::vector<float> out;
    for (long r = 0; r < rows; ++r) {
        for (long c = 0; c < cols; ++c) {
            for (std::size_t k = 0; k < d; ++k) out.push_back(at(att, r, c, k));
            for (const auto& of : offs) {
                for (std::size_t k = 0; k < d; ++k) out.push_back(at(att, r + of[0], c + of[1], k));
            }
            for (const auto& of : offs) {
                for (std::size_t k = 0; k < d; ++k) out.push_back(at(pool, r + of[0] * spacing, c + of[1] * spacing, k));
            }
        }
    }
    return FeatureMap(m.rows(), m.cols(), 17 * d, std::move(out), m.geometry());
}

void enhancement_oracle() {
    std::mt19937_64 rng(99);
    std::size_t interior = 0, mismatched = 0, bad_width = 0, border_mismatch = 0;
    for (int t = 0; t < kEnhanceMaps; ++t) {
        const std::size_t rows = 1 + rng() % 12, cols = 1 + rng() % 12, d = 1 + rng() % 8;
        const FeatureMap m = test::random_map(rows, cols, d, rng(), -2.0, 2.0);
        const FeatureMap got = enhance(m, EnhanceConfig{});
        const FeatureMap want = brute_force_enhance(m, 5.0, 3);
        bad_width += got.channels() != 17 * d;
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cols; ++c) {
                const auto x = got.cell(r, c), y = want.cell(r, c);
                const bool same = std::memcmp(x.data(), y.data(), x.size_bytes()) == 0;
                const bool inner = r >= 4 && c >= 4 && r + 4 < rows && c + 4 < cols;
                if (inner) {
                    ++interior;
                    mismatched += !same;
                } else {
                    border_mismatch += !same;
                }
            }
        }
    }
    report("enhancement oracle", mismatched == 0 && bad_width == 0 && interior > 0,
           fmt("%d maps, %zu interior cells, %zu not bit-exact (border: %zu), D_B != 17D in %zu", kEnhanceMaps,
               interior, mismatched, border_mismatch, bad_width));
}

// ---------------------------------------------------------------------------

struct Outcome {
    std::size_t instances = 0;
    EvalResult eval;
};

Outcome run_synth(const SynthParams& p, ExtractConfig cfg = {}, LearnConfig lcfg = {}) {
    const SynthFixture fx = generate_fixture(p);
    const auto store = learn_prototypes(fx.support, fx.annotation, lcfg);
    const auto r = extract(store, fx.query, cfg, "query");
    return {r.instances.size(),
            score_image(r.detections, fx.ground_truth, min_keypoints(store.keypoint_count()),
                        static_cast<int>(store.keypoint_count()))};
}

void constants_fidelity() {
    std::vector<std::string> bad;
    const auto expect = [&](bool ok, const char* what) {
        if (!ok) bad.emplace_back(what);
    };

    // Objectness attention sharpness alpha = 5.
    const EnhanceConfig ec;
    expect(ec.alpha == 5.0, "alpha default");
    expect(std::fabs(attention_scale(1.0, ec.alpha) - 0.9933071490757153) < 1e-12, "sigmoid(5)");
    {
        const FeatureMap m = test::random_map(8, 8, 4, 3);
        EnhanceConfig soft = ec;
        soft.alpha = 1.0;
        expect(!(enhance(m, soft) == enhance(m, ec)), "alpha override changes the enhanced map");
    }

    // Edge rejection threshold tau_E = 0.3.
    const GroupConfig gc;
    expect(gc.tau_e == 0.3, "tau_e default");
    {
        InstanceGraph g;
        g.vertices.resize(2);
        g.vertices[0].identity = 1;
        g.vertices[1].identity = 2;
        g.vertices[1].flat = 9;
        g.edges = {{0, 1, 0.25}};
        expect(prune(g, gc).edges.empty(), "phi 0.25 rejected at tau_e 0.3");
        expect(prune(g, GroupConfig{0.2, std::nullopt}).edges.size() == 1, "tau_e override keeps phi 0.25");
    }

    // Candidate threshold 0.0: strictly positive scores only.
    const MatchConfig mc;
    expect(mc.cand_threshold == 0.0, "cand_threshold default");
    {
        const FeatureMap support = test::random_map(10, 10, 4, 5, 0.1, 1.0);
        const FeatureMap query = test::random_map(10, 10, 4, 6, -1.0, -0.1);
        Annotation a;
        a.keypoints = {{1, 2, 2}, {2, 7, 7}};
        const auto store = learn_prototypes(support, a);
        const auto q = enhance(query, EnhanceConfig{});
        MatchConfig loose;
        loose.cand_threshold = -1.0;
        expect(extract_candidates(store, q, mc).empty(), "all-negative scores give no candidates");
        expect(!extract_candidates(store, q, loose).empty(), "cand_threshold override admits them");
    }

    // Edge sub-segments N_SEG = 8.
    const LearnConfig lc;
    expect(lc.n_seg == 8, "n_seg default");
    {
        const FeatureMap support = test::random_map(12, 12, 3, 8);
        Annotation a;
        a.keypoints = {{1, 1, 1}, {2, 10, 9}};
        const auto store8 = learn_prototypes(support, a);
        LearnConfig four = lc;
        four.n_seg = 4;
        const auto store4 = learn_prototypes(support, a, four);
        expect(store8.edges()[0].segments.segments() == 8, "8 descriptors per edge");
        expect(store4.edges()[0].segments.segments() == 4, "n_seg override gives 4 descriptors");
    }

    // Minimum keypoints: max(2, N_KP - 1) up to four keypoints, else 4.
    expect(min_keypoints(2) == 2 && min_keypoints(3) == 2 && min_keypoints(4) == 3, "min rule, N_KP <= 4");
    expect(min_keypoints(5) == 4 && min_keypoints(7) == 4 && min_keypoints(17) == 4, "min rule, N_KP > 4");
    {
        SynthParams p;
        p.instances = 2;
        ExtractConfig strict;
        strict.group.min_keypoints_override = 5;
        expect(run_synth(p).instances == 2, "default rule keeps 4-keypoint instances");
        expect(run_synth(p, strict).instances == 0, "min_keypoints override drops them");
    }

    std::string detail = "alpha=5 tau_e=0.3 cand_threshold=0.0 n_seg=8 min=max(2,N_KP-1)|4; overrides effective";
    if (!bad.empty()) {
        detail = "failed:";
        for (const auto& b : bad) detail += " [" + b + "]";
    }
    report("constants fidelity", bad.empty(), detail);
}

void synthetic_end_to_end() {
    const auto t0 = Clock::now();
    bool clean_ok = true;
    std::string clean_detail;
    for (int m : {1, 2, 3}) {
        for (std::uint64_t seed : {7u, 11u, 13u}) {
            SynthParams p;
            p.instances = m;
            p.seed = seed;
            const Outcome o = run_synth(p);
            const bool ok = o.instances == static_cast<std::size_t>(m) && o.eval.r_kp == 1.0 && o.eval.p_kp == 1.0 &&
                            o.eval.r_ins == 1.0 && o.eval.p_ins == 1.0;
            if (!ok) clean_detail += fmt(" M=%d/seed=%llu->%zu", m, static_cast<unsigned long long>(seed), o.instances);
            clean_ok = clean_ok && ok;
        }
    }
    double sum_r = 0, sum_p = 0, min_r = 1, min_p = 1;
    for (int s = 0; s < kNoiseSeeds; ++s) {
        SynthParams p;
        p.instances = 1 + s % 3;
        p.seed = 1000 + static_cast<std::uint64_t>(s);
        p.noise = kNoiseLevel;
        const Outcome o = run_synth(p);
        sum_r += o.eval.r_kp;
        sum_p += o.eval.p_ins;
        min_r = std::min(min_r, o.eval.r_kp);
        min_p = std::min(min_p, o.eval.p_ins);
    }
    const double mean_r = sum_r / kNoiseSeeds, mean_p = sum_p / kNoiseSeeds;
    const double secs = seconds_since(t0);
    const bool noisy_ok = mean_r >= kNoisyMinRecallKp && mean_p >= kNoisyMinPrecisionIns;
    report("synthetic end-to-end", clean_ok && noisy_ok && secs < kSynthBudgetSec,
           fmt("noise 0: 9/9 runs exact%s%s; noise %.2f x RMS over %d seeds: mean R_KP %.3f (min %.3f), "
               "mean P_INS %.3f (min %.3f); %.1f s (< %.0f s)",
               clean_ok ? "" : " FAILED:", clean_detail.c_str(), kNoiseLevel, kNoiseSeeds, mean_r, min_r, mean_p,
               min_p, secs, kSynthBudgetSec));
}

void self_query() {
    const fs::path dir = fs::temp_directory_path() / "okp_acceptance_self";
    fs::create_directories(dir);
    SynthParams p;
    p.keypoints = 6;
    const SynthFixture fx = generate_fixture(p);
    write_feature_file(fx.support, dir / "support.okpf");
    const FeatureMap support = read_feature_file(dir / "support.okpf");
    const auto store = learn_prototypes(support, fx.annotation);
    const auto r = extract(store, read_feature_file(dir / "support.okpf"), ExtractConfig{}, "support");
    fs::remove_all(dir);

    bool ok = r.instances.size() == 1;
    float worst = 1.0f;
    std::size_t at_annotated = 0;
    if (ok) {
        for (const auto& k : r.instances[0].keypoints) {
            worst = std::min(worst, k.score);
            at_annotated += k.cell == store.keypoint(k.identity).cell;
        }
        ok = r.instances[0].keypoints.size() == store.keypoint_count() && at_annotated == store.keypoint_count() &&
             worst >= kSelfQueryMinScore;
    }
    report("self-query identity", ok,
           fmt("%zu instance(s), %zu/%zu keypoints at annotated cells, min score %.6f (>= %.3f)", r.instances.size(),
               at_annotated, store.keypoint_count(), static_cast<double>(worst), kSelfQueryMinScore));
}

// Two planted instances plus a decoy: the 3x3 neighborhood of keypoint 1
// pasted onto open background. It looks like keypoint 1 locally but carries
// none of the object around it, so it has no edge worth keeping.
bool grouping_case(std::uint64_t seed, std::string& detail) {
    SynthParams p;
    p.instances = 2;
    p.seed = seed;
    const SynthFixture fx = generate_fixture(p);
    const GridIndex kp1 = fx.keypoint_offsets[0];
    // Decoy centre: the background cell farthest from the borders and from
    // every planted copy, so nothing but the pasted context surrounds it.
    const long half = 1, grid = p.grid, side = p.object_size;
    const GridIndex src{fx.support_origin.row + kp1.row, fx.support_origin.col + kp1.col};
    GridIndex dst{};
    long clearance = -1;
    for (long r = 0; r < grid; ++r) {
        for (long c = 0; c < grid; ++c) {
            long room = std::min({r, c, grid - 1 - r, grid - 1 - c});
            for (const auto& o : fx.placements) {
                const long orow = static_cast<long>(o.row), ocol = static_cast<long>(o.col);
                const long dr = std::max({orow - r, r - (orow + side - 1), 0L});
                const long dc = std::max({ocol - c, c - (ocol + side - 1), 0L});
                room = std::min(room, std::max(dr, dc));
            }
            if (room > clearance) {
                clearance = room;
                dst = {static_cast<std::size_t>(r), static_cast<std::size_t>(c)};
            }
        }
    }
    if (clearance < half + 3) {
        detail += fmt(" seed %llu: decoy clearance %ld < %ld cells;", static_cast<unsigned long long>(seed), clearance,
                      half + 3);
        return false;
    }
    std::vector<float> q(fx.query.data().begin(), fx.query.data().end());
    const std::size_t d = fx.query.channels();
    for (long dr = -half; dr <= half; ++dr) {
        for (long dc = -half; dc <= half; ++dc) {
            const auto from = fx.support.cell(static_cast<std::size_t>(static_cast<long>(src.row) + dr),
                                              static_cast<std::size_t>(static_cast<long>(src.col) + dc));
            const std::size_t to = (static_cast<std::size_t>(static_cast<long>(dst.row) + dr) * fx.query.cols() +
                                    static_cast<std::size_t>(static_cast<long>(dst.col) + dc)) * d;
            std::copy(from.begin(), from.end(), q.begin() + static_cast<long>(to));
        }
    }
    const FeatureMap query(fx.query.rows(), fx.query.cols(), d, std::move(q), fx.query.geometry());

    const auto store = learn_prototypes(fx.support, fx.annotation);
    const auto r = extract(store, query, ExtractConfig{}, "query");
    bool decoy_candidate = false;
    float decoy_score = 0.0f;
    for (const auto& c : r.candidates) {
        if (c.identity == 1 && c.cell == dst) {
            decoy_candidate = true;
            decoy_score = c.score;
        }
    }
    bool decoy_in_instance = false;
    for (const auto& inst : r.instances) {
        for (const auto& k : inst.keypoints) decoy_in_instance |= k.cell == dst;
    }
    // After pruning the decoy's component must be too small to pass the
    // minimum-keypoint rule: that rule, not anything else, removes it.
    const FeatureMap z = enhance(query, store.config().enhance);
    const InstanceGraph pruned = prune(build_initial_graph(r.candidates, store, z), GroupConfig{});
    std::size_t decoy_edges = 0, decoy_component = 0;
    for (const auto& edge : pruned.edges) {
        decoy_edges += pruned.vertices[edge.a].cell == dst || pruned.vertices[edge.b].cell == dst;
    }
    for (const auto& comp : connected_components(pruned)) {
        const bool has_decoy = std::any_of(comp.vertices.begin(), comp.vertices.end(),
                                           [&](std::size_t v) { return pruned.vertices[v].cell == dst; });
        if (has_decoy) decoy_component = comp.vertices.size();
    }
    const auto e = score_image(r.detections, fx.ground_truth, min_keypoints(4), 4);
    const bool ok = decoy_candidate && decoy_component >= 1 &&
                    decoy_component < static_cast<std::size_t>(min_keypoints(4)) && !decoy_in_instance && r.instances.size() == 2 && e.p_ins == 1.0 &&
                    e.r_ins == 1.0 && e.r_kp == 1.0 && e.p_kp == 1.0;
    detail += fmt(" seed %llu: %zu cands, decoy candidate %s (score %.3f), %zu decoy edge(s), component of %zu < min %d, %zu instances, decoy dropped %s;",
                  static_cast<unsigned long long>(seed), r.candidates.size(), decoy_candidate ? "yes" : "no",
                  static_cast<double>(decoy_score), decoy_edges, decoy_component, min_keypoints(4),
                  r.instances.size(), decoy_in_instance ? "no" : "yes");
    return ok;
}

void grouping_fixture() {
    std::string detail;
    bool ok = true;
    for (std::uint64_t seed : {7u, 11u, 13u}) ok = grouping_case(seed, detail) && ok;
    report("grouping fixture", ok, detail.substr(1));
}

void determinism() {
    SynthParams p;
    p.instances = 3;
    p.noise = 0.1;
    p.seed = 77;
    const SynthFixture fx = generate_fixture(p);
    const SynthFixture fx2 = generate_fixture(p);
    bool ok = fx.query == fx2.query && fx.support == fx2.support;
    std::vector<std::string> broken;
    if (!ok) broken.emplace_back("synth");

    struct Snapshot {
        std::vector<std::uint8_t> store;
        FeatureMap enhanced;
        SimilarityMatrix sim;
        std::vector<CandidateKeypoint> cands;
        InstanceGraph graph;
        InstanceGraph pruned;
        std::vector<Instance> instances;
        std::string json;
    };
    const auto snap = [&](unsigned threads) {
        const ExecOptions ex{threads};
        Snapshot s;
        const auto store = learn_prototypes(fx.support, fx.annotation, LearnConfig{}, ex);
        s.store = encode_store(store);
        s.enhanced = enhance(fx.query, EnhanceConfig{}, ex);
        s.sim = similarity_matrix(store.enhanced_support(), s.enhanced, ex);
        s.cands = extract_candidates(store, s.enhanced, s.sim, MatchConfig{});
        s.graph = build_initial_graph(s.cands, store, s.enhanced, ex);
        s.pruned = prune(s.graph, GroupConfig{});
        s.instances = assemble_instances(s.pruned, connected_components(s.pruned), store.keypoint_count(), GroupConfig{});
        s.json = detection_to_json(extract(store, fx.query, ExtractConfig{}, "q", ex).detections);
        return s;
    };
    const Snapshot base = snap(1);
    int runs = 0;
    for (unsigned threads : {1u, 1u, 2u, 3u, 4u, 8u}) {
        const Snapshot s = snap(threads);
        ++runs;
        const auto check = [&](bool same, const char* stage) {
            if (!same) broken.push_back(fmt("%s@%u", stage, threads));
        };
        check(s.store == base.store, "store");
        check(s.enhanced == base.enhanced, "enhance");
        check(s.sim == base.sim, "similarity");
        check(s.cands == base.cands, "candidates");
        check(s.graph == base.graph, "graph");
        check(s.pruned == base.pruned, "prune");
        check(s.instances == base.instances, "instances");
        check(s.json == base.json, "detections");
    }
    std::string detail = fmt("%d repeated runs over worker counts {1,1,2,3,4,8}: all 8 stages bit-identical", runs);
    if (!broken.empty()) {
        detail = "differs:";
        for (const auto& b : broken) detail += " " + b;
    }
    report("determinism", broken.empty(), detail);
}

double time_similarity(std::size_t side, std::size_t d, std::uint64_t seed, std::size_t& db) {
    const FeatureMap s = enhance(test::random_map(side, side, d, seed), EnhanceConfig{});
    const FeatureMap q = enhance(test::random_map(side, side, d, seed + 1), EnhanceConfig{});
    db = s.channels();
    const auto t0 = Clock::now();
    const SimilarityMatrix m = similarity_matrix(s, q);
    const double secs = seconds_since(t0);
    volatile float sink = m.values()[m.values().size() / 2];
    (void)sink;
    return secs;
}

void performance() {
    std::size_t db_ci = 0, db_full = 0;
    const double ci = time_similarity(32, 64, 5, db_ci);
    const double full = time_similarity(64, 384, 6, db_full);
    const unsigned cores = resolve_threads(ExecOptions{});
    report("performance", ci < kCiScaleBudgetSec && full < kFullScaleBudgetSec,
           fmt("P=1024 D_B=%zu: %.3f s (< %.0f s); P=4096 D_B=%zu: %.2f s (< %.0f s); %u worker(s)", db_ci, ci,
               kCiScaleBudgetSec, db_full, full, kFullScaleBudgetSec, cores));
}

void evaluation_kit() {
    // Three images of a three-keypoint object, width 100 (hit radius 5 px).
    const auto gt_img = [](const char* name, std::vector<std::vector<PixelCoord>> objects) {
        GroundTruth gt;
        gt.image = name;
        gt.width = gt.height = 100;
        int id = 0;
        for (const auto& o : objects) {
            GtInstance inst;
            inst.id = id++;
            for (int k = 0; k < 3; ++k) inst.keypoints[k + 1] = o[static_cast<std::size_t>(k)];
            gt.instances.push_back(inst);
        }
        return gt;
    };
    const auto det = [](const char* name, std::vector<std::vector<DetectedKeypoint>> insts) {
        DetectionSet d{name, CoordinateFrame::Raw, {}};
        int n = 1;
        for (auto& k : insts) d.instances.push_back({n++, 0.0, std::move(k)});
        return d;
    };
    const auto a = gt_img("a", {{{10, 10}, {30, 10}, {20, 30}}});
    const auto b = gt_img("b", {{{10, 10}, {30, 10}, {20, 30}}, {{60, 60}, {80, 60}, {70, 80}}});
    const auto c = gt_img("c", {{{50, 50}, {70, 50}, {60, 70}}});
    // a: perfect.  b: object 1 found with one keypoint 6 px off, object 2
    // missed, plus a stray instance.  c: two partial predictions of one object.
    const auto pa = det("a", {{{1, 10, 10, 1}, {2, 30, 10, 1}, {3, 20, 30, 1}}});
    const auto pb = det("b", {{{1, 11, 10, 1}, {2, 30, 12, 1}, {3, 26, 30, 1}}, {{1, 0, 99, 1}, {2, 99, 0, 1}}});
    const auto pc = det("c", {{{1, 50, 50, 1}, {2, 70, 50, 1}}, {{3, 60, 71, 1}, {2, 71, 50, 1}}});
    const int min_kp = min_keypoints(3), n_kp = 3;
    const EvalResult ra = score_image(pa, a, min_kp, n_kp);
    const EvalResult rb = score_image(pb, b, min_kp, n_kp);
    const EvalResult rc = score_image(pc, c, min_kp, n_kp);
    // Hand computation:
    //  a: TP_KP 3/3 pred, 3/3 GT; 1 instance, claimed. R=P=1 everywhere.
    //  b: hits (1,11,10) (2,30,12); (3,26,30) is 6 px away -> miss. TP_KP 2.
    //     P_KP 2/5, R_KP 2/6; instance 1 has 2 hits >= min 2 -> TP.
    //     P_INS 1/2, R_INS 1/2.
    //  c: (1),(2),(3) hit; the second prediction's keypoint 2 lost its GT
    //     point to the first's -> FP. TP_KP 3, P_KP 3/4, R_KP 3/3. The second
    //     prediction keeps 1 hit < min 2 -> P_INS 1/2, R_INS 1.
    const double want[3][4] = {{1, 1, 1, 1}, {2.0 / 6, 2.0 / 5, 0.5, 0.5}, {1, 0.75, 1, 0.5}};
    const EvalResult* got[3] = {&ra, &rb, &rc};
    bool exact = true;
    for (int i = 0; i < 3; ++i) {
        const double g[4] = {got[i]->r_kp, got[i]->p_kp, got[i]->r_ins, got[i]->p_ins};
        for (int k = 0; k < 4; ++k) exact &= std::fabs(g[k] - want[i][k]) <= kMetricExact;
    }
    const EvalReport rep = aggregate({{"micro", {ra, rb, rc}}});
    const double mean_want[4] = {(1 + 2.0 / 6 + 1) / 3, (1 + 0.4 + 0.75) / 3, (1 + 0.5 + 1) / 3, (1 + 0.5 + 0.5) / 3};
    const double mean_got[4] = {rep.mean.r_kp, rep.mean.p_kp, rep.mean.r_ins, rep.mean.p_ins};
    for (int k = 0; k < 4; ++k) exact &= std::fabs(mean_got[k] - mean_want[k]) <= kMetricExact;

    const std::string table = format_report_table(rep);
    const std::string header = table.substr(0, table.find('\n'));
    std::size_t pos = 0;
    bool columns = true;
    for (const char* col : {"Sequence", "Images", "R̄_KP", "P̄_KP", "R̄_INS", "P̄_INS"}) {
        const auto at = header.find(col, pos);
        columns &= at != std::string::npos;
        pos = at == std::string::npos ? pos : at;
    }
    columns &= table.find("\nMean") != std::string::npos;
    report("evaluation kit", exact && columns,
           fmt("3-image micro-dataset %s hand-computed metrics; mean R_KP %.4f P_KP %.4f R_INS %.4f P_INS %.4f; "
               "table columns %s",
               exact ? "matches" : "DIFFERS FROM", rep.mean.r_kp, rep.mean.p_kp, rep.mean.r_ins, rep.mean.p_ins,
               columns ? "ok" : "wrong"));
}

}  // namespace

int main() {
    std::printf("okp acceptance suite\n");
    guarded("matching oracle", matching_oracle);
    guarded("enhancement oracle", enhancement_oracle);
    guarded("constants fidelity", constants_fidelity);
    guarded("synthetic end-to-end", synthetic_end_to_end);
    guarded("self-query identity", self_query);
    guarded("grouping fixture", grouping_fixture);
    guarded("determinism", determinism);
    guarded("performance", performance);
    guarded("evaluation kit", evaluation_kit);
    std::printf("%d failure(s)\n", failures);
    return failures == 0 ? 0 : 1;
}
