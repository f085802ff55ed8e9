#include "okp/evalkit.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <sstream>

#include <json.hpp>

#include "bytes.hpp"
#include "okp/error.hpp"

namespace okp {

using nlohmann::json;

namespace {

double ratio(std::size_t num, std::size_t den) {
    return den == 0 ? 1.0 : static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

std::size_t GroundTruth::keypoint_count() const noexcept {
    std::size_t n = 0;
    for (const auto& inst : instances) n += inst.keypoints.size();
    return n;
}

int GroundTruth::max_identity() const noexcept {
    int m = 0;
    for (const auto& inst : instances) {
        if (!inst.keypoints.empty()) m = std::max(m, inst.keypoints.rbegin()->first);
    }
    return m;
}

GroundTruth parse_ground_truth_json(const std::string& text) {
    GroundTruth gt;
    try {
        const json j = json::parse(text);
        gt.image = j.at("image").get<std::string>();
        gt.width = j.at("width").get<int>();
        gt.height = j.at("height").get<int>();
        for (const auto& ji : j.at("instances")) {
            GtInstance inst;
            inst.id = ji.at("id").get<int>();
            for (const auto& jk : ji.at("keypoints")) {
                const int id = jk.at("id").get<int>();
                if (id < 1) fail(ErrorCode::SchemaViolation, "ground-truth identities start at 1");
                const PixelCoord p{jk.at("u").get<double>(), jk.at("v").get<double>()};
                if (!inst.keypoints.emplace(id, p).second) {
                    fail(ErrorCode::SchemaViolation, "identity repeated within a ground-truth instance");
                }
            }
            gt.instances.push_back(std::move(inst));
        }
    } catch (const json::exception& e) {
        fail(ErrorCode::SchemaViolation, std::string("ground truth: ") + e.what());
    }
    if (gt.width <= 0 || gt.height <= 0) fail(ErrorCode::SchemaViolation, "ground-truth image size must be positive");
    return gt;
}

std::string ground_truth_to_json(const GroundTruth& gt) {
    json j{{"image", gt.image}, {"width", gt.width}, {"height", gt.height}, {"instances", json::array()}};
    for (const auto& inst : gt.instances) {
        json ji{{"id", inst.id}, {"keypoints", json::array()}};
        for (const auto& [id, p] : inst.keypoints) ji["keypoints"].push_back({{"id", id}, {"u", p.u}, {"v", p.v}});
        j["instances"].push_back(std::move(ji));
    }
    return j.dump(2);
}

GroundTruth read_ground_truth_file(const std::filesystem::path& path) {
    const auto bytes = detail::read_file_bytes(path);
    return parse_ground_truth_json(std::string(bytes.begin(), bytes.end()));
}

void write_ground_truth_file(const GroundTruth& gt, const std::filesystem::path& path) {
    const std::string text = ground_truth_to_json(gt) + "\n";
    detail::write_file_bytes(path, {reinterpret_cast<const std::uint8_t*>(text.data()), text.size()});
}

KeypointMatching match_keypoints(const DetectionSet& pred, const GroundTruth& gt) {
    if (pred.frame != CoordinateFrame::Raw) {
        fail(ErrorCode::FrameMismatch, "predictions must be scaled to raw-image coordinates");
    }
    KeypointMatching out;
    out.matches.resize(pred.instances.size());
    for (std::size_t i = 0; i < pred.instances.size(); ++i) {
        out.matches[i].assign(pred.instances[i].keypoints.size(), std::nullopt);
    }

    struct Pair {
        double dist;
        std::size_t pi, pk, gi;
        int id;
    };
    std::vector<Pair> pairs;
    const double limit = kTpDistanceFraction * gt.width;
    for (std::size_t pi = 0; pi < pred.instances.size(); ++pi) {
        const auto& kps = pred.instances[pi].keypoints;
        for (std::size_t pk = 0; pk < kps.size(); ++pk) {
            for (std::size_t gi = 0; gi < gt.instances.size(); ++gi) {
                const auto it = gt.instances[gi].keypoints.find(kps[pk].id);
                if (it == gt.instances[gi].keypoints.end()) continue;
                const double d = std::hypot(kps[pk].u - it->second.u, kps[pk].v - it->second.v);
                if (d < limit) pairs.push_back({d, pi, pk, gi, kps[pk].id});
            }
        }
    }
    std::stable_sort(pairs.begin(), pairs.end(), [](const Pair& a, const Pair& b) { return a.dist < b.dist; });

    std::set<std::pair<std::size_t, int>> gt_used;
    for (const auto& p : pairs) {
        if (out.matches[p.pi][p.pk] || gt_used.contains({p.gi, p.id})) continue;
        out.matches[p.pi][p.pk] = GtRef{p.gi, p.id};
        gt_used.insert({p.gi, p.id});
        ++out.true_positives;
    }
    return out;
}

EvalResult score_image(const DetectionSet& pred, const GroundTruth& gt, int min_keypoints, int n_kp) {
    const KeypointMatching m = match_keypoints(pred, gt);
    EvalResult r;
    std::size_t n_pred = 0;
    for (const auto& inst : pred.instances) n_pred += inst.keypoints.size();
    const std::size_t n_gt = gt.keypoint_count();
    r.tp_kp = m.true_positives;
    r.fp_kp = n_pred - r.tp_kp;
    r.fn_kp = n_gt - r.tp_kp;
    r.p_kp = ratio(r.tp_kp, n_pred);
    r.r_kp = ratio(r.tp_kp, n_gt);

    struct Claim {
        std::size_t pred;
        int hits;
        std::size_t target;
    };
    std::vector<Claim> claims;
    for (std::size_t i = 0; i < pred.instances.size(); ++i) {
        std::vector<int> per_gt(gt.instances.size(), 0);
        int hits = 0;
        for (const auto& ref : m.matches[i]) {
            if (ref) {
                ++per_gt[ref->instance];
                ++hits;
            }
        }
        if (hits < min_keypoints || hits > n_kp || hits == 0) continue;
        const auto target = static_cast<std::size_t>(
            std::max_element(per_gt.begin(), per_gt.end()) - per_gt.begin());
        claims.push_back({i, hits, target});
    }
    std::stable_sort(claims.begin(), claims.end(), [](const Claim& a, const Claim& b) { return a.hits > b.hits; });
    std::vector<bool> claimed(gt.instances.size(), false);
    for (const auto& c : claims) {
        if (claimed[c.target]) continue;
        claimed[c.target] = true;
        ++r.tp_ins;
    }
    r.fp_ins = pred.instances.size() - r.tp_ins;
    r.fn_ins = gt.instances.size() - r.tp_ins;
    r.p_ins = ratio(r.tp_ins, pred.instances.size());
    r.r_ins = ratio(r.tp_ins, gt.instances.size());
    return r;
}

EvalReport aggregate(const std::vector<SequenceInput>& sequences) {
    if (sequences.empty()) fail(ErrorCode::EmptyGroup, "no sequences to aggregate");
    EvalReport rep;
    for (const auto& seq : sequences) {
        if (seq.images.empty()) fail(ErrorCode::EmptyGroup, "sequence '" + seq.name + "' has no images");
        SequenceSummary s{seq.name, seq.images.size(), {}};
        for (const auto& img : seq.images) {
            s.bars.r_kp += img.r_kp;
            s.bars.p_kp += img.p_kp;
            s.bars.r_ins += img.r_ins;
            s.bars.p_ins += img.p_ins;
        }
        const double n = static_cast<double>(seq.images.size());
        s.bars = {s.bars.r_kp / n, s.bars.p_kp / n, s.bars.r_ins / n, s.bars.p_ins / n};
        rep.mean.r_kp += s.bars.r_kp;
        rep.mean.p_kp += s.bars.p_kp;
        rep.mean.r_ins += s.bars.r_ins;
        rep.mean.p_ins += s.bars.p_ins;
        rep.sequences.push_back(std::move(s));
    }
    const double n = static_cast<double>(rep.sequences.size());
    rep.mean = {rep.mean.r_kp / n, rep.mean.p_kp / n, rep.mean.r_ins / n, rep.mean.p_ins / n};
    return rep;
}

std::string format_report_table(const EvalReport& report) {
    std::size_t name_w = 8;
    for (const auto& s : report.sequences) name_w = std::max(name_w, s.name.size());
    const auto pad = [](std::string s, std::size_t w) {
        if (s.size() < w) s.append(w - s.size(), ' ');
        return s;
    };
    const auto num = [](double x) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%7.3f", x);
        return std::string(buf);
    };
    std::ostringstream os;
    // The header uses U+0304 (combining macron), which occupies no column.
    os << pad("Sequence", name_w) << "  Images"
       << "   R̄_KP   P̄_KP  R̄_INS  P̄_INS\n";
    for (const auto& s : report.sequences) {
        char count[16];
        std::snprintf(count, sizeof count, "%8zu", s.images);
        os << pad(s.name, name_w) << count << num(s.bars.r_kp) << num(s.bars.p_kp) << num(s.bars.r_ins)
           << num(s.bars.p_ins) << '\n';
    }
    os << pad("Mean", name_w) << "       /" << num(report.mean.r_kp) << num(report.mean.p_kp)
       << num(report.mean.r_ins) << num(report.mean.p_ins) << '\n';
    return os.str();
}

}  // namespace okp
