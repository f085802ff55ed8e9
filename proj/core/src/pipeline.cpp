#include "okp/pipeline.hpp"

#include <string>

#include "okp/enhance.hpp"
#include "okp/error.hpp"

namespace okp {

DetectionSet to_detections(const std::vector<Instance>& instances, const GridGeometry& geom,
                           const std::string& image) {
    DetectionSet det{image, CoordinateFrame::Raw, {}};
    int n = 1;
    for (const auto& inst : instances) {
        DetectedInstance out{n++, inst.cohesion, {}};
        for (const auto& kp : inst.keypoints) {
            PixelCoord p = grid_to_pixel(kp.cell, geom);
            if (geom.has_raw()) p = scale_to_raw(p, geom);
            out.keypoints.push_back({kp.identity, p.u, p.v, kp.score});
        }
        det.instances.push_back(std::move(out));
    }
    return det;
}

ExtractResult extract(const PrototypeStore& store, const FeatureMap& query, const ExtractConfig& cfg,
                      const std::string& image, ExecOptions exec) {
    cfg.match.validate();
    cfg.group.validate();
    if (query.channels() != store.raw_channels()) {
        fail(ErrorCode::ChannelMismatch, "store was learned on " + std::to_string(store.raw_channels()) +
                                             "-channel features, query has " +
                                             std::to_string(query.channels()));
    }
    const GridGeometry& sg = store.support_map().geometry();
    const GridGeometry& qg = query.geometry();
    if (sg.patch != qg.patch || sg.stride != qg.stride) {
        fail(ErrorCode::InvalidGeometry, "query patch/stride differ from the support map");
    }

    ExtractResult r;
    const FeatureMap enhanced = enhance(query, store.config().enhance, exec);
    r.candidates = extract_candidates(store, enhanced, cfg.match, exec);
    r.instances = group_candidates(r.candidates, store, enhanced, cfg.group, exec);
    r.detections = to_detections(r.instances, qg, image);
    return r;
}

}  // namespace okp
