#include "okp_cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "okp/detection.hpp"
#include "okp/enhance.hpp"
#include "okp/error.hpp"
#include "okp/evalkit.hpp"
#include "okp/group.hpp"
#include "okp/okpf.hpp"
#include "okp/pipeline.hpp"
#include "okp/prototype.hpp"
#include "okp/synth.hpp"

namespace okp::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::IoFailure:
        case ErrorCode::BadMagic:
        case ErrorCode::UnsupportedVersion:
        case ErrorCode::VersionMismatch:
        case ErrorCode::TruncatedPayload:
        case ErrorCode::NonFiniteValue:
            return kExitIo;
        default:
            return kExitInvalid;
    }
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
    out << text;
    if (!out) fail(ErrorCode::IoFailure, "write error on " + path.string());
}

struct LearnArgs {
    std::string features, annotations, out;
    double alpha = 5.0;
    bool no_attention = false;
    int nseg = 8;
    unsigned threads = 0;
};

int cmd_learn(const LearnArgs& a, std::ostream& out) {
    LearnConfig cfg;
    cfg.enhance.alpha = a.alpha;
    cfg.enhance.use_objectness_attention = !a.no_attention;
    cfg.n_seg = a.nseg;
    FeatureMap support = read_feature_file(a.features);
    Annotation ann = read_annotation_file(a.annotations);
    const PrototypeStore store = learn_prototypes(std::move(support), std::move(ann), cfg, {a.threads});
    save_store(store, a.out);
    out << "N_KP=" << store.keypoint_count() << " edges=" << store.edges().size()
        << " D=" << store.raw_channels() << " D_B=" << store.binned_channels() << '\n';
    return kExitOk;
}

struct ExtractArgs {
    std::string proto, features, out, image;
    double tau_e = 0.3;
    double cand_threshold = 0.0;
    int nms_radius = 2;
    std::optional<int> min_keypoints;
    unsigned threads = 0;
};

int cmd_extract(const ExtractArgs& a, std::ostream& out) {
    const ExecOptions exec{a.threads};
    const PrototypeStore store = load_store(a.proto, exec);
    const FeatureMap query = read_feature_file(a.features);
    ExtractConfig cfg;
    cfg.match.cand_threshold = a.cand_threshold;
    cfg.match.nms_radius = a.nms_radius;
    cfg.group.tau_e = a.tau_e;
    cfg.group.min_keypoints_override = a.min_keypoints;
    const std::string image = a.image.empty() ? fs::path(a.features).stem().string() : a.image;
    const ExtractResult r = extract(store, query, cfg, image, exec);
    write_detection_file(r.detections, a.out);
    out << "candidates=" << r.candidates.size() << " instances=" << r.instances.size() << '\n';
    return kExitOk;
}

std::vector<fs::path> json_files_in(const fs::path& dir, bool recursive) {
    std::vector<fs::path> files;
    const auto take = [&](const fs::directory_entry& e) {
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    };
    if (recursive) {
        for (const auto& e : fs::recursive_directory_iterator(dir)) take(e);
    } else {
        for (const auto& e : fs::directory_iterator(dir)) take(e);
    }
    std::sort(files.begin(), files.end());
    return files;
}

struct EvalArgs {
    std::string pred, gt, report, format = "table";
    std::optional<int> min_keypoints;
};

int cmd_eval(const EvalArgs& a, std::ostream& out) {
    if (!fs::exists(a.pred)) fail(ErrorCode::IoFailure, "missing predictions: " + a.pred);
    if (!fs::exists(a.gt)) fail(ErrorCode::IoFailure, "missing ground truth: " + a.gt);

    std::map<std::string, DetectionSet> preds;
    const std::vector<fs::path> pred_files =
        fs::is_directory(a.pred) ? json_files_in(a.pred, true) : std::vector<fs::path>{a.pred};
    for (const auto& f : pred_files) {
        DetectionSet d = read_detection_file(f);
        const std::string id = d.image;
        if (!preds.emplace(id, std::move(d)).second) {
            fail(ErrorCode::SchemaViolation, "two prediction files for image '" + id + "'");
        }
    }

    // Sequences: a file, the JSON files directly in a directory, or one per subdirectory.
    std::vector<std::pair<std::string, std::vector<fs::path>>> sequences;
    const fs::path gt_root(a.gt);
    if (fs::is_directory(gt_root)) {
        const std::string root_name = fs::absolute(gt_root).lexically_normal().filename().string();
        if (auto top = json_files_in(gt_root, false); !top.empty()) sequences.emplace_back(root_name, std::move(top));
        std::vector<fs::path> subdirs;
        for (const auto& e : fs::directory_iterator(gt_root)) {
            if (e.is_directory()) subdirs.push_back(e.path());
        }
        std::sort(subdirs.begin(), subdirs.end());
        for (const auto& d : subdirs) {
            if (auto files = json_files_in(d, false); !files.empty()) {
                sequences.emplace_back(d.filename().string(), std::move(files));
            }
        }
    } else {
        sequences.emplace_back(gt_root.stem().string(), std::vector<fs::path>{gt_root});
    }

    std::vector<SequenceInput> inputs;
    json images = json::array();
    for (const auto& [name, files] : sequences) {
        std::vector<GroundTruth> gts;
        int n_kp = 0;
        for (const auto& f : files) {
            gts.push_back(read_ground_truth_file(f));
            n_kp = std::max(n_kp, gts.back().max_identity());
        }
        const int min_kp = min_keypoints(static_cast<std::size_t>(n_kp), a.min_keypoints);
        SequenceInput seq{name, {}};
        for (const auto& gt : gts) {
            const auto it = preds.find(gt.image);
            const DetectionSet empty{gt.image, CoordinateFrame::Raw, {}};
            const EvalResult r = score_image(it == preds.end() ? empty : it->second, gt, min_kp, n_kp);
            seq.images.push_back(r);
            images.push_back({{"sequence", name}, {"image", gt.image},
                              {"r_kp", r.r_kp}, {"p_kp", r.p_kp}, {"r_ins", r.r_ins}, {"p_ins", r.p_ins},
                              {"tp_kp", r.tp_kp}, {"fp_kp", r.fp_kp}, {"fn_kp", r.fn_kp},
                              {"tp_ins", r.tp_ins}, {"fp_ins", r.fp_ins}, {"fn_ins", r.fn_ins}});
        }
        inputs.push_back(std::move(seq));
    }
    const EvalReport rep = aggregate(inputs);

    const auto bars = [](const MetricBars& b) {
        return json{{"r_kp", b.r_kp}, {"p_kp", b.p_kp}, {"r_ins", b.r_ins}, {"p_ins", b.p_ins}};
    };
    json report{{"images", images}, {"sequences", json::array()}, {"mean", bars(rep.mean)}};
    for (const auto& s : rep.sequences) {
        json js = bars(s.bars);
        js["name"] = s.name;
        js["images"] = s.images;
        report["sequences"].push_back(js);
    }
    if (!a.report.empty()) write_text(a.report, report.dump(2) + "\n");
    if (a.format == "json") {
        out << report.dump(2) << '\n';
    } else {
        out << format_report_table(rep);
    }
    return kExitOk;
}

struct ActivationArgs {
    std::string features, out;
    double alpha = 5.0;
};

int cmd_activation(const ActivationArgs& a) {
    write_text(a.out, activation_pgm(a.features, a.alpha));
    return kExitOk;
}

struct SynthArgs {
    std::string out_dir;
    SynthParams params;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
    const SynthFixture fx = generate_fixture(a.params);
    write_fixture(fx, a.out_dir);
    out << "wrote " << a.params.instances << " instance(s) of " << a.params.keypoints
        << " keypoints to " << a.out_dir << '\n';
    return kExitOk;
}

}  // namespace

std::string activation_pgm(const std::string& features_path, double alpha) {
    if (!(alpha > 0.0)) fail(ErrorCode::InvalidConfig, "alpha must be > 0");
    const FeatureMap map = read_feature_file(features_path);
    const ActivationMap act = objectness_activation(map);
    std::ostringstream os;
    os << "P5\n" << map.cols() << ' ' << map.rows() << "\n255\n";
    for (double o : act.values) {
        os.put(static_cast<char>(std::lround(255.0 * attention_scale(o, alpha))));
    }
    return os.str();
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"One-shot instance-aware object keypoint extraction", "okp"};
    app.require_subcommand(1);

    LearnArgs learn;
    auto* learn_cmd = app.add_subcommand("learn", "Learn keypoint and edge prototypes from a support map");
    learn_cmd->add_option("--features", learn.features, "Support feature map (OKPF)")->required();
    learn_cmd->add_option("--annotations", learn.annotations, "Keypoint annotation JSON")->required();
    learn_cmd->add_option("--out", learn.out, "Output prototype store (OKPP)")->required();
    learn_cmd->add_option("--alpha", learn.alpha, "Objectness attention sharpness")->capture_default_str();
    learn_cmd->add_flag("--no-attention", learn.no_attention, "Disable objectness attention");
    learn_cmd->add_option("--nseg", learn.nseg, "Sub-segments per edge")->capture_default_str();
    learn_cmd->add_option("--threads", learn.threads, "Worker threads (0 = all cores)");

    ExtractArgs extract_args;
    auto* extract_cmd = app.add_subcommand("extract", "Extract keypoint instances from a query map");
    extract_cmd->add_option("--proto", extract_args.proto, "Prototype store (OKPP)")->required();
    extract_cmd->add_option("--features", extract_args.features, "Query feature map (OKPF)")->required();
    extract_cmd->add_option("--out", extract_args.out, "Output detection JSON")->required();
    extract_cmd->add_option("--tau-e", extract_args.tau_e, "Edge rejection threshold")->capture_default_str();
    extract_cmd->add_option("--cand-threshold", extract_args.cand_threshold, "Candidate score threshold")
        ->capture_default_str();
    extract_cmd->add_option("--nms-radius", extract_args.nms_radius, "NMS radius in cells")->capture_default_str();
    extract_cmd->add_option("--min-keypoints", extract_args.min_keypoints, "Minimum keypoints per instance");
    extract_cmd->add_option("--image", extract_args.image, "Image id (default: features file stem)");
    extract_cmd->add_option("--threads", extract_args.threads, "Worker threads (0 = all cores)");

    EvalArgs eval;
    auto* eval_cmd = app.add_subcommand("eval", "Score detections against ground truth");
    eval_cmd->add_option("--pred", eval.pred, "Detection JSON file or directory")->required();
    eval_cmd->add_option("--gt", eval.gt, "Ground-truth JSON file or directory")->required();
    eval_cmd->add_option("--report", eval.report, "Write the JSON report here");
    eval_cmd->add_option("--min-keypoints", eval.min_keypoints, "Override the minimum-keypoint rule");
    eval_cmd->add_option("--format", eval.format, "Standard output format")
        ->check(CLI::IsMember({"json", "table"}))
        ->capture_default_str();

    ActivationArgs act;
    auto* act_cmd = app.add_subcommand("activation", "Render the objectness attention map as PGM");
    act_cmd->add_option("--features", act.features, "Feature map (OKPF)")->required();
    act_cmd->add_option("--out", act.out, "Output PGM")->required();
    act_cmd->add_option("--alpha", act.alpha, "Attention sharpness")->capture_default_str();

    SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic support/query fixture");
    synth_cmd->add_option("--out-dir", synth.out_dir, "Output directory")->required();
    synth_cmd->add_option("--instances", synth.params.instances, "Planted instances")->capture_default_str();
    synth_cmd->add_option("--keypoints", synth.params.keypoints, "Keypoints per object")->capture_default_str();
    synth_cmd->add_option("--channels", synth.params.channels, "Feature channels")->capture_default_str();
    synth_cmd->add_option("--noise", synth.params.noise, "Query noise, relative to feature RMS")->capture_default_str();
    synth_cmd->add_option("--seed", synth.params.seed, "Random seed")->capture_default_str();
    synth_cmd->add_option("--grid", synth.params.grid, "Grid side in cells")->capture_default_str();
    synth_cmd->add_option("--object-size", synth.params.object_size, "Object side in cells")->capture_default_str();

    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInvalid;
    }

    try {
        if (*learn_cmd) return cmd_learn(learn, out);
        if (*extract_cmd) return cmd_extract(extract_args, out);
        if (*eval_cmd) return cmd_eval(eval, out);
        if (*act_cmd) return cmd_activation(act);
        if (*synth_cmd) return cmd_synth(synth, out);
    } catch (const Error& e) {
        err << "okp: " << e.what() << " [" << to_string(e.code()) << "]\n";
        return exit_code_for(e.code());
    } catch (const fs::filesystem_error& e) {
        err << "okp: " << e.what() << '\n';
        return kExitIo;
    }
    return kExitInvalid;
}

}  // namespace okp::cli
