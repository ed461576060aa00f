// Command-line surface for the NNS detection pipeline: synthetic data
// generation, preprocessing, model training, segmentation and evaluation.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "nns/config.hpp"
#include "nns/io.hpp"
#include "nns/metrics.hpp"
#include "nns/pipeline.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace nns;

namespace {

int worker_cap() {
    const char* env = std::getenv("NNS_THREADS");
    if (!env) return 1;
    int n = std::atoi(env);
    return n > 0 ? n : 1;
}

std::string read_text(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(tok);
    return out;
}

BoundingBox box_from_json(const std::string& text) {
    json o = json::parse(text);
    return {o.at("x"), o.at("y"), o.at("w"), o.at("h")};
}

std::string box_to_json(double x, double y, double w, double h) {
    return json{{"x", x}, {"y", y}, {"w", w}, {"h", h}}.dump(2);
}

void write_scores_csv(const std::string& path, const std::vector<double>& scores, int window,
                      int stride, double fps) {
    std::ostringstream ss;
    ss.precision(9);
    ss << "window_index,start_frame,window_frames,stride_frames,fps,score\n";
    for (size_t i = 0; i < scores.size(); ++i)
        ss << i << "," << i * size_t(stride) << "," << window << "," << stride << "," << fps << ","
           << scores[i] << "\n";
    atomic_write(path, ss.str());
}

ConfidenceSequence read_scores_csv(const std::string& path) {
    std::string text = read_text(path);
    ConfidenceSequence seq;
    size_t pos = 0;
    bool header = true;
    while (pos < text.size()) {
        size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string line = text.substr(pos, eol - pos);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (header) {
            if (line.rfind("window_index,", 0) != 0)
                throw ParseError("bad scores CSV header", pos);
            header = false;
        } else if (!line.empty()) {
            auto cols = split_list(line);
            if (cols.size() < 6) throw ParseError("scores row needs 6 columns", pos);
            try {
                seq.window_frames = std::stoi(cols[2]);
                seq.stride_frames = std::stoi(cols[3]);
                seq.fps = std::stod(cols[4]);
                seq.scores.push_back(std::stod(cols[5]));
            } catch (const std::exception&) {
                throw ParseError("bad number in scores row", pos);
            }
        }
        pos = eol + 1;
    }
    return seq;
}

void write_steps_csv(const std::string& path, const StepSeries& steps) {
    std::ostringstream ss;
    ss.precision(9);
    ss << "step_start_s,score,label\n";
    for (size_t i = 0; i < steps.scores.size(); ++i)
        ss << double(i) * steps.step_s << "," << steps.scores[i] << "," << int(steps.labels[i])
           << "\n";
    atomic_write(path, ss.str());
}

void write_svg_timeline(const std::string& path, const StepSeries& steps, const EventTrack& pred,
                        const EventTrack* gt) {
    double dur = double(steps.scores.size()) * steps.step_s;
    if (dur <= 0.0) dur = 1.0;
    const int w = 800, h = 160;
    auto xpos = [&](double t) { return t / dur * w; };
    std::ostringstream ss;
    ss.precision(5);
    ss << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
       << "\">\n";
    if (gt)
        for (const Event& e : gt->events)
            ss << "<rect x=\"" << xpos(e.start_s) << "\" y=\"10\" width=\""
               << xpos(e.end_s) - xpos(e.start_s) << "\" height=\"25\" fill=\"#7fbf7f\"/>\n";
    for (const Event& e : pred.events)
        ss << "<rect x=\"" << xpos(e.start_s) << "\" y=\"120\" width=\""
           << xpos(e.end_s) - xpos(e.start_s) << "\" height=\"25\" fill=\"#7f7fbf\"/>\n";
    ss << "<polyline fill=\"none\" stroke=\"#333\" points=\"";
    for (size_t i = 0; i < steps.scores.size(); ++i)
        ss << xpos((double(i) + 0.5) * steps.step_s) << "," << 110.0 - 65.0 * steps.scores[i]
           << " ";
    ss << "\"/>\n</svg>\n";
    atomic_write(path, ss.str());
}

struct ClipEntry {
    std::string path;
    int label;
    BoundingBox box;
};

std::vector<ClipEntry> read_clip_manifest(const std::string& path) {
    json o = json::parse(read_text(path));
    std::vector<ClipEntry> out;
    fs::path base = fs::path(path).parent_path();
    for (const json& e : o.at("clips")) {
        ClipEntry c;
        c.path = (base / e.at("path").get<std::string>()).string();
        c.label = e.at("label");
        const json& b = e.at("box");
        c.box = {b.at("x"), b.at("y"), b.at("w"), b.at("h")};
        out.push_back(c);
    }
    return out;
}

// ----- subcommand bodies -------------------------------------------------------

void cmd_synth_video(const PipelineConfig& pc, const std::string& out, double duration,
                     uint64_t seed, bool jitter) {
    SynthConfig sc = pc.synth;
    sc.seed = seed;
    if (jitter && !sc.jitter) sc.jitter = JitterConfig{};
    sc.validate();
    EventTrack track = gen_event_track(duration, sc, seed);
    RenderedVideo rv = render_video(track, sc, duration);
    save_nnsv(out, rv.video);
    fs::path base(out);
    std::string stem = (base.parent_path() / base.stem()).string();
    save_annotation_csv(stem + ".events.csv", track);
    const FaceBox& b0 = rv.boxes[0];
    atomic_write(stem + ".box.json", box_to_json(b0.x, b0.y, b0.w, b0.h));
    write_manifest(out, pipeline_config_json(pc), seed);
}

void cmd_synth_clips(const PipelineConfig& pc, const std::string& out_dir, int n_pos, int n_neg,
                     double clip_len, uint64_t seed, bool jitter) {
    SynthConfig sc = pc.synth;
    sc.seed = seed;
    if (jitter && !sc.jitter) sc.jitter = JitterConfig{};
    sc.validate();
    fs::create_directories(out_dir);
    std::vector<LabeledClip> clips = gen_clip_dataset(sc, n_pos, n_neg, clip_len);
    json manifest;
    manifest["clips"] = json::array();
    for (size_t i = 0; i < clips.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "clip_%04zu.nnsv", i);
        save_nnsv((fs::path(out_dir) / name).string(), clips[i].video);
        const FaceBox& b = clips[i].boxes[0];
        manifest["clips"].push_back({{"path", name},
                                     {"label", clips[i].label},
                                     {"box", {{"x", b.x}, {"y", b.y}, {"w", b.w}, {"h", b.h}}}});
    }
    std::string mpath = (fs::path(out_dir) / "clips.json").string();
    atomic_write(mpath, manifest.dump(2));
    write_manifest(mpath, pipeline_config_json(pc), seed);
}

void cmd_preprocess(const PipelineConfig& pc, const std::string& in, const std::string& box_file,
                    const std::string& out, const std::string& crop_out) {
    FrameSequence video = load_nnsv(in);
    BoundingBox box = box_from_json(read_text(box_file));
    PreprocessConfig cfg;
    cfg.stabilize = pc.stabilize;
    cfg.flow = pc.flow;
    cfg.hsv_max_magnitude = pc.hsv_max_magnitude;
    PreprocessResult res = preprocess_video(video, box, cfg);
    save_nnsv(out, res.hsv_flow);
    if (!crop_out.empty()) save_nnsv(crop_out, res.crop.crop);
    write_manifest(out, pipeline_config_json(pc), pc.seed);
}

void cmd_train_recognizer(const PipelineConfig& pc, const std::string& manifest,
                          const std::string& out, double val_fraction) {
    std::vector<ClipEntry> entries = read_clip_manifest(manifest);
    PreprocessConfig pcfg;
    pcfg.stabilize = pc.stabilize;
    pcfg.flow = pc.flow;
    pcfg.hsv_max_magnitude = pc.hsv_max_magnitude;
    std::vector<ClipTensor> clips;
    std::vector<int> labels;
    for (const ClipEntry& e : entries) {
        FrameSequence v = load_nnsv(e.path);
        PreprocessResult res = preprocess_video(v, e.box, pcfg);
        clips.push_back(clip_from_frames(res.hsv_flow, 0, res.hsv_flow.n_frames(),
                                         pc.recognizer.input_size));
        labels.push_back(e.label);
    }
    size_t n_val = size_t(double(clips.size()) * val_fraction);
    RecognizerConfig rc = pc.recognizer;
    rc.n_frames = clips.empty() ? rc.n_frames : clips[0].frames;
    RecognizerModel model;
    if (n_val > 0 && n_val < clips.size()) {
        std::vector<ClipTensor> tr(clips.begin(), clips.end() - long(n_val));
        std::vector<int> trl(labels.begin(), labels.end() - long(n_val));
        std::vector<ClipTensor> va(clips.end() - long(n_val), clips.end());
        std::vector<int> val(labels.end() - long(n_val), labels.end());
        model = train_recognizer(tr, trl, rc, &va, &val);
    } else {
        model = train_recognizer(clips, labels, rc);
    }
    save_recognizer(out, model);
    write_manifest(out, pipeline_config_json(pc), rc.seed);
}

void cmd_classify(const std::string& model_path, const std::string& in, int window, int stride,
                  const std::string& out, const std::string& features_out) {
    RecognizerModel model = load_recognizer(model_path);
    FrameSequence video = load_nnsv(in, model.cfg.in_channels);
    std::vector<double> scores = classify_windows(model, video, window, stride);
    write_scores_csv(out, scores, window, stride, video.fps);
    if (!features_out.empty()) {
        FeatureSequence f = extract_features(model, video, window, stride);
        save_nnsx(features_out, f.rows);
    }
}

void cmd_extract_features(const std::string& model_path, const std::string& in, int window,
                          int stride, const std::string& out) {
    RecognizerModel model = load_recognizer(model_path);
    FrameSequence video = load_nnsv(in, model.cfg.in_channels);
    FeatureSequence f = extract_features(model, video, window, stride);
    save_nnsx(out, f.rows);
}

void cmd_train_segmenter(const PipelineConfig& pc, const std::vector<std::string>& feature_files,
                         const std::vector<std::string>& annotation_files, double duration,
                         int window, int stride, double fps, const std::string& out) {
    if (feature_files.size() != annotation_files.size() || feature_files.empty())
        throw std::invalid_argument("train-segmenter: need matching feature/annotation lists");
    std::vector<FeatureSequence> feats;
    std::vector<std::vector<uint8_t>> labels;
    for (size_t i = 0; i < feature_files.size(); ++i) {
        FeatureSequence f;
        f.rows = load_nnsx(feature_files[i]);
        f.window_frames = window;
        f.stride_frames = stride;
        f.fps = fps;
        EventTrack track = load_annotation_csv(annotation_files[i], duration);
        std::vector<uint8_t> l = labels_to_steps(track, window, stride, fps);
        if (l.size() != f.rows.size())
            throw std::invalid_argument("train-segmenter: feature/label length mismatch in " +
                                        feature_files[i]);
        feats.push_back(std::move(f));
        labels.push_back(std::move(l));
    }
    TcnConfig tc = pc.segmenter;
    tc.in_dim = int(feats[0].rows[0].size());
    TcnModel model = tcn_train(feats, labels, tc);
    save_tcn(out, model);
    write_manifest(out, pipeline_config_json(pc), tc.seed);
}

void cmd_segment(const std::string& method, double threshold, const std::string& scores_file,
                 const std::string& model_path, const std::string& features_file, int window,
                 int stride, double fps, double duration, double merge_gap, double min_duration,
                 const std::string& out, const std::string& steps_csv, const std::string& svg,
                 const std::string& gt_csv) {
    StepSeries steps;
    double offset = 0.0;
    if (method == "tcn") {
        if (model_path.empty() || features_file.empty())
            throw std::invalid_argument("segment: --method tcn needs --model and --features");
        TcnModel model = load_tcn(model_path);
        FeatureSequence f;
        f.rows = load_nnsx(features_file);
        auto probs = tcn_forward(model, f);
        steps.step_s = double(stride) / fps;
        for (const auto& p : probs) {
            steps.scores.push_back(double(p[1]));
            steps.labels.push_back(p[1] >= threshold ? 1 : 0);
        }
        offset = double(window / 2) / fps;  // steps are window-center aligned
    } else {
        if (scores_file.empty()) throw std::invalid_argument("segment: needs --scores");
        ConfidenceSequence seq = read_scores_csv(scores_file);
        if (method == "tiled") steps = aggregate_tiled(seq, threshold);
        else if (method == "sliding") steps = aggregate_sliding(seq, threshold);
        else if (method == "smoothed") steps = aggregate_smoothed(seq, threshold);
        else throw std::invalid_argument("segment: unknown method " + method);
    }
    double dur = duration > 0.0 ? duration
                                : offset + double(steps.labels.size()) * steps.step_s;
    EventTrack events = segment(steps.labels, steps.step_s, offset, dur, merge_gap, min_duration);
    atomic_write(out, events_to_json(events));
    if (!steps_csv.empty()) write_steps_csv(steps_csv, steps);
    if (!svg.empty()) {
        EventTrack gt;
        bool has_gt = !gt_csv.empty();
        if (has_gt) gt = load_annotation_csv(gt_csv, dur);
        write_svg_timeline(svg, steps, events, has_gt ? &gt : nullptr);
    }
}

void cmd_eval_seg(const std::string& gt_list, const std::string& pred_list, double duration,
                  const std::string& iou_list, const std::string& out) {
    auto gts = split_list(gt_list);
    auto preds = split_list(pred_list);
    if (gts.size() != preds.size() || gts.empty())
        throw std::invalid_argument("eval seg: need matching --gt/--pred lists");
    std::vector<EventTrack> gt, pred;
    for (size_t i = 0; i < gts.size(); ++i) {
        gt.push_back(load_annotation_csv(gts[i], duration));
        pred.push_back(events_from_json(read_text(preds[i]), duration));
    }
    json rep;
    rep["n_subjects"] = gt.size();
    rep["pooling"] = "per-subject TP/FP/FN pooled before the cross-subject mean";
    for (const std::string& ts : split_list(iou_list)) {
        double t = std::stod(ts);
        ApArReport r = ap_ar(gt, pred, t);
        json subj = json::array();
        for (const EventScore& s : r.per_subject)
            subj.push_back({{"tp", s.tp}, {"fp", s.fp}, {"fn", s.fn},
                            {"precision", s.precision}, {"recall", s.recall},
                            {"degenerate", s.degenerate}});
        rep["iou_" + ts] = {{"ap", r.ap}, {"ar", r.ar}, {"per_subject", subj}};
    }
    atomic_write(out, rep.dump(2));
}

void cmd_eval_clf(const std::string& scores_file, const std::string& labels_file, double threshold,
                  const std::string& out) {
    ConfidenceSequence seq = read_scores_csv(scores_file);
    std::vector<int> labels;
    {
        std::stringstream ss(read_text(labels_file));
        std::string line;
        while (std::getline(ss, line)) {
            if (line.empty() || !std::isdigit(static_cast<unsigned char>(line[0]))) continue;
            labels.push_back(std::stoi(line));
        }
    }
    ClipMetrics m = clip_metrics(seq.scores, labels, threshold);
    json rep{{"threshold", threshold}, {"tp", m.tp}, {"fp", m.fp}, {"fn", m.fn}, {"tn", m.tn},
             {"accuracy", m.accuracy}, {"precision", m.precision}, {"recall", m.recall},
             {"f1", m.f1}, {"degenerate_precision", m.degenerate_precision},
             {"degenerate_recall", m.degenerate_recall}};
    atomic_write(out, rep.dump(2));
}

void cmd_eval_kappa(const std::string& a_csv, const std::string& b_csv, double duration,
                    double window, const std::string& out) {
    EventTrack a = load_annotation_csv(a_csv, duration);
    EventTrack b = load_annotation_csv(b_csv, duration);
    KappaReport r = cohen_kappa(binarize(a, window).bits, binarize(b, window).bits);
    json rep{{"kappa", r.kappa}, {"p_observed", r.p_observed}, {"p_expected", r.p_expected},
             {"strength", r.strength}, {"degenerate", r.degenerate}, {"window_s", window}};
    atomic_write(out, rep.dump(2));
}

}  // namespace

int main(int argc, char** argv) {
    (void)worker_cap();  // sequential implementation; the cap is trivially respected

    CLI::App app{"Infant non-nutritive-sucking video detection pipeline"};
    app.require_subcommand(1);
    std::string config_path;
    app.add_option("--config", config_path, "Pipeline configuration JSON");

    // synth
    auto* synth = app.add_subcommand("synth", "Generate synthetic data");
    synth->require_subcommand(1);
    std::string sv_out = "video.nnsv";
    double sv_duration = 60.0;
    uint64_t sv_seed = 0;
    bool sv_jitter = false;
    auto* synth_video = synth->add_subcommand("video", "One long annotated video");
    synth_video->add_option("--out", sv_out, "Output NNSV path");
    synth_video->add_option("--duration", sv_duration, "Video length in seconds");
    synth_video->add_option("--seed", sv_seed, "Generation seed");
    synth_video->add_flag("--jitter", sv_jitter, "Enable camera jitter (challenging mode)");

    std::string sc_dir = "clips";
    int sc_pos = 10, sc_neg = 10;
    double sc_len = 2.5;
    uint64_t sc_seed = 0;
    bool sc_jitter = false;
    auto* synth_clips = synth->add_subcommand("clips", "Labeled fixed-length clips");
    synth_clips->add_option("--out-dir", sc_dir, "Output directory");
    synth_clips->add_option("--n-pos", sc_pos, "Positive clip count");
    synth_clips->add_option("--n-neg", sc_neg, "Negative clip count");
    synth_clips->add_option("--clip-len", sc_len, "Clip length in seconds");
    synth_clips->add_option("--seed", sc_seed, "Generation seed");
    synth_clips->add_flag("--jitter", sc_jitter, "Enable camera jitter (challenging mode)");

    // preprocess
    std::string pp_in, pp_box, pp_out = "flow.nnsv", pp_crop;
    auto* preprocess = app.add_subcommand("preprocess", "Stabilized crop + HSV flow encoding");
    preprocess->add_option("--in", pp_in, "Input NNSV video")->required();
    preprocess->add_option("--box-file", pp_box, "Initial face box JSON")->required();
    preprocess->add_option("--out", pp_out, "Output HSV-flow NNSV");
    preprocess->add_option("--crop-out", pp_crop, "Also write the stabilized crop NNSV");

    // train-recognizer
    std::string tr_manifest, tr_out = "recognizer.nnsm";
    double tr_val = 0.0;
    auto* train_rec = app.add_subcommand("train-recognizer", "Train the clip classifier");
    train_rec->add_option("--clips", tr_manifest, "clips.json manifest")->required();
    train_rec->add_option("--out", tr_out, "Output model path");
    train_rec->add_option("--val-fraction", tr_val, "Tail fraction held out for validation");

    // classify
    std::string cl_model, cl_in, cl_out = "scores.csv", cl_feat;
    int cl_window = 26, cl_stride = 5;
    auto* classify = app.add_subcommand("classify", "Window confidences from a trained model");
    classify->add_option("--model", cl_model, "Recognizer model")->required();
    classify->add_option("--in", cl_in, "HSV-flow NNSV video")->required();
    classify->add_option("--window", cl_window, "Window length in frames");
    classify->add_option("--stride", cl_stride, "Window stride in frames");
    classify->add_option("--out", cl_out, "Scores CSV");
    classify->add_option("--features", cl_feat, "Also dump per-window features (NNSX)");

    // extract-features
    std::string xf_model, xf_in, xf_out = "features.nnsx";
    int xf_window = 26, xf_stride = 1;
    auto* extract = app.add_subcommand("extract-features", "Per-window feature vectors");
    extract->add_option("--model", xf_model, "Recognizer model")->required();
    extract->add_option("--in", xf_in, "HSV-flow NNSV video")->required();
    extract->add_option("--window", xf_window, "Window length in frames");
    extract->add_option("--stride", xf_stride, "Window stride in frames");
    extract->add_option("--out", xf_out, "Output NNSX path");

    // train-segmenter
    std::string ts_features, ts_annotations, ts_out = "tcn.nnsm";
    double ts_duration = 60.0, ts_fps = 10.0;
    int ts_window = 26, ts_stride = 1;
    auto* train_seg = app.add_subcommand("train-segmenter", "Train the TCN segmenter");
    train_seg->add_option("--features", ts_features, "Comma-separated NNSX files")->required();
    train_seg->add_option("--annotations", ts_annotations, "Comma-separated annotation CSVs")
        ->required();
    train_seg->add_option("--duration", ts_duration, "Video length in seconds");
    train_seg->add_option("--window", ts_window, "Feature window length in frames");
    train_seg->add_option("--stride", ts_stride, "Feature window stride in frames");
    train_seg->add_option("--fps", ts_fps, "Video frame rate");
    train_seg->add_option("--out", ts_out, "Output model path");

    // segment
    std::string sg_method = "sliding", sg_scores, sg_model, sg_features;
    std::string sg_out = "events.json", sg_steps, sg_svg, sg_gt;
    double sg_threshold = 0.5, sg_fps = 10.0, sg_duration = 0.0;
    double sg_merge = 1.0, sg_min = 0.0;
    int sg_window = 26, sg_stride = 1;
    auto* segment_cmd = app.add_subcommand("segment", "Steps -> NNS events");
    segment_cmd->add_option("--method", sg_method, "tiled|sliding|smoothed|tcn");
    segment_cmd->add_option("--threshold", sg_threshold, "Confidence threshold");
    segment_cmd->add_option("--scores", sg_scores, "Scores CSV (aggregation methods)");
    segment_cmd->add_option("--model", sg_model, "TCN model (tcn method)");
    segment_cmd->add_option("--features", sg_features, "NNSX features (tcn method)");
    segment_cmd->add_option("--window", sg_window, "Feature window length (tcn method)");
    segment_cmd->add_option("--stride", sg_stride, "Feature window stride (tcn method)");
    segment_cmd->add_option("--fps", sg_fps, "Video frame rate (tcn method)");
    segment_cmd->add_option("--duration", sg_duration, "Video length; inferred when omitted");
    segment_cmd->add_option("--merge-gap", sg_merge, "Merge gaps shorter than this (seconds)");
    segment_cmd->add_option("--min-duration", sg_min, "Drop events shorter than this (seconds)");
    segment_cmd->add_option("--out", sg_out, "Events JSON");
    segment_cmd->add_option("--steps-csv", sg_steps, "Per-step CSV");
    segment_cmd->add_option("--svg", sg_svg, "SVG timeline");
    segment_cmd->add_option("--gt", sg_gt, "Ground-truth CSV for the SVG band");

    // eval
    auto* eval = app.add_subcommand("eval", "Metric reports");
    eval->require_subcommand(1);
    std::string es_gt, es_pred, es_iou = "0.1,0.3,0.5", es_out = "seg_report.json";
    double es_duration = 60.0;
    auto* eval_seg = eval->add_subcommand("seg", "Event-level AP/AR");
    eval_seg->add_option("--gt", es_gt, "Comma-separated ground-truth CSVs")->required();
    eval_seg->add_option("--pred", es_pred, "Comma-separated events JSONs")->required();
    eval_seg->add_option("--duration", es_duration, "Video length in seconds");
    eval_seg->add_option("--iou", es_iou, "Comma-separated IoU thresholds");
    eval_seg->add_option("--out", es_out, "Report JSON");

    std::string ec_scores, ec_labels, ec_out = "clf_report.json";
    double ec_threshold = 0.5;
    auto* eval_clf = eval->add_subcommand("clf", "Clip-classification metrics");
    eval_clf->add_option("--scores", ec_scores, "Scores CSV")->required();
    eval_clf->add_option("--labels", ec_labels, "One 0/1 label per line")->required();
    eval_clf->add_option("--threshold", ec_threshold, "Positive threshold (inclusive)");
    eval_clf->add_option("--out", ec_out, "Report JSON");

    std::string ek_a, ek_b, ek_out = "kappa_report.json";
    double ek_duration = 60.0, ek_window = 10.0;
    auto* eval_kappa = eval->add_subcommand("kappa", "Inter-rater agreement");
    eval_kappa->add_option("--a", ek_a, "First rater annotation CSV")->required();
    eval_kappa->add_option("--b", ek_b, "Second rater annotation CSV")->required();
    eval_kappa->add_option("--duration", ek_duration, "Video length in seconds");
    eval_kappa->add_option("--window", ek_window, "Binarization window in seconds");
    eval_kappa->add_option("--out", ek_out, "Report JSON");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        PipelineConfig pc;
        if (!config_path.empty()) pc = load_pipeline_config(config_path);

        if (synth_video->parsed()) cmd_synth_video(pc, sv_out, sv_duration, sv_seed, sv_jitter);
        else if (synth_clips->parsed())
            cmd_synth_clips(pc, sc_dir, sc_pos, sc_neg, sc_len, sc_seed, sc_jitter);
        else if (preprocess->parsed()) cmd_preprocess(pc, pp_in, pp_box, pp_out, pp_crop);
        else if (train_rec->parsed()) cmd_train_recognizer(pc, tr_manifest, tr_out, tr_val);
        else if (classify->parsed())
            cmd_classify(cl_model, cl_in, cl_window, cl_stride, cl_out, cl_feat);
        else if (extract->parsed()) cmd_extract_features(xf_model, xf_in, xf_window, xf_stride, xf_out);
        else if (train_seg->parsed())
            cmd_train_segmenter(pc, split_list(ts_features), split_list(ts_annotations),
                                ts_duration, ts_window, ts_stride, ts_fps, ts_out);
        else if (segment_cmd->parsed())
            cmd_segment(sg_method, sg_threshold, sg_scores, sg_model, sg_features, sg_window,
                        sg_stride, sg_fps, sg_duration, sg_merge, sg_min, sg_out, sg_steps, sg_svg,
                        sg_gt);
        else if (eval_seg->parsed()) cmd_eval_seg(es_gt, es_pred, es_duration, es_iou, es_out);
        else if (eval_clf->parsed()) cmd_eval_clf(ec_scores, ec_labels, ec_threshold, ec_out);
        else if (eval_kappa->parsed()) cmd_eval_kappa(ek_a, ek_b, ek_duration, ek_window, ek_out);
    } catch (const ParseError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}
