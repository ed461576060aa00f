// End-to-end acceptance gate. Each criterion prints one PASS/FAIL line with
// the measured quantities; the process exits nonzero if any criterion fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "nns/config.hpp"
#include "nns/io.hpp"
#include "nns/metrics.hpp"
#include "nns/pipeline.hpp"
#include "nns/segmenter.hpp"

using namespace nns;
using Clock = std::chrono::steady_clock;

namespace {

// ---- pinned tolerances and scales -------------------------------------------
constexpr double kClipAccuracyMin = 0.95;        // criterion 1
constexpr double kClipTrainBudgetS = 1800.0;     // criterion 1: <= 30 min
constexpr double kChallengeGainMin = 0.10;       // criterion 2
constexpr double kSegApMin = 0.90;               // criterion 3 (IoU 0.1, sliding)
constexpr double kSegArMin = 0.85;               // criterion 3
constexpr double kLossTol = 1e-4;                // criterion 6
constexpr double kGradRelTol = 1e-4;             // criterion 6
constexpr double kKappaTarget = 0.83;            // criterion 7
constexpr double kKappaTol = 0.01;               // criterion 7
constexpr double kFlowEpeMax = 0.25;             // criterion 8
constexpr double kFlowZeroTol = 1e-6;            // criterion 8
constexpr double kStabilizeRatioMax = 0.5;       // criterion 9
constexpr int kOracleTrials = 1000;              // criterion 10

constexpr int kTrainPerClass = 200;  // criterion 1: 400 balanced training clips
constexpr int kTestPerClass = 50;    // criterion 1: 100 held-out clips
constexpr int kSegTrainVideos = 20;  // criterion 3
constexpr int kSegTestVideos = 10;   // criterion 3
constexpr double kVideoLenS = 60.0;  // criterion 3

struct Criterion {
    int id;
    bool pass;
    std::string detail;
};
std::vector<Criterion> g_results;

void report(int id, bool pass, const std::string& detail) {
    g_results.push_back({id, pass, detail});
    std::fprintf(stderr, "[acceptance] criterion %d computed: %s\n", id,
                 pass ? "pass" : "FAIL");
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return std::string(buf);
}

double now_minus(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// ---- shared clip-classification artifacts ------------------------------------
// The classifier consumes 26-frame HSV-encoded dense-flow clips computed on the
// rendered frames; camera jitter therefore stays visible to the model.
ClipTensor clip_tensor(const LabeledClip& clip, int input_size) {
    FrameSequence hsv = flow_video(clip.video);
    return clip_from_frames(hsv, 0, hsv.n_frames(), input_size);
}

ClipDataset build_dataset(const SynthConfig& cfg, int per_class, int input_size) {
    ClipDataset out;
    std::vector<LabeledClip> raw = gen_clip_dataset(cfg, per_class, per_class, 2.5);
    for (const LabeledClip& c : raw) {
        out.clips.push_back(clip_tensor(c, input_size));
        out.labels.push_back(c.label);
    }
    return out;
}

double accuracy(const RecognizerModel& model, const ClipDataset& ds) {
    int ok = 0;
    for (size_t i = 0; i < ds.clips.size(); ++i)
        ok += (model.forward(ds.clips[i])[1] >= 0.5f ? 1 : 0) == ds.labels[i];
    return double(ok) / double(ds.clips.size());
}

SynthConfig synth_cfg(uint64_t seed, bool jitter) {
    SynthConfig c;
    c.seed = seed;
    if (jitter) c.jitter = JitterConfig{};
    return c;
}

RecognizerConfig recognizer_cfg() {
    RecognizerConfig rc;  // 3 conv blocks 8/16/32, bi-LSTM 64, feature 128
    rc.epochs = 50;
    rc.learning_rate = 1e-4;
    rc.batch_size = 16;
    rc.augment = true;
    rc.n_frames = 26;
    rc.seed = 7;
    return rc;
}

// ---- criterion 3 helpers ------------------------------------------------------
struct SegVideo {
    EventTrack gt;
    FrameSequence hsv;
};

SegVideo make_seg_video(uint64_t seed) {
    SynthConfig sc = synth_cfg(seed, false);
    SegVideo v;
    v.gt = gen_event_track(kVideoLenS, sc, seed);
    RenderedVideo rv = render_video(v.gt, sc, kVideoLenS);
    v.hsv = flow_video(rv.video);
    return v;
}

EventTrack tcn_events(const TcnModel& model, const FeatureSequence& feats, double threshold) {
    std::vector<std::array<float, 2>> probs = tcn_forward(model, feats);
    std::vector<uint8_t> labels;
    for (const auto& p : probs) labels.push_back(p[1] >= threshold ? 1 : 0);
    double step_s = double(feats.stride_frames) / feats.fps;
    double offset = double(feats.window_frames / 2) / feats.fps;
    return segment(labels, step_s, offset, kVideoLenS);
}

// ---- criteria 1 & 2 -----------------------------------------------------------
void run_clip_criteria(RecognizerModel& model_out) {
    std::fprintf(stderr, "[acceptance] building clip datasets...\n");
    const int input = recognizer_cfg().input_size;
    ClipDataset clean_train = build_dataset(synth_cfg(1001, false), kTrainPerClass, input);
    ClipDataset clean_test = build_dataset(synth_cfg(1002, false), kTestPerClass, input);
    ClipDataset jitter_train = build_dataset(synth_cfg(1004, true), kTrainPerClass / 2, input);
    ClipDataset jitter_test = build_dataset(synth_cfg(1003, true), kTestPerClass, input);

    std::fprintf(stderr, "[acceptance] training clean recognizer (400 clips, 50 epochs)...\n");
    Clock::time_point t0 = Clock::now();
    RecognizerConfig rc = recognizer_cfg();
    RecognizerModel model = train_recognizer(clean_train.clips, clean_train.labels, rc);
    double train_s = now_minus(t0);

    double acc_clean = accuracy(model, clean_test);
    bool c1 = acc_clean >= kClipAccuracyMin && train_s <= kClipTrainBudgetS;
    report(1, c1,
           fmt("clip classification: clean accuracy %.3f (need >= %.2f) on %zu held-out clips, "
               "training %.0f s (budget %.0f s)",
               acc_clean, kClipAccuracyMin, clean_test.clips.size(), train_s, kClipTrainBudgetS));

    // Criterion 2: jitter clips are harder; a 50/50 clean/jitter retrain recovers.
    double acc_jitter_before = accuracy(model, jitter_test);
    ClipDataset mix;
    // Keep the mix balanced: half of each class from the clean set + all jitter clips.
    for (int i = 0; i < kTrainPerClass / 2; ++i) {  // positives are stored first
        mix.clips.push_back(clean_train.clips[size_t(i)]);
        mix.labels.push_back(clean_train.labels[size_t(i)]);
        mix.clips.push_back(clean_train.clips[size_t(kTrainPerClass + i)]);
        mix.labels.push_back(clean_train.labels[size_t(kTrainPerClass + i)]);
    }
    mix.clips.insert(mix.clips.end(), jitter_train.clips.begin(), jitter_train.clips.end());
    mix.labels.insert(mix.labels.end(), jitter_train.labels.begin(), jitter_train.labels.end());
    std::fprintf(stderr, "[acceptance] training mixed recognizer...\n");
    RecognizerModel mixed = train_recognizer(mix.clips, mix.labels, rc);
    double acc_jitter_after = accuracy(mixed, jitter_test);
    bool c2 = acc_jitter_before < acc_clean &&
              acc_jitter_after - acc_jitter_before >= kChallengeGainMin;
    report(2, c2,
           fmt("challenging mode: jitter accuracy %.3f < clean %.3f, mixed retrain -> %.3f "
               "(gain %+.3f, need >= %.2f)",
               acc_jitter_before, acc_clean, acc_jitter_after,
               acc_jitter_after - acc_jitter_before, kChallengeGainMin));
    model_out = model;
}

// ---- criterion 3 --------------------------------------------------------------
void run_segmentation_criterion(const RecognizerModel& model) {
    std::fprintf(stderr, "[acceptance] preparing segmentation videos...\n");
    std::vector<SegVideo> train_videos, test_videos;
    for (int i = 0; i < kSegTrainVideos; ++i) train_videos.push_back(make_seg_video(2001 + i));
    for (int i = 0; i < kSegTestVideos; ++i) test_videos.push_back(make_seg_video(2101 + i));

    // Sliding aggregation at threshold 0.8, window 26, stride 5.
    std::vector<EventTrack> gt, pred_slide_pool;
    std::vector<StepSeries> slide_steps;
    for (const SegVideo& v : test_videos) {
        gt.push_back(v.gt);
        ConfidenceSequence seq;
        seq.scores = classify_windows(model, v.hsv, 26, 5);
        seq.window_frames = 26;
        seq.stride_frames = 5;
        seq.fps = v.hsv.fps;
        StepSeries steps = aggregate_sliding(seq, 0.8);
        pred_slide_pool.push_back(segment(steps.labels, steps.step_s, 0.0, kVideoLenS));
    }
    ApArReport slide01 = ap_ar(gt, pred_slide_pool, 0.1);
    ApArReport slide05 = ap_ar(gt, pred_slide_pool, 0.5);

    // TCN trained on held-in videos, evaluated on the same held-out set.
    std::fprintf(stderr, "[acceptance] training TCN segmenter...\n");
    std::vector<FeatureSequence> feats;
    std::vector<std::vector<uint8_t>> labels;
    for (const SegVideo& v : train_videos) {
        FeatureSequence f = extract_features(model, v.hsv, 26, 1);
        labels.push_back(labels_to_steps(v.gt, 26, 1, v.hsv.fps));
        feats.push_back(std::move(f));
    }
    TcnConfig tc;  // layers 10, channels 64, in_dim 128, 100 epochs, lr 5e-4
    tc.seed = 11;
    TcnModel tcn = tcn_train(feats, labels, tc);
    // Both methods binarize confidence at the same 0.8 operating point.
    std::vector<EventTrack> pred_tcn;
    for (const SegVideo& v : test_videos)
        pred_tcn.push_back(tcn_events(tcn, extract_features(model, v.hsv, 26, 1), 0.8));
    ApArReport tcn01 = ap_ar(gt, pred_tcn, 0.1);
    ApArReport tcn05 = ap_ar(gt, pred_tcn, 0.5);

    double slide_drop = slide01.ap - slide05.ap;
    double tcn_drop = tcn01.ap - tcn05.ap;
    bool c3 = slide01.ap >= kSegApMin && slide01.ar >= kSegArMin && tcn_drop < slide_drop;
    report(3, c3,
           fmt("segmentation: sliding@0.8 AP0.1 %.3f (>= %.2f) AR0.1 %.3f (>= %.2f); "
               "AP drop 0.1->0.5: TCN %.3f < sliding %.3f",
               slide01.ap, kSegApMin, slide01.ar, kSegArMin, tcn_drop, slide_drop));
}

// ---- criterion 4 --------------------------------------------------------------
void run_window_arithmetic() {
    RecognizerConfig rc;
    rc.input_size = 8;
    rc.conv_channels = {2, 2, 2};
    rc.hidden = 2;
    rc.feature_dim = 4;
    rc.n_frames = 26;
    rc.seed = 5;
    RecognizerModel net;
    net.cfg = rc;
    net.init(rc.seed);
    FrameSequence video;
    video.height = 8;
    video.width = 8;
    video.channels = 3;
    video.fps = 10.0;
    std::mt19937_64 rng(6);
    video.data.resize(size_t(600) * 8 * 8 * 3);
    for (uint8_t& b : video.data) b = uint8_t(rng());
    size_t t1 = extract_features(net, video, 26, 1).rows.size();
    size_t t5 = extract_features(net, video, 26, 5).rows.size();
    bool c4 = t1 == 575 && t5 == 115;
    report(4, c4, fmt("window arithmetic: 600 frames -> %zu windows at stride 1 (need 575), "
                      "%zu at stride 5 (need 115)", t1, t5));
}

// ---- criterion 5 --------------------------------------------------------------
void run_receptive_field() {
    TcnConfig tc;
    tc.layers = 10;
    tc.channels = 4;
    tc.in_dim = 3;
    TcnNet<double> net;
    net.cfg = tc;
    net.init(3);
    net.linear_probe = true;
    const int T = 2100, t0 = 1050;
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<std::vector<double>> feats(T, std::vector<double>(3));
    for (auto& row : feats)
        for (double& x : row) x = u(rng);
    auto base = net.forward_logits(feats);
    feats[t0][0] += 1.0;
    auto pert = net.forward_logits(feats);
    auto differs = [&](int t) { return pert[size_t(t)][0] != base[size_t(t)][0] ||
                                       pert[size_t(t)][1] != base[size_t(t)][1]; };
    const int half = 1023;  // sum of dilations 2^0..2^9
    bool inside = differs(t0) && differs(t0 - half) && differs(t0 + half);
    bool outside = !differs(t0 - half - 1) && !differs(t0 + half + 1) &&
                   !differs(t0 - half - 17) && !differs(t0 + half + 17) &&
                   !differs(0) && !differs(T - 1);
    bool c5 = inside && outside;
    report(5, c5, fmt("receptive field: influence at +-%d around the perturbation (extreme "
                      "influenced steps %d apart, width %d = 2^(L+1)-1), none at +-%d",
                      half, 2 * half, 2 * half + 1, half + 1));
}

// ---- criterion 6 --------------------------------------------------------------
// The analytic smoothing-loss gradient treats the previous step's log-prob as a
// constant, so the finite-difference oracle freezes those values.
double frozen_tcn_eval(TcnNet<double>& net, const std::vector<std::vector<double>>& feats,
                       const std::vector<uint8_t>& labels,
                       const std::vector<std::array<double, 2>>& frozen_lp) {
    auto probs = net.forward(feats);
    size_t T = probs.size();
    double ce = 0.0, sm = 0.0;
    for (size_t t = 0; t < T; ++t) {
        ce += -std::log(std::max(probs[t][size_t(labels[t])], 1e-8));
        if (t > 0)
            for (int c = 0; c < 2; ++c) {
                double lp = std::log(std::max(probs[t][size_t(c)], 1e-8));
                double d = std::min(std::abs(lp - frozen_lp[t - 1][size_t(c)]),
                                    net.cfg.kappa_trunc);
                sm += d * d;
            }
    }
    return ce / double(T) + net.cfg.lambda_smooth * sm / (double(T) * 2.0);
}

bool tcn_grad_check(double kappa, double* worst) {
    TcnConfig tc;
    tc.layers = 2;
    tc.channels = 3;
    tc.in_dim = 4;
    tc.kappa_trunc = kappa;
    TcnNet<double> net;
    net.cfg = tc;
    net.init(9);
    const int T = 7;
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<std::vector<double>> feats(T, std::vector<double>(4));
    for (auto& row : feats)
        for (double& x : row) x = u(rng);
    std::vector<uint8_t> labels = {0, 1, 1, 0, 1, 0, 0};

    std::vector<std::array<double, 2>> frozen;
    for (const auto& p : net.forward(feats))
        frozen.push_back({std::log(std::max(p[0], 1e-8)), std::log(std::max(p[1], 1e-8))});

    for (Param<double>* p : net.params()) p->zero_grad();
    net.loss_and_grad(feats, labels);

    const double h = 1e-5;
    bool ok = true;
    for (Param<double>* p : net.params())
        for (size_t j = 0; j < p->w.size(); ++j) {
            double keep = p->w[j];
            p->w[j] = keep + h;
            double lp = frozen_tcn_eval(net, feats, labels, frozen);
            p->w[j] = keep - h;
            double lm = frozen_tcn_eval(net, feats, labels, frozen);
            p->w[j] = keep;
            double fd = (lp - lm) / (2.0 * h);
            double rel = std::abs(fd - p->g[j]) /
                         std::max({std::abs(fd), std::abs(p->g[j]), 1e-6});
            *worst = std::max(*worst, rel);
            ok = ok && rel < kGradRelTol;
        }
    return ok;
}

bool recognizer_grad_check(double* worst) {
    RecognizerConfig rc;
    rc.input_size = 8;
    rc.in_channels = 1;
    rc.conv_channels = {2, 3, 4};
    rc.hidden = 3;
    rc.feature_dim = 5;
    rc.n_frames = 3;
    RecognizerNet<double> net;
    net.cfg = rc;
    net.init(12);
    ClipTensor clip(3, 1, 8);
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<float> u(0.f, 1.f);
    for (float& x : clip.data) x = u(rng);
    const int label = 1;

    for (Param<double>* p : net.params()) p->zero_grad();
    net.loss_and_grad(clip, label);

    auto eval = [&]() {
        auto p = net.forward(clip);
        return -std::log(std::max(p[size_t(label)], 1e-12));
    };
    const double h = 1e-5;
    bool ok = true;
    for (Param<double>* p : net.params())
        for (size_t j = 0; j < p->w.size(); ++j) {
            double keep = p->w[j];
            p->w[j] = keep + h;
            double lp = eval();
            p->w[j] = keep - h;
            double lm = eval();
            p->w[j] = keep;
            double fd = (lp - lm) / (2.0 * h);
            double rel = std::abs(fd - p->g[j]) /
                         std::max({std::abs(fd), std::abs(p->g[j]), 1e-6});
            *worst = std::max(*worst, rel);
            ok = ok && rel < kGradRelTol;
        }
    return ok;
}

void run_loss_correctness() {
    // Hand example: T=2, probs [0.9,0.1],[0.5,0.5], labels [0,0], lambda 0.15, kappa 4.
    std::vector<std::array<double, 2>> probs = {{0.9, 0.1}, {0.5, 0.5}};
    std::vector<uint8_t> labels = {0, 0};
    double total = tcn_loss(probs, labels, 0.15, 4.0);
    const double expected = 0.5093457315;  // -(ln.9+ln.5)/2 + 0.15*(d0^2+d1^2)/4
    bool hand = std::abs(total - expected) < kLossTol;

    // lambda = 0 collapses to the mean cross-entropy.
    double ce = (-std::log(0.9) - std::log(0.5)) / 2.0;
    bool collapse = tcn_loss(probs, labels, 0.0, 4.0) == ce;

    double worst = 0.0;
    bool grads = recognizer_grad_check(&worst) && tcn_grad_check(4.0, &worst) &&
                 tcn_grad_check(0.05, &worst);  // 0.05 keeps the truncation active

    bool c6 = hand && collapse && grads;
    report(6, c6, fmt("loss correctness: hand example %.7f (expected %.7f), lambda=0 "
                      "collapse %s, worst gradient rel err %.2e (< %.0e)",
                      total, expected, collapse ? "exact" : "BROKEN", worst, kGradRelTol));
}

// ---- criterion 7 --------------------------------------------------------------
void run_kappa() {
    std::vector<uint8_t> id = {1, 0, 1, 0};
    bool h1 = cohen_kappa(id, id).kappa == 1.0;
    KappaReport opp = cohen_kappa({1, 1, 1, 1}, {0, 0, 0, 0});
    bool h2 = opp.kappa == 0.0 && opp.p_observed == 0.0 && opp.p_expected == 0.0;
    bool h3 = cohen_kappa({1, 1, 0, 0}, {1, 0, 0, 0}).kappa == 0.5;

    // Rater-pair construction: rater A = ground-truth 10 s binarization over
    // twenty 600 s synthetic tracks; rater B flips bits (fixed order) until
    // the pooled kappa is as close to 0.83 as the grid allows.
    std::vector<uint8_t> a;
    for (uint64_t seed = 1; seed <= 20; ++seed) {
        SynthConfig sc = synth_cfg(seed, false);
        BinaryTimeline bt = binarize(gen_event_track(600.0, sc, seed), 10.0);
        a.insert(a.end(), bt.bits.begin(), bt.bits.end());
    }
    std::vector<size_t> order(a.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), std::mt19937_64(99));
    std::vector<uint8_t> b = a;
    double best = 1e9, best_kappa = 0.0;
    for (size_t k = 0; k < order.size(); ++k) {
        double kap = cohen_kappa(a, b).kappa;
        if (std::abs(kap - kKappaTarget) < best) {
            best = std::abs(kap - kKappaTarget);
            best_kappa = kap;
        }
        if (kap < kKappaTarget - 0.05) break;
        b[order[k]] ^= 1;
    }
    bool c7 = h1 && h2 && h3 && best <= kKappaTol;
    report(7, c7, fmt("Cohen kappa: hand examples %s; construction reaches kappa %.4f "
                      "(target %.2f +- %.2f, %zu windows)",
                      (h1 && h2 && h3) ? "exact" : "BROKEN", best_kappa, kKappaTarget,
                      kKappaTol, a.size()));
}

// ---- criterion 8 --------------------------------------------------------------
ImageF blob_image(int h, int w, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ux(8.0, w - 8.0), uy(8.0, h - 8.0);
    std::uniform_real_distribution<double> ur(3.0, 7.0), ua(40.0, 120.0);
    struct Blob { double x, y, r, a; };
    std::vector<Blob> blobs;
    for (int i = 0; i < 8; ++i) blobs.push_back({ux(rng), uy(rng), ur(rng), ua(rng)});
    ImageF im(h, w, 60.f);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double v = 60.0;
            for (const Blob& b : blobs)
                v += b.a * std::exp(-((x - b.x) * (x - b.x) + (y - b.y) * (y - b.y)) /
                                    (2.0 * b.r * b.r));
            im.at(y, x) = float(std::min(v, 255.0));
        }
    return im;
}

void run_flow() {
    double worst_epe = 0.0;
    for (uint64_t seed : {31, 32, 33}) {
        ImageF prev = blob_image(64, 64, seed);
        ImageF next(64, 64);
        for (int y = 0; y < 64; ++y)
            for (int x = 0; x < 64; ++x)
                next.at(y, x) = sample_bilinear(prev, float(x) - 2.f, float(y));
        FlowField f = dense_flow(prev, next);
        double epe = 0.0;
        long n = 0;
        for (int y = 6; y < 58; ++y)
            for (int x = 6; x < 58; ++x) {
                double du = f.u_at(y, x) - 2.0, dv = f.v_at(y, x);
                epe += std::sqrt(du * du + dv * dv);
                ++n;
            }
        worst_epe = std::max(worst_epe, epe / double(n));
    }
    ImageF still = blob_image(48, 48, 34);
    FlowField z = dense_flow(still, still);
    float zmax = 0.f;
    for (size_t i = 0; i < z.u.size(); ++i)
        zmax = std::max({zmax, std::abs(z.u[i]), std::abs(z.v[i])});
    bool c8 = worst_epe < kFlowEpeMax && zmax < kFlowZeroTol;
    report(8, c8, fmt("optical flow: worst mean EPE %.3f px (< %.2f) on 2 px translations, "
                      "identical-frame max |flow| %.1e (< %.0e)",
                      worst_epe, kFlowEpeMax, zmax, kFlowZeroTol));
}

// ---- criterion 9 --------------------------------------------------------------
double center_variance(const std::vector<FaceBox>& gt, const std::vector<BoundingBox>& boxes) {
    std::vector<double> xs, ys;
    for (size_t f = 0; f < boxes.size(); ++f) {
        xs.push_back(gt[f].cx() - boxes[f].cx());
        ys.push_back(gt[f].cy() - boxes[f].cy());
    }
    double mx = 0, my = 0;
    for (size_t i = 0; i < xs.size(); ++i) { mx += xs[i]; my += ys[i]; }
    mx /= double(xs.size());
    my /= double(ys.size());
    double v = 0;
    for (size_t i = 0; i < xs.size(); ++i)
        v += (xs[i] - mx) * (xs[i] - mx) + (ys[i] - my) * (ys[i] - my);
    return v / double(xs.size());
}

void run_stabilization() {
    double raw_var = 0.0, stab_var = 0.0;
    for (uint64_t seed : {1, 3, 5}) {
        SynthConfig sc = synth_cfg(seed, true);  // jitter amplitude 4 px, period 2 s
        EventTrack track = gen_event_track(30.0, sc, seed);
        RenderedVideo rv = render_video(track, sc, 30.0);
        BoundingBox init{rv.boxes[0].x, rv.boxes[0].y, rv.boxes[0].w, rv.boxes[0].h};
        StabilizedCrop crop = stabilized_crop(rv.video, init);
        raw_var += center_variance(rv.boxes, crop.raw_boxes);
        stab_var += center_variance(rv.boxes, crop.boxes);
    }
    double ratio = stab_var / raw_var;
    bool c9 = ratio <= kStabilizeRatioMax;
    report(9, c9, fmt("stabilization: crop-relative face-center variance ratio %.2f "
                      "(need <= %.2f; pooled over 3 jitter videos)", ratio, kStabilizeRatioMax));
}

// ---- criterion 10 -------------------------------------------------------------
// Exhaustive maximal-matching oracle over the IoU-sorted candidate list.
std::vector<EventMatch> oracle_match(const EventTrack& gt, const EventTrack& pred,
                                     double threshold) {
    struct Cand { size_t g, p; double iou; };
    std::vector<Cand> cands;
    for (size_t g = 0; g < gt.events.size(); ++g)
        for (size_t p = 0; p < pred.events.size(); ++p) {
            double iou = interval_iou(gt.events[g], pred.events[p]);
            if (iou >= threshold) cands.push_back({g, p, iou});
        }
    std::sort(cands.begin(), cands.end(), [&](const Cand& a, const Cand& b) {
        if (a.iou != b.iou) return a.iou > b.iou;
        double gs_a = gt.events[a.g].start_s, gs_b = gt.events[b.g].start_s;
        if (gs_a != gs_b) return gs_a < gs_b;
        return pred.events[a.p].start_s < pred.events[b.p].start_s;
    });
    size_t nc = cands.size();
    std::vector<size_t> best;  // lexicographically smallest maximal matching
    bool have = false;
    for (size_t mask = 0; mask < (size_t(1) << nc); ++mask) {
        std::vector<size_t> pick;
        std::vector<bool> gu(gt.events.size()), pu(pred.events.size());
        bool valid = true;
        for (size_t i = 0; i < nc && valid; ++i)
            if (mask >> i & 1) {
                if (gu[cands[i].g] || pu[cands[i].p]) valid = false;
                else { gu[cands[i].g] = pu[cands[i].p] = true; pick.push_back(i); }
            }
        if (!valid) continue;
        bool maximal = true;
        for (size_t i = 0; i < nc; ++i)
            if (!gu[cands[i].g] && !pu[cands[i].p]) { maximal = false; break; }
        if (!maximal) continue;
        if (!have || pick < best) { best = pick; have = true; }
    }
    std::vector<EventMatch> out;
    for (size_t i : best) out.push_back({cands[i].g, cands[i].p, cands[i].iou});
    return out;
}

EventTrack random_track(std::mt19937_64& rng, int max_events) {
    std::uniform_int_distribution<int> nu(0, max_events);
    std::uniform_real_distribution<double> su(0.0, 16.0), lu(0.5, 4.0);
    int n = nu(rng);
    std::vector<Event> ev;
    for (int i = 0; i < n; ++i) {
        double s = su(rng);
        ev.push_back({s, s + lu(rng), std::nullopt});
    }
    std::sort(ev.begin(), ev.end(), [](const Event& a, const Event& b) {
        return a.start_s < b.start_s;
    });
    EventTrack t;
    t.duration_s = 25.0;
    double cursor = 0.0;
    for (Event& e : ev) {  // push events apart so the track is valid
        double shift = std::max(0.0, cursor - e.start_s);
        e.start_s += shift;
        e.end_s += shift;
        cursor = e.end_s + 0.05;
        if (e.end_s <= t.duration_s) t.events.push_back(e);
    }
    return t;
}

void run_metric_oracles() {
    Event a{0, 10, std::nullopt}, b{0, 10, std::nullopt}, c{20, 30, std::nullopt},
        d{5, 15, std::nullopt};
    bool iou_ok = interval_iou(a, b) == 1.0 && interval_iou(a, c) == 0.0 &&
                  interval_iou(a, d) == 5.0 / 15.0;

    std::mt19937_64 rng(77);
    int match_fail = 0;
    std::uniform_real_distribution<double> tu(0.05, 0.9);
    for (int trial = 0; trial < kOracleTrials; ++trial) {
        EventTrack gt = random_track(rng, 4), pred = random_track(rng, 4);
        double thr = tu(rng);
        std::vector<EventMatch> got = match_events(gt, pred, thr);
        std::vector<EventMatch> want = oracle_match(gt, pred, thr);
        if (got.size() != want.size()) { ++match_fail; continue; }
        for (size_t i = 0; i < got.size(); ++i)
            if (got[i].gt_index != want[i].gt_index || got[i].pred_index != want[i].pred_index)
                ++match_fail;
    }

    int mono_fail = 0;
    std::uniform_int_distribution<int> lenu(6, 40);
    for (int trial = 0; trial < kOracleTrials; ++trial) {
        ConfidenceSequence seq;
        seq.window_frames = 26;
        seq.stride_frames = 5;
        seq.fps = 10.0;
        int len = lenu(rng);
        std::uniform_real_distribution<double> su(0.0, 1.0);
        for (int i = 0; i < len; ++i) seq.scores.push_back(su(rng));
        double t1 = su(rng), t2 = su(rng);
        if (t1 > t2) std::swap(t1, t2);
        ConfidenceSequence tiled_seq = seq;  // tiled aggregation needs stride == window
        tiled_seq.stride_frames = tiled_seq.window_frames;
        using Agg = StepSeries (*)(const ConfidenceSequence&, double);
        struct Case { Agg agg; const ConfidenceSequence* seq; };
        for (Case c : {Case{aggregate_tiled, &tiled_seq}, Case{aggregate_sliding, &seq},
                       Case{aggregate_smoothed, &seq}}) {
            std::vector<uint8_t> lo = c.agg(*c.seq, t1).labels, hi = c.agg(*c.seq, t2).labels;
            for (size_t i = 0; i < lo.size(); ++i)
                if (hi[i] && !lo[i]) ++mono_fail;
        }
    }
    bool c10 = iou_ok && match_fail == 0 && mono_fail == 0;
    report(10, c10, fmt("metric oracles: interval IoU hand values %s; matcher vs brute force "
                        "%d/%d mismatches; aggregation monotonicity %d violations",
                        iou_ok ? "exact" : "BROKEN", match_fail, kOracleTrials, mono_fail));
}

// ---- criterion 11 -------------------------------------------------------------
template <class Net>
bool same_weights(const Net& a, const Net& b) {
    auto pa = a.params(), pb = b.params();
    if (pa.size() != pb.size()) return false;
    for (size_t i = 0; i < pa.size(); ++i)
        if (pa[i]->w != pb[i]->w) return false;
    return true;
}

void run_determinism_roundtrips() {
    bool gen_ok = true;
    {
        SynthConfig sc = synth_cfg(55, true);
        std::vector<LabeledClip> x = gen_clip_dataset(sc, 2, 2, 2.5);
        std::vector<LabeledClip> y = gen_clip_dataset(sc, 2, 2, 2.5);
        for (size_t i = 0; i < x.size(); ++i) gen_ok = gen_ok && x[i].video.data == y[i].video.data;
        EventTrack t = gen_event_track(20.0, sc, 55);
        gen_ok = gen_ok && render_video(t, sc, 20.0).video.data ==
                               render_video(t, sc, 20.0).video.data;
    }

    bool train_ok = true;
    {
        RecognizerConfig rc;
        rc.input_size = 8;
        rc.conv_channels = {2, 2, 2};
        rc.hidden = 2;
        rc.feature_dim = 4;
        rc.n_frames = 4;
        rc.epochs = 3;
        rc.batch_size = 2;
        rc.seed = 21;
        std::mt19937_64 rng(22);
        std::uniform_real_distribution<float> u(0.f, 1.f);
        std::vector<ClipTensor> clips;
        std::vector<int> labels;
        for (int i = 0; i < 6; ++i) {
            ClipTensor c(4, 3, 8);
            for (float& x : c.data) x = u(rng);
            clips.push_back(c);
            labels.push_back(i % 2);
        }
        train_ok = same_weights(train_recognizer(clips, labels, rc),
                                train_recognizer(clips, labels, rc));

        TcnConfig tc;
        tc.layers = 3;
        tc.channels = 4;
        tc.in_dim = 4;
        tc.epochs = 5;
        tc.seed = 23;
        FeatureSequence f;
        f.rows.assign(20, std::vector<float>(4));
        for (auto& row : f.rows)
            for (float& x : row) x = u(rng);
        std::vector<uint8_t> tl(20);
        for (size_t i = 0; i < tl.size(); ++i) tl[i] = uint8_t(i / 5 % 2);
        train_ok = train_ok && same_weights(tcn_train({f}, {tl}, tc), tcn_train({f}, {tl}, tc));
    }

    bool rt_ok = true;
    {
        namespace fs = std::filesystem;
        fs::path dir = fs::temp_directory_path() / "nns_acceptance_rt";
        fs::create_directories(dir);
        std::mt19937_64 rng(24);

        FrameSequence v;
        v.height = 6;
        v.width = 5;
        v.channels = 3;
        v.fps = 12.5;
        v.data.resize(size_t(4) * 6 * 5 * 3);
        for (uint8_t& x : v.data) x = uint8_t(rng());
        save_nnsv((dir / "v.nnsv").string(), v);
        FrameSequence v2 = load_nnsv((dir / "v.nnsv").string(), 3);
        rt_ok = rt_ok && v2.data == v.data && v2.width == v.width && v2.fps == v.fps;

        std::vector<FlowField> flows(2, FlowField(3, 4));
        std::uniform_real_distribution<float> fu(-3.f, 3.f);
        for (FlowField& f : flows) {
            for (float& x : f.u) x = fu(rng);
            for (float& x : f.v) x = fu(rng);
        }
        save_nnsf((dir / "f.nnsf").string(), flows, 10.0);
        std::vector<FlowField> flows2 = load_nnsf((dir / "f.nnsf").string());
        rt_ok = rt_ok && flows2.size() == 2 && flows2[0].u == flows[0].u &&
                flows2[1].v == flows[1].v;

        std::vector<std::vector<float>> mat(3, std::vector<float>(5));
        for (auto& row : mat)
            for (float& x : row) x = fu(rng);
        save_nnsx((dir / "x.nnsx").string(), mat);
        rt_ok = rt_ok && load_nnsx((dir / "x.nnsx").string()) == mat;

        std::vector<NamedTensor> tensors = {{"w", {2, 2}, {1.f, 2.f, 3.f, 4.f}}};
        save_nnsm((dir / "m.nnsm").string(), "{\"k\":1}", tensors);
        auto [cfg, t2] = load_nnsm((dir / "m.nnsm").string());
        rt_ok = rt_ok && cfg == "{\"k\":1}" && t2.size() == 1 && t2[0].data == tensors[0].data;

        EventTrack tr;
        tr.duration_s = 10.0;
        tr.events = {{0.5, 2.0, 0.75}, {4.0, 6.0, std::nullopt}};
        save_annotation_csv((dir / "a.csv").string(), tr);
        EventTrack tr2 = load_annotation_csv((dir / "a.csv").string(), 10.0);
        rt_ok = rt_ok && tr2.events.size() == 2 && tr2.events[0].start_s == 0.5 &&
                tr2.events[0].confidence && *tr2.events[0].confidence == 0.75;
        EventTrack tr3 = events_from_json(events_to_json(tr), 10.0);
        rt_ok = rt_ok && tr3.events.size() == 2 && tr3.events[1].end_s == 6.0;
        fs::remove_all(dir);
    }

    bool c11 = gen_ok && train_ok && rt_ok;
    report(11, c11, fmt("determinism & round-trips: generation %s, training %s, "
                        "file formats %s",
                        gen_ok ? "bit-identical" : "BROKEN",
                        train_ok ? "bit-identical" : "BROKEN", rt_ok ? "lossless" : "BROKEN"));
}

}  // namespace

int main() {
    Clock::time_point t0 = Clock::now();
    run_window_arithmetic();       // 4
    run_receptive_field();         // 5
    run_loss_correctness();        // 6
    run_kappa();                   // 7
    run_flow();                    // 8
    run_metric_oracles();          // 10
    run_determinism_roundtrips();  // 11
    run_stabilization();           // 9
    RecognizerModel model;
    run_clip_criteria(model);      // 1, 2
    run_segmentation_criterion(model);  // 3

    std::sort(g_results.begin(), g_results.end(),
              [](const Criterion& a, const Criterion& b) { return a.id < b.id; });
    bool all = true;
    for (const Criterion& c : g_results) {
        std::printf("criterion %2d: %s — %s\n", c.id, c.pass ? "PASS" : "FAIL",
                    c.detail.c_str());
        all = all && c.pass;
    }
    std::printf("acceptance: %zu/%zu criteria passed in %.0f s\n",
                size_t(std::count_if(g_results.begin(), g_results.end(),
                                     [](const Criterion& c) { return c.pass; })),
                g_results.size(), now_minus(t0));
    return all ? 0 : 1;
}
