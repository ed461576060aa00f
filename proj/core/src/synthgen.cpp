#include "nns/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nns {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Template geometry, parametric in m = min(frame_h, frame_w).
struct FaceGeom {
    double cx, cy;        // face center
    double rx, ry;        // face ellipse radii
    double eye_dx, eye_dy, eye_r;
    double mouth_dy, mouth_rx, mouth_base_h;

    static FaceGeom from(const SynthConfig& cfg) {
        double m = std::min(cfg.frame_h, cfg.frame_w);
        FaceGeom g;
        g.cx = cfg.frame_w / 2.0;
        g.cy = cfg.frame_h / 2.0;
        g.rx = 0.32 * m;
        g.ry = 0.40 * m;
        g.eye_dx = 0.13 * m;
        g.eye_dy = -0.15 * m;
        g.eye_r = 0.06 * m;
        g.mouth_dy = 0.20 * m;
        g.mouth_rx = 0.10 * m;
        g.mouth_base_h = 0.05 * m + cfg.mouth_amplitude_px;
        return g;
    }

    double mouth_max_extent() const { return mouth_dy + mouth_base_h * 2.0; }
};

// Antialiased coverage of an ellipse at a point: ~1 px soft edge.
inline double ellipse_cov(double x, double y, double ex, double ey, double rx, double ry) {
    double dx = (x - ex) / rx, dy = (y - ey) / ry;
    double d = std::sqrt(dx * dx + dy * dy);
    double k = std::min(rx, ry);
    double c = (1.0 - d) * k + 0.5;
    return c < 0.0 ? 0.0 : (c > 1.0 ? 1.0 : c);
}

// Template intensity at (x, y) for the given mouth half-height.
inline double template_value(const FaceGeom& g, double x, double y, double mouth_h) {
    double v = 30.0;
    double cf = ellipse_cov(x, y, g.cx, g.cy, g.rx, g.ry);
    v = v * (1.0 - cf) + 200.0 * cf;
    double ce = std::max(ellipse_cov(x, y, g.cx - g.eye_dx, g.cy + g.eye_dy, g.eye_r, g.eye_r),
                         ellipse_cov(x, y, g.cx + g.eye_dx, g.cy + g.eye_dy, g.eye_r, g.eye_r));
    v = v * (1.0 - ce) + 80.0 * ce;
    double cm = ellipse_cov(x, y, g.cx, g.cy + g.mouth_dy, g.mouth_rx, mouth_h);
    v = v * (1.0 - cm) + 60.0 * cm;
    return v;
}

}  // namespace

void SynthConfig::validate() const {
    if (!(fps > 0.0)) throw std::invalid_argument("SynthConfig: fps must be positive");
    if (!(suck_hz > 0.0)) throw std::invalid_argument("SynthConfig: suck_hz must be positive");
    if (sucks_per_burst_lo < 1 || sucks_per_burst_lo > sucks_per_burst_hi)
        throw std::invalid_argument("SynthConfig: bad sucks_per_burst range");
    if (mouth_amplitude_px < 0.0 || noise_sigma < 0.0)
        throw std::invalid_argument("SynthConfig: negative amplitude");
    if (jitter && (jitter->amplitude_px < 0.0 || !(jitter->period_s > 0.0)))
        throw std::invalid_argument("SynthConfig: bad jitter parameters");
}

EventTrack gen_event_track(double duration_s, const SynthConfig& cfg, uint64_t seed) {
    cfg.validate();
    if (!(duration_s > 0.0)) throw std::invalid_argument("gen_event_track: duration must be positive");

    Rng rng(seed);
    std::exponential_distribution<double> inter(cfg.bursts_per_minute / 60.0);

    EventTrack track;
    track.duration_s = duration_s;
    double prev_onset = 0.0, last_end = -1.0;
    bool first = true;
    while (true) {
        double onset = 0.0;
        int tries = 0;
        do {
            onset = prev_onset + inter(rng);
            if (++tries > 1000) { onset = last_end + 1.0; break; }
        } while (!first && onset < last_end + 1.0);  // inter-event gap >= 1 s
        if (onset >= duration_s) break;

        double dur = double(uniform_int(rng, cfg.sucks_per_burst_lo, cfg.sucks_per_burst_hi)) / cfg.suck_hz;
        double end = std::min(onset + dur, duration_s);
        if (end - onset < 0.5) break;  // clipped remnant at the horizon
        track.events.push_back({onset, end, std::nullopt});
        prev_onset = onset;
        last_end = end;
        first = false;
    }
    track.validate();
    return track;
}

std::vector<double> gen_motion_signal(const EventTrack& track, const SynthConfig& cfg,
                                      double duration_s) {
    track.validate();
    size_t n = size_t(std::llround(duration_s * cfg.fps));
    std::vector<double> sig(n, 0.0);
    for (const Event& e : track.events) {
        for (size_t f = 0; f < n; ++f) {
            double t = double(f) / cfg.fps;
            if (t >= e.start_s && t < e.end_s)
                sig[f] = cfg.mouth_amplitude_px * std::sin(2.0 * kPi * cfg.suck_hz * (t - e.start_s));
        }
    }
    return sig;
}

RenderedVideo render_video(const EventTrack& track, const SynthConfig& cfg, double duration_s) {
    cfg.validate();
    track.validate();
    FaceGeom g = FaceGeom::from(cfg);

    double jit_amp = cfg.jitter ? cfg.jitter->amplitude_px : 0.0;
    if (g.cx - g.rx - jit_amp < 0.0 || g.cx + g.rx + jit_amp > cfg.frame_w ||
        g.cy - g.ry < 0.0 || g.cy + std::max(g.ry, g.mouth_max_extent()) > cfg.frame_h)
        throw std::invalid_argument("render_video: face template does not fit frame");

    std::vector<double> motion = gen_motion_signal(track, cfg, duration_s);
    int n = int(motion.size());

    RenderedVideo out;
    out.video.height = cfg.frame_h;
    out.video.width = cfg.frame_w;
    out.video.channels = 1;
    out.video.fps = cfg.fps;
    out.video.data.resize(size_t(n) * cfg.frame_h * cfg.frame_w);
    out.boxes.resize(n);

    Rng noise_rng(cfg.seed);
    std::normal_distribution<double> noise(0.0, 1.0);

    for (int f = 0; f < n; ++f) {
        double t = double(f) / cfg.fps;
        double jx = cfg.jitter ? cfg.jitter->amplitude_px * std::sin(2.0 * kPi * t / cfg.jitter->period_s)
                               : 0.0;
        double mouth_h = g.mouth_base_h + motion[size_t(f)];

        uint8_t* px = out.video.frame(f);
        for (int y = 0; y < cfg.frame_h; ++y) {
            for (int x = 0; x < cfg.frame_w; ++x) {
                double v = template_value(g, double(x) - jx, double(y), mouth_h);
                if (cfg.noise_sigma > 0.0) v += cfg.noise_sigma * noise(noise_rng);
                v = std::round(v);
                px[size_t(y) * cfg.frame_w + x] = uint8_t(v < 0 ? 0 : (v > 255 ? 255 : v));
            }
        }

        double by0 = g.cy - g.ry;
        double by1 = g.cy + std::max(g.ry, g.mouth_max_extent());
        out.boxes[size_t(f)] = {g.cx - g.rx + jx, by0, 2.0 * g.rx, by1 - by0};
    }
    return out;
}

int clip_frames(double clip_len_s, double fps) {
    // The nominal 2.5 s window of 10 Hz footage is defined as 26 frames so
    // that a 600-frame minute yields exactly 575 stride-1 windows.
    if (std::abs(clip_len_s - 2.5) < 1e-9 && std::abs(fps - 10.0) < 1e-9) return 26;
    return std::max(1, int(std::llround(clip_len_s * fps)));
}

std::vector<LabeledClip> gen_clip_dataset(const SynthConfig& cfg, int n_pos, int n_neg,
                                          double clip_len_s) {
    if (n_pos < 0 || n_neg < 0) throw std::invalid_argument("gen_clip_dataset: negative counts");
    int frames = clip_frames(clip_len_s, cfg.fps);
    double dur = double(frames) / cfg.fps;

    std::vector<LabeledClip> clips;
    clips.reserve(size_t(n_pos + n_neg));
    for (int i = 0; i < n_pos + n_neg; ++i) {
        SynthConfig c = cfg;
        c.seed = cfg.seed + 0x100000001b3ULL * uint64_t(i + 1);
        EventTrack track;
        track.duration_s = dur;
        int label = i < n_pos ? 1 : 0;
        if (label) track.events.push_back({0.0, dur, std::nullopt});
        RenderedVideo rv = render_video(track, c, dur);
        clips.push_back({std::move(rv.video), std::move(rv.boxes), label});
    }
    return clips;
}

}  // namespace nns
