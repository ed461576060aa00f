#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "nns/common.hpp"
#include "nns/timeline.hpp"

namespace nns {

struct JitterConfig {
    double amplitude_px = 4.0;  // horizontal scene translation amplitude
    double period_s = 2.0;
};

struct SynthConfig {
    double fps = 10.0;
    double suck_hz = 2.0;
    int sucks_per_burst_lo = 6;
    int sucks_per_burst_hi = 12;
    double bursts_per_minute = 3.0;
    int frame_h = 96, frame_w = 96;
    double mouth_amplitude_px = 3.0;
    double noise_sigma = 2.0;
    std::optional<JitterConfig> jitter;  // challenging mode
    uint64_t seed = 0;

    void validate() const;
};

// Axis-aligned face box in pixel coordinates (top-left origin).
struct FaceBox {
    double x = 0, y = 0, w = 0, h = 0;
    double cx() const { return x + w / 2.0; }
    double cy() const { return y + h / 2.0; }
};

// Burst onsets from a renewal process targeting cfg.bursts_per_minute,
// with inter-event gaps >= 1 s. Deterministic given the seed argument.
EventTrack gen_event_track(double duration_s, const SynthConfig& cfg, uint64_t seed);

// Scalar oracle of the suck oscillation: amplitude * sin(2*pi*suck_hz*(t - onset))
// inside events, 0 outside.
std::vector<double> gen_motion_signal(const EventTrack& track, const SynthConfig& cfg,
                                      double duration_s);

struct RenderedVideo {
    FrameSequence video;
    std::vector<FaceBox> boxes;  // true face bounding box per frame
};

// Face template (bright ellipse, darker eyes, mouth blob whose vertical
// aperture oscillates during events) plus optional whole-scene jitter and
// Gaussian pixel noise.
RenderedVideo render_video(const EventTrack& track, const SynthConfig& cfg, double duration_s);

struct LabeledClip {
    FrameSequence video;
    std::vector<FaceBox> boxes;
    int label = 0;  // 1 = clip entirely NNS, 0 = no NNS
};

// Number of frames in a clip of the given nominal length. The standard
// 2.5 s window at 10 fps is defined as exactly 26 frames.
int clip_frames(double clip_len_s, double fps);

std::vector<LabeledClip> gen_clip_dataset(const SynthConfig& cfg, int n_pos, int n_neg,
                                          double clip_len_s = 2.5);

}  // namespace nns
