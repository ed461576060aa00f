#pragma once

#include <optional>
#include <string>
#include <vector>

namespace nns {

// One NNS burst: a half-open time interval [start_s, end_s).
struct Event {
    double start_s = 0.0;
    double end_s = 0.0;
    std::optional<double> confidence;

    double length_s() const { return end_s - start_s; }
};

// Ordered, non-overlapping events over a [0, duration_s] horizon.
struct EventTrack {
    std::vector<Event> events;
    double duration_s = 0.0;

    // Throws std::invalid_argument on any invariant violation.
    void validate() const;
};

// Uniform-window binarization of a track.
struct BinaryTimeline {
    double window_s = 0.0;
    std::vector<uint8_t> bits;
    double duration_s = 0.0;
};

// Bit k is set iff window [k*w, (k+1)*w) has nonzero-length intersection
// with at least one event. The final partial window is kept.
BinaryTimeline binarize(const EventTrack& track, double window_s);

// |a ∩ b| / |a ∪ b|; 0 when disjoint.
double interval_iou(const Event& a, const Event& b);

// Maximal runs of positive steps become events; gaps < merge_gap_s are
// merged; events shorter than min_duration_s are dropped.
EventTrack extract_events(const std::vector<uint8_t>& labels, double step_s,
                          double merge_gap_s = 1.0, double min_duration_s = 0.0);

}  // namespace nns
