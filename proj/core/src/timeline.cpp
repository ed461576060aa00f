#include "nns/timeline.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nns {

void EventTrack::validate() const {
    if (duration_s < 0.0) throw std::invalid_argument("EventTrack: negative duration");
    for (size_t i = 0; i < events.size(); ++i) {
        const Event& e = events[i];
        if (!(e.start_s < e.end_s)) throw std::invalid_argument("Event: start_s must be < end_s");
        if (e.start_s < 0.0) throw std::invalid_argument("Event: negative start_s");
        if (e.end_s > duration_s + 1e-9)
            throw std::invalid_argument("Event: extends past track duration");
        if (i > 0 && events[i - 1].end_s > e.start_s + 1e-12)
            throw std::invalid_argument("EventTrack: overlapping or unsorted events");
    }
}

BinaryTimeline binarize(const EventTrack& track, double window_s) {
    if (!(window_s > 0.0)) throw std::invalid_argument("binarize: window_s must be positive");
    BinaryTimeline tl;
    tl.window_s = window_s;
    tl.duration_s = track.duration_s;
    size_t n = size_t(std::ceil(track.duration_s / window_s - 1e-12));
    tl.bits.assign(n, 0);
    for (const Event& e : track.events) {
        // Windows with nonzero-length intersection with [start, end).
        long k0 = long(std::floor(e.start_s / window_s + 1e-12));
        long k1 = long(std::ceil(e.end_s / window_s - 1e-12));
        k0 = std::max(k0, 0L);
        k1 = std::min(k1, long(n));
        for (long k = k0; k < k1; ++k) tl.bits[size_t(k)] = 1;
    }
    return tl;
}

double interval_iou(const Event& a, const Event& b) {
    double inter = std::min(a.end_s, b.end_s) - std::max(a.start_s, b.start_s);
    if (inter <= 0.0) return 0.0;
    double uni = std::max(a.end_s, b.end_s) - std::min(a.start_s, b.start_s);
    return inter / uni;
}

EventTrack extract_events(const std::vector<uint8_t>& labels, double step_s,
                          double merge_gap_s, double min_duration_s) {
    if (!(step_s > 0.0)) throw std::invalid_argument("extract_events: step_s must be positive");
    if (merge_gap_s < 0.0 || min_duration_s < 0.0)
        throw std::invalid_argument("extract_events: negative gap or duration threshold");

    EventTrack track;
    track.duration_s = step_s * double(labels.size());

    std::vector<Event> runs;
    size_t i = 0;
    while (i < labels.size()) {
        if (!labels[i]) { ++i; continue; }
        size_t j = i;
        while (j < labels.size() && labels[j]) ++j;
        runs.push_back({step_s * double(i), step_s * double(j), std::nullopt});
        i = j;
    }

    std::vector<Event> merged;
    for (const Event& r : runs) {
        if (!merged.empty() && r.start_s - merged.back().end_s < merge_gap_s - 1e-12)
            merged.back().end_s = r.end_s;
        else
            merged.push_back(r);
    }

    for (const Event& e : merged)
        if (e.length_s() >= min_duration_s - 1e-12) track.events.push_back(e);
    track.validate();
    return track;
}

}  // namespace nns
