#pragma once

#include <string>
#include <vector>

#include "nns/timeline.hpp"

namespace nns {

// Chance-corrected inter-rater agreement for two binary sequences.
struct KappaReport {
    double kappa = 0.0;
    double p_observed = 0.0;
    double p_expected = 0.0;
    std::string strength;    // none/minimal/weak/moderate/strong/almost perfect
    bool degenerate = false; // expected agreement is 1 (both raters constant)
};

KappaReport cohen_kappa(const std::vector<uint8_t>& a, const std::vector<uint8_t>& b);
std::string kappa_strength(double kappa);

// Thresholded binary classification metrics (score >= threshold is positive).
struct ClipMetrics {
    long tp = 0, fp = 0, fn = 0, tn = 0;
    double accuracy = 0.0, precision = 0.0, recall = 0.0, f1 = 0.0;
    bool degenerate_precision = false;  // no positive predictions
    bool degenerate_recall = false;     // no positive labels
};

ClipMetrics clip_metrics(const std::vector<double>& scores, const std::vector<int>& labels,
                         double threshold);

// Greedy one-to-one event matching by descending interval IoU; ties prefer the
// earlier ground-truth start, then the earlier predicted start.
struct EventMatch {
    size_t gt_index, pred_index;
    double iou;
};
std::vector<EventMatch> match_events(const EventTrack& gt, const EventTrack& pred,
                                     double iou_threshold);

// Event-level precision/recall for one recording.
struct EventScore {
    long tp = 0, fp = 0, fn = 0;
    double precision = 0.0, recall = 0.0;
    bool degenerate = false;  // no events on one side; empty-vs-empty scores 1
};
EventScore event_score(const EventTrack& gt, const EventTrack& pred, double iou_threshold);

// Pooled TP/FP/FN over one subject's clips before computing precision/recall.
EventScore subject_score(const std::vector<EventTrack>& gt_clips,
                         const std::vector<EventTrack>& pred_clips, double iou_threshold);

// Unweighted mean of per-recording precision (AP) and recall (AR).
struct ApArReport {
    double ap = 0.0, ar = 0.0;
    std::vector<EventScore> per_subject;
};
ApArReport ap_ar(const std::vector<EventTrack>& gt, const std::vector<EventTrack>& pred,
                 double iou_threshold);

// Same, with several clips per subject pooled via subject_score.
ApArReport ap_ar_grouped(const std::vector<std::vector<EventTrack>>& gt_by_subject,
                         const std::vector<std::vector<EventTrack>>& pred_by_subject,
                         double iou_threshold);

}  // namespace nns
