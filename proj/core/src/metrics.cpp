#include "nns/metrics.hpp"

#include <algorithm>
#include <stdexcept>

namespace nns {

std::string kappa_strength(double k) {
    if (k <= 0.20) return "none";
    if (k < 0.40) return "minimal";
    if (k < 0.60) return "weak";
    if (k < 0.80) return "moderate";
    if (k <= 0.90) return "strong";
    return "almost perfect";
}

KappaReport cohen_kappa(const std::vector<uint8_t>& a, const std::vector<uint8_t>& b) {
    if (a.size() != b.size() || a.empty())
        throw std::invalid_argument("cohen_kappa: sequences must be non-empty and equal length");
    double n = double(a.size());
    long agree = 0, a1 = 0, b1 = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        int av = a[i] ? 1 : 0, bv = b[i] ? 1 : 0;
        agree += av == bv;
        a1 += av;
        b1 += bv;
    }
    KappaReport r;
    r.p_observed = double(agree) / n;
    double pa = double(a1) / n, pb = double(b1) / n;
    r.p_expected = pa * pb + (1.0 - pa) * (1.0 - pb);
    if (r.p_expected >= 1.0) {
        // Both raters constant: agreement carries no chance correction.
        r.degenerate = true;
        r.kappa = r.p_observed >= 1.0 ? 1.0 : 0.0;
    } else {
        r.kappa = (r.p_observed - r.p_expected) / (1.0 - r.p_expected);
    }
    r.strength = kappa_strength(r.kappa);
    return r;
}

ClipMetrics clip_metrics(const std::vector<double>& scores, const std::vector<int>& labels,
                         double threshold) {
    if (scores.size() != labels.size() || scores.empty())
        throw std::invalid_argument("clip_metrics: scores/labels must be non-empty, equal length");
    ClipMetrics m;
    for (size_t i = 0; i < scores.size(); ++i) {
        bool pred = scores[i] >= threshold;
        bool pos = labels[i] != 0;
        if (pred && pos) ++m.tp;
        else if (pred) ++m.fp;
        else if (pos) ++m.fn;
        else ++m.tn;
    }
    double n = double(scores.size());
    m.accuracy = double(m.tp + m.tn) / n;
    m.degenerate_precision = m.tp + m.fp == 0;
    m.degenerate_recall = m.tp + m.fn == 0;
    // Nothing predicted and nothing to find counts as perfect; otherwise an
    // empty denominator scores 0 (both cases flagged).
    m.precision = m.degenerate_precision ? (m.degenerate_recall ? 1.0 : 0.0)
                                         : double(m.tp) / double(m.tp + m.fp);
    m.recall = m.degenerate_recall ? (m.degenerate_precision ? 1.0 : 0.0)
                                   : double(m.tp) / double(m.tp + m.fn);
    m.f1 = m.precision + m.recall > 0.0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                                        : 0.0;
    return m;
}

std::vector<EventMatch> match_events(const EventTrack& gt, const EventTrack& pred,
                                     double iou_threshold) {
    std::vector<EventMatch> cands;
    for (size_t g = 0; g < gt.events.size(); ++g)
        for (size_t p = 0; p < pred.events.size(); ++p) {
            double iou = interval_iou(gt.events[g], pred.events[p]);
            if (iou >= iou_threshold) cands.push_back({g, p, iou});
        }
    std::sort(cands.begin(), cands.end(), [&](const EventMatch& x, const EventMatch& y) {
        if (x.iou != y.iou) return x.iou > y.iou;
        double xs = gt.events[x.gt_index].start_s, ys = gt.events[y.gt_index].start_s;
        if (xs != ys) return xs < ys;
        return pred.events[x.pred_index].start_s < pred.events[y.pred_index].start_s;
    });
    std::vector<char> gt_used(gt.events.size(), 0), pred_used(pred.events.size(), 0);
    std::vector<EventMatch> out;
    for (const EventMatch& c : cands) {
        if (gt_used[c.gt_index] || pred_used[c.pred_index]) continue;
        gt_used[c.gt_index] = pred_used[c.pred_index] = 1;
        out.push_back(c);
    }
    return out;
}

EventScore subject_score(const std::vector<EventTrack>& gt_clips,
                         const std::vector<EventTrack>& pred_clips, double iou_threshold) {
    if (gt_clips.size() != pred_clips.size() || gt_clips.empty())
        throw std::invalid_argument("subject_score: need matching non-empty clip lists");
    EventScore s;
    for (size_t i = 0; i < gt_clips.size(); ++i) {
        long tp = long(match_events(gt_clips[i], pred_clips[i], iou_threshold).size());
        s.tp += tp;
        s.fp += long(pred_clips[i].events.size()) - tp;
        s.fn += long(gt_clips[i].events.size()) - tp;
    }
    if (s.tp + s.fp == 0 && s.tp + s.fn == 0) {
        // Nothing to find and nothing claimed counts as a perfect subject.
        s.degenerate = true;
        s.precision = s.recall = 1.0;
        return s;
    }
    s.degenerate = s.tp + s.fp == 0 || s.tp + s.fn == 0;
    s.precision = s.tp + s.fp == 0 ? 0.0 : double(s.tp) / double(s.tp + s.fp);
    s.recall = s.tp + s.fn == 0 ? 0.0 : double(s.tp) / double(s.tp + s.fn);
    return s;
}

EventScore event_score(const EventTrack& gt, const EventTrack& pred, double iou_threshold) {
    return subject_score({gt}, {pred}, iou_threshold);
}

ApArReport ap_ar(const std::vector<EventTrack>& gt, const std::vector<EventTrack>& pred,
                 double iou_threshold) {
    if (gt.size() != pred.size() || gt.empty())
        throw std::invalid_argument("ap_ar: need matching non-empty track lists");
    ApArReport r;
    for (size_t i = 0; i < gt.size(); ++i) {
        r.per_subject.push_back(event_score(gt[i], pred[i], iou_threshold));
        r.ap += r.per_subject.back().precision;
        r.ar += r.per_subject.back().recall;
    }
    r.ap /= double(gt.size());
    r.ar /= double(gt.size());
    return r;
}

ApArReport ap_ar_grouped(const std::vector<std::vector<EventTrack>>& gt_by_subject,
                         const std::vector<std::vector<EventTrack>>& pred_by_subject,
                         double iou_threshold) {
    if (gt_by_subject.size() != pred_by_subject.size() || gt_by_subject.empty())
        throw std::invalid_argument("ap_ar_grouped: need matching non-empty subject lists");
    ApArReport r;
    for (size_t i = 0; i < gt_by_subject.size(); ++i) {
        r.per_subject.push_back(subject_score(gt_by_subject[i], pred_by_subject[i], iou_threshold));
        r.ap += r.per_subject.back().precision;
        r.ar += r.per_subject.back().recall;
    }
    r.ap /= double(gt_by_subject.size());
    r.ar /= double(gt_by_subject.size());
    return r;
}

}  // namespace nns
