#pragma once

#include <array>
#include <optional>
#include <vector>

#include "nns/nn.hpp"
#include "nns/timeline.hpp"

namespace nns {

// Per-window classifier confidences with window geometry.
struct ConfidenceSequence {
    std::vector<double> scores;  // in [0,1]
    int window_frames = 26;
    int stride_frames = 1;
    double fps = 10.0;
};

// T x D matrix of pre-classification feature vectors.
struct FeatureSequence {
    std::vector<std::vector<float>> rows;
    int window_frames = 26;
    int stride_frames = 1;
    double fps = 10.0;
};

// A per-step segmentation series on a uniform step grid starting at 0.
struct StepSeries {
    double step_s = 0.5;
    std::vector<double> scores;
    std::vector<uint8_t> labels;
};

// Non-overlapping tiling: label k = 1 iff score k >= threshold (inclusive).
StepSeries aggregate_tiled(const ConfidenceSequence& seq, double threshold);

// Sliding windows at a 0.5 s stride; each window's label is assigned to its
// middle-fifth 0.5 s step; uncovered edge steps copy the nearest label.
StepSeries aggregate_sliding(const ConfidenceSequence& seq, double threshold);

// As sliding, but a centered 5-step moving average of the assigned scores is
// thresholded (window truncates at sequence ends).
StepSeries aggregate_smoothed(const ConfidenceSequence& seq, double threshold);

// Per-window ground truth: step is positive iff the window's center frame
// time lies inside an event.
std::vector<uint8_t> labels_to_steps(const EventTrack& track, int window_frames,
                                     int stride_frames, double fps);

// Steps -> events, with step timestamps shifted by offset_s (window-center
// alignment for window-indexed steps) and clamped to [0, duration_s].
EventTrack segment(const std::vector<uint8_t>& labels, double step_s, double offset_s,
                   double duration_s, double merge_gap_s = 1.0, double min_duration_s = 0.0);

// --- Dilated temporal convolutional segmenter --------------------------------

struct TcnConfig {
    int layers = 10;
    int channels = 64;
    int in_dim = 128;
    int n_classes = 2;
    double lambda_smooth = 0.15;
    double kappa_trunc = 4.0;
    int epochs = 100;
    double learning_rate = 5e-4;
    uint64_t seed = 0;

    void validate() const;
};

// Eq. 1-3 total loss on per-step probabilities (probs clamped to >= 1e-8
// before the log; the previous step's log-probability is a constant for
// gradient purposes).
double tcn_loss(const std::vector<std::array<double, 2>>& probs, const std::vector<uint8_t>& labels,
                double lambda_smooth, double kappa_trunc);

// Single-stage TCN: 1x1 input conv, L dilated residual blocks (kernel-3 conv
// at dilation 2^(l-1), ReLU, 1x1 conv, residual add), 1x1 output conv,
// per-step softmax. Zero padding preserves T.
template <class T>
struct TcnNet {
    TcnConfig cfg;
    Param<T> in_w, in_b;
    struct Block {
        Param<T> dw, db;  // [C][C][3], [C]
        Param<T> pw, pb;  // [C][C], [C]
    };
    std::vector<Block> blocks;
    Param<T> out_w, out_b;
    bool linear_probe = false;  // identity activation (receptive-field probes)

    void init(uint64_t seed);
    std::vector<Param<T>*> params();
    std::vector<const Param<T>*> params() const;

    // Per-step logits [T][2].
    std::vector<std::array<T, 2>> forward_logits(const std::vector<std::vector<T>>& features) const;
    // Per-step probabilities [T][2].
    std::vector<std::array<T, 2>> forward(const std::vector<std::vector<T>>& features) const;

    // Full forward + backward of the Eq. 1-3 loss; accumulates into grads.
    T loss_and_grad(const std::vector<std::vector<T>>& features, const std::vector<uint8_t>& labels);
};

using TcnModel = TcnNet<float>;

TcnModel tcn_train(const std::vector<FeatureSequence>& features,
                   const std::vector<std::vector<uint8_t>>& labels, const TcnConfig& cfg,
                   const std::vector<FeatureSequence>* val_features = nullptr,
                   const std::vector<std::vector<uint8_t>>* val_labels = nullptr);

// Apply a trained model to one feature sequence.
std::vector<std::array<float, 2>> tcn_forward(const TcnModel& model, const FeatureSequence& features);

// NNSM serialization.
void save_tcn(const std::string& path, const TcnModel& model);
TcnModel load_tcn(const std::string& path);

}  // namespace nns
