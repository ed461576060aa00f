#pragma once

#include <array>
#include <optional>
#include <vector>

#include "nns/nn.hpp"
#include "nns/segmenter.hpp"

namespace nns {

struct RecognizerConfig {
    int input_size = 32;  // square side; must be a multiple of 8
    int in_channels = 3;
    std::array<int, 3> conv_channels{8, 16, 32};
    int hidden = 64;
    bool bidirectional = true;
    int feature_dim = 128;
    int n_classes = 2;
    int n_frames = 26;
    int epochs = 50;
    double learning_rate = 1e-4;
    int batch_size = 16;
    bool augment = true;
    uint64_t seed = 0;

    void validate() const;
};

// Dense clip tensor, [frame][channel][y][x], values in [0,1].
struct ClipTensor {
    int frames = 0, channels = 0, size = 0;
    std::vector<float> data;

    ClipTensor() = default;
    ClipTensor(int f, int c, int s)
        : frames(f), channels(c), size(s), data(size_t(f) * c * s * s, 0.f) {}
    float& at(int f, int c, int y, int x) {
        return data[((size_t(f) * channels + c) * size + y) * size + x];
    }
    float at(int f, int c, int y, int x) const {
        return data[((size_t(f) * channels + c) * size + y) * size + x];
    }
};

// Extract n_frames starting at `start` from an interleaved video, resized to
// out_size and scaled to [0,1].
ClipTensor clip_from_frames(const FrameSequence& video, int start, int n_frames, int out_size);

// Random rotation (+-15 deg), scale (0.9-1.1) and horizontal flip (p=0.5);
// one transform drawn per clip and applied to every frame. Bilinear sampling
// with replicated edges.
ClipTensor augment_clip(const ClipTensor& clip, Rng& rng);

// Per-clip classifier: three conv/ReLU/maxpool blocks, global average pooling
// to a per-frame vector, a (bi)directional LSTM over frames, an affine feature
// layer and an affine softmax head.
template <class T>
struct RecognizerNet {
    RecognizerConfig cfg;
    struct Conv {
        Param<T> w, b;  // [Cout][Cin][3][3], [Cout]
    };
    std::array<Conv, 3> convs;
    struct LstmDir {
        Param<T> wih, whh, b;  // [4H][In], [4H][H], [4H]; gate order i,f,g,o
    };
    LstmDir fwd, bwd;
    Param<T> feat_w, feat_b;  // [F][H or 2H], [F]
    Param<T> head_w, head_b;  // [K][F], [K]

    void init(uint64_t seed);
    std::vector<Param<T>*> params();
    std::vector<const Param<T>*> params() const;

    // 128-d feature vector for one clip.
    std::vector<T> forward_feature(const ClipTensor& clip) const;
    // Class probabilities for one clip.
    std::array<T, 2> forward(const ClipTensor& clip) const;
    // Cross-entropy forward + backward; accumulates into grads.
    T loss_and_grad(const ClipTensor& clip, int label);
};

using RecognizerModel = RecognizerNet<float>;

struct TrainReport {
    std::vector<double> train_loss;  // per epoch
    std::vector<double> val_accuracy;
    int best_epoch = -1;
};

// Mini-batch Adam training; when a validation set is given the weights from
// the best-accuracy epoch are restored (ties keep the earlier epoch).
RecognizerModel train_recognizer(const std::vector<ClipTensor>& clips,
                                 const std::vector<int>& labels, const RecognizerConfig& cfg,
                                 const std::vector<ClipTensor>* val_clips = nullptr,
                                 const std::vector<int>* val_labels = nullptr,
                                 TrainReport* report = nullptr);

// Positive-class confidence for every window placement
// (count = floor((n_frames - window) / stride) + 1).
std::vector<double> classify_windows(const RecognizerModel& model, const FrameSequence& video,
                                     int window_frames, int stride_frames);

// Feature rows for the same window placements.
FeatureSequence extract_features(const RecognizerModel& model, const FrameSequence& video,
                                 int window_frames, int stride_frames);

void save_recognizer(const std::string& path, const RecognizerModel& model);
RecognizerModel load_recognizer(const std::string& path);

}  // namespace nns
