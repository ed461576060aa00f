#pragma once

#include "nns/flow.hpp"
#include "nns/recognizer.hpp"
#include "nns/synthgen.hpp"
#include "nns/track.hpp"

namespace nns {

struct PreprocessConfig {
    StabilizeConfig stabilize;
    FlowConfig flow;
    // Fixed magnitude scale so HSV encodings are comparable across videos.
    double hsv_max_magnitude = 4.0;

    void validate() const;
};

// Frame-to-frame dense flow rendered as an interleaved HSV video. Keeps the
// input frame count: flow i maps frame i to i+1, and the last flow frame is
// duplicated.
FrameSequence flow_video(const FrameSequence& gray, const FlowConfig& cfg = {},
                         double hsv_max_magnitude = 4.0);

struct PreprocessResult {
    StabilizedCrop crop;
    FrameSequence hsv_flow;  // 3-channel, one frame per input frame
};

// Stabilized face crop followed by dense-flow HSV encoding.
PreprocessResult preprocess_video(const FrameSequence& video, const BoundingBox& initial_box,
                                  const PreprocessConfig& cfg = {});

struct ClipDataset {
    std::vector<ClipTensor> clips;
    std::vector<int> labels;
};

// Run the preprocessing chain over labeled raw clips and pack model inputs.
ClipDataset preprocess_clips(const std::vector<LabeledClip>& raw, const PreprocessConfig& cfg,
                             int input_size);

}  // namespace nns
