#include "nns/pipeline.hpp"

#include <stdexcept>

namespace nns {

void PreprocessConfig::validate() const {
    flow.validate();
    if (!(hsv_max_magnitude > 0.0))
        throw std::invalid_argument("PreprocessConfig: hsv_max_magnitude must be positive");
    if (stabilize.out_size_px < 8)
        throw std::invalid_argument("PreprocessConfig: crop size too small");
}

FrameSequence flow_video(const FrameSequence& gray, const FlowConfig& cfg,
                         double hsv_max_magnitude) {
    if (gray.channels != 1) throw std::invalid_argument("flow_video: expected grayscale input");
    int n = gray.n_frames();
    if (n < 1) throw std::invalid_argument("flow_video: empty video");
    FrameSequence out;
    out.height = gray.height;
    out.width = gray.width;
    out.channels = 3;
    out.fps = gray.fps;
    out.data.reserve(size_t(n) * out.frame_size());
    std::vector<uint8_t> last;
    for (int i = 0; i + 1 < n; ++i) {
        FlowField f = dense_flow(gray.frame_gray(i), gray.frame_gray(i + 1), cfg);
        last = flow_to_hsv(f, hsv_max_magnitude);
        out.data.insert(out.data.end(), last.begin(), last.end());
    }
    if (last.empty()) last = flow_to_hsv(FlowField(gray.height, gray.width), hsv_max_magnitude);
    out.data.insert(out.data.end(), last.begin(), last.end());
    return out;
}

PreprocessResult preprocess_video(const FrameSequence& video, const BoundingBox& initial_box,
                                  const PreprocessConfig& cfg) {
    cfg.validate();
    PreprocessResult res;
    res.crop = stabilized_crop(video, initial_box, cfg.stabilize);
    res.hsv_flow = flow_video(res.crop.crop, cfg.flow, cfg.hsv_max_magnitude);
    return res;
}

ClipDataset preprocess_clips(const std::vector<LabeledClip>& raw, const PreprocessConfig& cfg,
                             int input_size) {
    ClipDataset ds;
    for (const LabeledClip& c : raw) {
        BoundingBox box{c.boxes[0].x, c.boxes[0].y, c.boxes[0].w, c.boxes[0].h};
        PreprocessResult pr = preprocess_video(c.video, box, cfg);
        ds.clips.push_back(
            clip_from_frames(pr.hsv_flow, 0, pr.hsv_flow.n_frames(), input_size));
        ds.labels.push_back(c.label);
    }
    return ds;
}

}  // namespace nns
