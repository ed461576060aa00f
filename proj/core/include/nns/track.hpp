#pragma once

#include <utility>
#include <vector>

#include "nns/common.hpp"
#include "nns/fft.hpp"

namespace nns {

struct BoundingBox {
    double x = 0, y = 0, w = 0, h = 0;

    double cx() const { return x + w / 2.0; }
    double cy() const { return y + h / 2.0; }
    bool valid_in(int frame_h, int frame_w) const {
        return w > 0 && h > 0 && x < frame_w && y < frame_h && x + w > 0 && y + h > 0;
    }
};

struct Point2f {
    float x = 0, y = 0;
};

// Shi-Tomasi corners: smaller structure-tensor eigenvalue over a 3x3 window,
// local maxima above quality * global max, greedy min-distance selection.
std::vector<Point2f> shi_tomasi_corners(const ImageU8& frame, int max_corners,
                                        double quality = 0.01, double min_distance_px = 8.0);

struct LkConfig {
    int window_px = 15;  // odd
    int pyramid_levels = 3;
    int iterations = 10;
};

struct TrackedPoint {
    Point2f p;
    bool ok = false;
};

// Pyramidal Lucas-Kanade point tracking.
std::vector<TrackedPoint> lk_track(const ImageU8& prev, const ImageU8& next,
                                   const std::vector<Point2f>& points, const LkConfig& cfg = {});

// MOSSE correlation filter over a fixed power-of-two patch.
struct MosseFilter {
    int fh = 0, fw = 0;              // filter (patch) size, powers of two
    std::vector<Cplx> h_num, h_den;  // accumulated numerator / denominator
    std::vector<Cplx> target;        // FFT of the Gaussian response target
    BoundingBox box;
    double learning_rate = 0.125;
    double epsilon = 1e-5;
    double gaussian_sigma = 2.0;
};

MosseFilter mosse_init(const ImageU8& frame, const BoundingBox& box, double learning_rate = 0.125,
                       double gaussian_sigma = 2.0, uint64_t seed = 1);

struct MosseStepResult {
    BoundingBox box;
    double psr = 0.0;  // peak-to-sidelobe ratio of the response
};

MosseStepResult mosse_step(MosseFilter& filter, const ImageU8& frame);

// Correlation response of the filter against the patch at `box` (test hook).
std::vector<float> mosse_response(const MosseFilter& filter, const ImageU8& frame,
                                  const BoundingBox& box);

// Per-frame cumulative translation; first entry is (0,0).
struct Trajectory {
    std::vector<double> dx, dy;
};

// Centered moving average; the window shrinks symmetrically at the ends.
Trajectory smooth_trajectory(const Trajectory& traj, int window_frames);

struct StabilizeConfig {
    int out_size_px = 64;
    int smooth_window = 5;
    int corner_redetect_every = 10;
    int max_corners = 40;
    double mosse_learning_rate = 0.125;
};

struct StabilizedCrop {
    FrameSequence crop;              // out_size x out_size grayscale frames
    std::vector<BoundingBox> boxes;  // final (smoothed, clamped) crop boxes
    std::vector<BoundingBox> raw_boxes;  // unsmoothed propagated boxes
    std::vector<double> psr;
};

// MOSSE box propagation + LK camera-trajectory smoothing + fixed-size crop.
StabilizedCrop stabilized_crop(const FrameSequence& video, const BoundingBox& initial_box,
                               const StabilizeConfig& cfg = {});

}  // namespace nns
