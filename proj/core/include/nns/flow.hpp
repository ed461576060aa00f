#pragma once

#include <optional>
#include <vector>

#include "nns/common.hpp"

namespace nns {

// Dense per-pixel displacement field. Positive u is rightward, positive v downward.
struct FlowField {
    int h = 0, w = 0;
    std::vector<float> u, v;

    FlowField() = default;
    FlowField(int h_, int w_) : h(h_), w(w_), u(size_t(h_) * w_, 0.f), v(size_t(h_) * w_, 0.f) {}
    float& u_at(int y, int x) { return u[size_t(y) * w + x]; }
    float& v_at(int y, int x) { return v[size_t(y) * w + x]; }
    float u_at(int y, int x) const { return u[size_t(y) * w + x]; }
    float v_at(int y, int x) const { return v[size_t(y) * w + x]; }
};

struct FlowConfig {
    int pyramid_levels = 3;
    int iterations_per_level = 100;
    double smoothness_alpha = 15.0;
    double downscale = 0.5;

    void validate() const;
};

// Coarse-to-fine variational flow: at each pyramid level the upsampled flow
// warps `next`, and a fixed number of global-smoothness relaxation sweeps
// solve for the residual displacement.
FlowField dense_flow(const ImageU8& prev, const ImageU8& next, const FlowConfig& cfg = {});
FlowField dense_flow(const ImageF& prev, const ImageF& next, const FlowConfig& cfg = {});

// 3-channel 8-bit HSV image: hue = flow direction, saturation = 255,
// value = magnitude scaled against max_magnitude (field max when absent).
// Interleaved H,S,V per pixel.
std::vector<uint8_t> flow_to_hsv(const FlowField& flow,
                                 std::optional<double> max_magnitude = std::nullopt);

// Standard hexcone HSV -> RGB on interleaved 3-channel buffers.
std::vector<uint8_t> hsv_to_rgb(const std::vector<uint8_t>& hsv);

}  // namespace nns
