#pragma once

#include <cstdint>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace nns {

// Grayscale 8-bit image, row major.
struct ImageU8 {
    int h = 0, w = 0;
    std::vector<uint8_t> px;

    ImageU8() = default;
    ImageU8(int h_, int w_, uint8_t fill = 0) : h(h_), w(w_), px(size_t(h_) * w_, fill) {}
    uint8_t& at(int y, int x) { return px[size_t(y) * w + x]; }
    uint8_t at(int y, int x) const { return px[size_t(y) * w + x]; }
};

// Single-channel float image, row major.
struct ImageF {
    int h = 0, w = 0;
    std::vector<float> px;

    ImageF() = default;
    ImageF(int h_, int w_, float fill = 0.f) : h(h_), w(w_), px(size_t(h_) * w_, fill) {}
    float& at(int y, int x) { return px[size_t(y) * w + x]; }
    float at(int y, int x) const { return px[size_t(y) * w + x]; }
};

inline ImageF to_float(const ImageU8& im) {
    ImageF out(im.h, im.w);
    for (size_t i = 0; i < im.px.size(); ++i) out.px[i] = float(im.px[i]);
    return out;
}

inline ImageU8 to_u8(const ImageF& im) {
    ImageU8 out(im.h, im.w);
    for (size_t i = 0; i < im.px.size(); ++i) {
        float v = std::round(im.px[i]);
        out.px[i] = uint8_t(v < 0.f ? 0.f : (v > 255.f ? 255.f : v));
    }
    return out;
}

// Bilinear sample with replicated edges.
inline float sample_bilinear(const ImageF& im, float x, float y) {
    if (x < 0.f) x = 0.f;
    if (y < 0.f) y = 0.f;
    if (x > float(im.w - 1)) x = float(im.w - 1);
    if (y > float(im.h - 1)) y = float(im.h - 1);
    int x0 = int(x), y0 = int(y);
    int x1 = x0 + 1 < im.w ? x0 + 1 : x0;
    int y1 = y0 + 1 < im.h ? y0 + 1 : y0;
    float fx = x - float(x0), fy = y - float(y0);
    float a = im.at(y0, x0), b = im.at(y0, x1), c = im.at(y1, x0), d = im.at(y1, x1);
    return (a * (1.f - fx) + b * fx) * (1.f - fy) + (c * (1.f - fx) + d * fx) * fy;
}

inline ImageF resize_bilinear(const ImageF& im, int oh, int ow) {
    ImageF out(oh, ow);
    const float sx = ow > 1 ? float(im.w - 1) / float(ow - 1) : 0.f;
    const float sy = oh > 1 ? float(im.h - 1) / float(oh - 1) : 0.f;
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x)
            out.at(y, x) = sample_bilinear(im, float(x) * sx, float(y) * sy);
    return out;
}

// 5-tap binomial blur, replicated edges. Used before pyramid downsampling.
ImageF binomial_blur(const ImageF& im);

// Fixed-rate video. Frames are stored contiguously; `channels > 1` means
// interleaved per-pixel channels (the NNSV container stores such frames with
// width multiplied by the channel count).
struct FrameSequence {
    int height = 0, width = 0, channels = 1;
    double fps = 10.0;
    std::vector<uint8_t> data;

    int n_frames() const {
        size_t fsz = size_t(height) * width * channels;
        return fsz == 0 ? 0 : int(data.size() / fsz);
    }
    size_t frame_size() const { return size_t(height) * width * channels; }
    uint8_t* frame(int i) { return data.data() + frame_size() * i; }
    const uint8_t* frame(int i) const { return data.data() + frame_size() * i; }

    ImageU8 frame_gray(int i) const {
        if (channels != 1) throw std::invalid_argument("frame_gray: multi-channel sequence");
        ImageU8 im(height, width);
        std::copy(frame(i), frame(i) + frame_size(), im.px.begin());
        return im;
    }
};

using Rng = std::mt19937_64;

inline double uniform_real(Rng& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}
inline int uniform_int(Rng& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

}  // namespace nns
