#include "nns/flow.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nns {

namespace {

constexpr double kPi = 3.14159265358979323846;

inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

// Central differences with replicated edges.
ImageF grad_x(const ImageF& im) {
    ImageF g(im.h, im.w);
    for (int y = 0; y < im.h; ++y)
        for (int x = 0; x < im.w; ++x)
            g.at(y, x) = 0.5f * (im.at(y, clampi(x + 1, 0, im.w - 1)) -
                                 im.at(y, clampi(x - 1, 0, im.w - 1)));
    return g;
}

ImageF grad_y(const ImageF& im) {
    ImageF g(im.h, im.w);
    for (int y = 0; y < im.h; ++y)
        for (int x = 0; x < im.w; ++x)
            g.at(y, x) = 0.5f * (im.at(clampi(y + 1, 0, im.h - 1), x) -
                                 im.at(clampi(y - 1, 0, im.h - 1), x));
    return g;
}

ImageF warp(const ImageF& im, const FlowField& f) {
    ImageF out(im.h, im.w);
    for (int y = 0; y < im.h; ++y)
        for (int x = 0; x < im.w; ++x)
            out.at(y, x) = sample_bilinear(im, float(x) + f.u_at(y, x), float(y) + f.v_at(y, x));
    return out;
}

// Horn-Schunck neighborhood average: 1/6 for the 4-neighbors, 1/12 diagonals.
inline float hs_avg(const std::vector<float>& a, int h, int w, int y, int x) {
    auto at = [&](int yy, int xx) { return a[size_t(clampi(yy, 0, h - 1)) * w + clampi(xx, 0, w - 1)]; };
    return (1.f / 6.f) * (at(y - 1, x) + at(y + 1, x) + at(y, x - 1) + at(y, x + 1)) +
           (1.f / 12.f) * (at(y - 1, x - 1) + at(y - 1, x + 1) + at(y + 1, x - 1) + at(y + 1, x + 1));
}

FlowField upsample_flow(const FlowField& f, int oh, int ow) {
    FlowField out(oh, ow);
    ImageF uu{f.h, f.w, {}}, vv{f.h, f.w, {}};
    uu.px = f.u;
    vv.px = f.v;
    ImageF ur = resize_bilinear(uu, oh, ow);
    ImageF vr = resize_bilinear(vv, oh, ow);
    float sx = float(ow) / float(f.w), sy = float(oh) / float(f.h);
    for (size_t i = 0; i < out.u.size(); ++i) {
        out.u[i] = ur.px[i] * sx;
        out.v[i] = vr.px[i] * sy;
    }
    return out;
}

}  // namespace

ImageF binomial_blur(const ImageF& im) {
    static const float k[5] = {1.f / 16, 4.f / 16, 6.f / 16, 4.f / 16, 1.f / 16};
    ImageF tmp(im.h, im.w), out(im.h, im.w);
    for (int y = 0; y < im.h; ++y)
        for (int x = 0; x < im.w; ++x) {
            float s = 0.f;
            for (int i = -2; i <= 2; ++i) s += k[i + 2] * im.at(y, clampi(x + i, 0, im.w - 1));
            tmp.at(y, x) = s;
        }
    for (int y = 0; y < im.h; ++y)
        for (int x = 0; x < im.w; ++x) {
            float s = 0.f;
            for (int i = -2; i <= 2; ++i) s += k[i + 2] * tmp.at(clampi(y + i, 0, im.h - 1), x);
            out.at(y, x) = s;
        }
    return out;
}

void FlowConfig::validate() const {
    if (pyramid_levels < 1 || iterations_per_level < 1)
        throw std::invalid_argument("FlowConfig: levels and iterations must be >= 1");
    if (!(smoothness_alpha > 0.0)) throw std::invalid_argument("FlowConfig: alpha must be positive");
    if (!(downscale > 0.0 && downscale < 1.0))
        throw std::invalid_argument("FlowConfig: downscale must be in (0,1)");
}

FlowField dense_flow(const ImageF& prev, const ImageF& next, const FlowConfig& cfg) {
    cfg.validate();
    if (prev.h != next.h || prev.w != next.w)
        throw std::invalid_argument("dense_flow: frame size mismatch");
    if (prev.h < 8 || prev.w < 8) throw std::invalid_argument("dense_flow: frames must be >= 8x8");

    // Pyramid, finest first. Levels stop once a dimension would drop below 8.
    std::vector<ImageF> pyr_prev{prev}, pyr_next{next};
    for (int l = 1; l < cfg.pyramid_levels; ++l) {
        const ImageF& p = pyr_prev.back();
        int nh = int(std::lround(p.h * cfg.downscale));
        int nw = int(std::lround(p.w * cfg.downscale));
        if (nh < 8 || nw < 8) break;
        pyr_prev.push_back(resize_bilinear(binomial_blur(pyr_prev.back()), nh, nw));
        pyr_next.push_back(resize_bilinear(binomial_blur(pyr_next.back()), nh, nw));
    }

    const float alpha2 = float(cfg.smoothness_alpha * cfg.smoothness_alpha);
    FlowField flow(pyr_prev.back().h, pyr_prev.back().w);

    for (int l = int(pyr_prev.size()) - 1; l >= 0; --l) {
        const ImageF& p = pyr_prev[size_t(l)];
        const ImageF& n = pyr_next[size_t(l)];
        if (flow.h != p.h || flow.w != p.w) flow = upsample_flow(flow, p.h, p.w);

        ImageF warped = warp(n, flow);
        ImageF ix = grad_x(p), wx = grad_x(warped);
        ImageF iy = grad_y(p), wy = grad_y(warped);
        size_t npx = size_t(p.h) * p.w;
        std::vector<float> Ix(npx), Iy(npx), C(npx), denom(npx);
        for (size_t i = 0; i < npx; ++i) {
            Ix[i] = 0.5f * (ix.px[i] + wx.px[i]);
            Iy[i] = 0.5f * (iy.px[i] + wy.px[i]);
            // Constant part of the data term for the total flow:
            // Ix*(u-u0) + Iy*(v-v0) + (warped - prev) = Ix*u + Iy*v + C
            C[i] = (warped.px[i] - p.px[i]) - Ix[i] * flow.u[i] - Iy[i] * flow.v[i];
            denom[i] = alpha2 + Ix[i] * Ix[i] + Iy[i] * Iy[i];
        }

        std::vector<float> un(npx), vn(npx);
        for (int it = 0; it < cfg.iterations_per_level; ++it) {
            for (int y = 0; y < p.h; ++y)
                for (int x = 0; x < p.w; ++x) {
                    size_t i = size_t(y) * p.w + x;
                    float ub = hs_avg(flow.u, p.h, p.w, y, x);
                    float vb = hs_avg(flow.v, p.h, p.w, y, x);
                    float t = (Ix[i] * ub + Iy[i] * vb + C[i]) / denom[i];
                    un[i] = ub - Ix[i] * t;
                    vn[i] = vb - Iy[i] * t;
                }
            flow.u.swap(un);
            flow.v.swap(vn);
        }
    }
    return flow;
}

FlowField dense_flow(const ImageU8& prev, const ImageU8& next, const FlowConfig& cfg) {
    return dense_flow(to_float(prev), to_float(next), cfg);
}

std::vector<uint8_t> flow_to_hsv(const FlowField& flow, std::optional<double> max_magnitude) {
    size_t n = flow.u.size();
    double m = 0.0;
    if (max_magnitude) {
        m = *max_magnitude > 0.0 ? *max_magnitude : 1.0;
    } else {
        for (size_t i = 0; i < n; ++i)
            m = std::max(m, double(flow.u[i]) * flow.u[i] + double(flow.v[i]) * flow.v[i]);
        m = std::sqrt(m);
        if (m == 0.0) m = 1.0;
    }
    std::vector<uint8_t> hsv(n * 3);
    for (size_t i = 0; i < n; ++i) {
        double u = flow.u[i], v = flow.v[i];
        double ang = std::atan2(v, u);
        if (ang < 0.0) ang += 2.0 * kPi;
        if (ang >= 2.0 * kPi) ang = 0.0;
        double mag = std::sqrt(u * u + v * v);
        hsv[3 * i + 0] = uint8_t(std::lround(255.0 * ang / (2.0 * kPi)));
        hsv[3 * i + 1] = 255;
        hsv[3 * i + 2] = uint8_t(std::lround(255.0 * std::min(mag / m, 1.0)));
    }
    return hsv;
}

std::vector<uint8_t> hsv_to_rgb(const std::vector<uint8_t>& hsv) {
    std::vector<uint8_t> rgb(hsv.size());
    for (size_t i = 0; i + 2 < hsv.size(); i += 3) {
        double h = hsv[i] / 255.0 * 6.0;  // sector in [0,6)
        if (h >= 6.0) h = 0.0;
        double s = hsv[i + 1] / 255.0, v = hsv[i + 2] / 255.0;
        int sec = int(h);
        double f = h - sec;
        double p = v * (1 - s), q = v * (1 - s * f), t = v * (1 - s * (1 - f));
        double r, g, b;
        switch (sec % 6) {
            case 0: r = v; g = t; b = p; break;
            case 1: r = q; g = v; b = p; break;
            case 2: r = p; g = v; b = t; break;
            case 3: r = p; g = q; b = v; break;
            case 4: r = t; g = p; b = v; break;
            default: r = v; g = p; b = q; break;
        }
        rgb[i] = uint8_t(std::lround(r * 255));
        rgb[i + 1] = uint8_t(std::lround(g * 255));
        rgb[i + 2] = uint8_t(std::lround(b * 255));
    }
    return rgb;
}

}  // namespace nns
