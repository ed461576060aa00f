#include "nns/track.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace nns {

namespace {

constexpr double kPi = 3.14159265358979323846;

inline int clampi(int v, int lo, int hi) { return v < lo ? lo : (v > hi ? hi : v); }

ImageF to_unit(const ImageU8& im) {
    ImageF out(im.h, im.w);
    for (size_t i = 0; i < im.px.size(); ++i) out.px[i] = float(im.px[i]) / 255.f;
    return out;
}

ImageF downsample_half(const ImageF& im) {
    return resize_bilinear(binomial_blur(im), std::max(4, im.h / 2), std::max(4, im.w / 2));
}

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    size_t m = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + m, v.end());
    double hi = v[m];
    if (v.size() % 2 == 1) return hi;
    std::nth_element(v.begin(), v.begin() + m - 1, v.end());
    return 0.5 * (hi + v[m - 1]);
}

// Extract box content resampled onto an oh x ow grid.
std::vector<float> extract_patch(const ImageF& im, const BoundingBox& box, int oh, int ow) {
    std::vector<float> p(size_t(oh) * ow);
    for (int y = 0; y < oh; ++y)
        for (int x = 0; x < ow; ++x) {
            float sx = float(box.x + (x + 0.5) / ow * box.w - 0.5);
            float sy = float(box.y + (y + 0.5) / oh * box.h - 0.5);
            p[size_t(y) * ow + x] = sample_bilinear(im, sx, sy);
        }
    return p;
}

// Log transform, zero mean, unit norm, cosine window.
std::vector<Cplx> preprocess_patch(const std::vector<float>& p, int h, int w) {
    std::vector<float> q(p.size());
    double mean = 0.0;
    for (size_t i = 0; i < p.size(); ++i) {
        q[i] = std::log(1.f + p[i]);
        mean += q[i];
    }
    mean /= double(p.size());
    double norm = 0.0;
    for (float& v : q) {
        v -= float(mean);
        norm += double(v) * v;
    }
    norm = std::sqrt(norm) + 1e-5;
    std::vector<Cplx> out(p.size());
    for (int y = 0; y < h; ++y) {
        float wy = 0.5f * (1.f - std::cos(2.f * float(kPi) * y / float(h - 1)));
        for (int x = 0; x < w; ++x) {
            float wx = 0.5f * (1.f - std::cos(2.f * float(kPi) * x / float(w - 1)));
            out[size_t(y) * w + x] = Cplx(q[size_t(y) * w + x] / float(norm) * wy * wx, 0.f);
        }
    }
    return out;
}

std::vector<float> warp_affine_patch(const std::vector<float>& p, int h, int w, double angle,
                                     double scale) {
    std::vector<float> out(p.size());
    double ca = std::cos(angle) / scale, sa = std::sin(angle) / scale;
    double cx = (w - 1) / 2.0, cy = (h - 1) / 2.0;
    auto sample = [&](float x, float y) {
        x = std::clamp(x, 0.f, float(w - 1));
        y = std::clamp(y, 0.f, float(h - 1));
        int x0 = int(x), y0 = int(y);
        int x1 = std::min(x0 + 1, w - 1), y1 = std::min(y0 + 1, h - 1);
        float fx = x - x0, fy = y - y0;
        auto at = [&](int yy, int xx) { return p[size_t(yy) * w + xx]; };
        return (at(y0, x0) * (1 - fx) + at(y0, x1) * fx) * (1 - fy) +
               (at(y1, x0) * (1 - fx) + at(y1, x1) * fx) * fy;
    };
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            double dx = x - cx, dy = y - cy;
            out[size_t(y) * w + x] =
                sample(float(cx + ca * dx - sa * dy), float(cy + sa * dx + ca * dy));
        }
    return out;
}

}  // namespace

std::vector<Point2f> shi_tomasi_corners(const ImageU8& frame, int max_corners, double quality,
                                        double min_distance_px) {
    if (frame.h < 3 || frame.w < 3)
        throw std::invalid_argument("shi_tomasi_corners: frame smaller than window");
    ImageF im = to_unit(frame);
    int h = im.h, w = im.w;
    ImageF gx(h, w), gy(h, w);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            gx.at(y, x) = 0.5f * (im.at(y, clampi(x + 1, 0, w - 1)) - im.at(y, clampi(x - 1, 0, w - 1)));
            gy.at(y, x) = 0.5f * (im.at(clampi(y + 1, 0, h - 1), x) - im.at(clampi(y - 1, 0, h - 1), x));
        }

    ImageF score(h, w);
    float global_max = 0.f;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            float a = 0, b = 0, c = 0;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    float ix = gx.at(clampi(y + dy, 0, h - 1), clampi(x + dx, 0, w - 1));
                    float iy = gy.at(clampi(y + dy, 0, h - 1), clampi(x + dx, 0, w - 1));
                    a += ix * ix;
                    b += ix * iy;
                    c += iy * iy;
                }
            float tr = 0.5f * (a + c);
            float det = std::sqrt(0.25f * (a - c) * (a - c) + b * b);
            score.at(y, x) = tr - det;  // smaller eigenvalue
            global_max = std::max(global_max, score.at(y, x));
        }
    if (global_max <= 1e-12f) return {};

    struct Cand {
        float s;
        int y, x;
    };
    std::vector<Cand> cands;
    float thr = float(quality) * global_max;
    for (int y = 1; y < h - 1; ++y)
        for (int x = 1; x < w - 1; ++x) {
            float s = score.at(y, x);
            if (s < thr) continue;
            bool is_max = true;
            for (int dy = -1; dy <= 1 && is_max; ++dy)
                for (int dx = -1; dx <= 1; ++dx)
                    if ((dy || dx) && score.at(y + dy, x + dx) > s) { is_max = false; break; }
            if (is_max) cands.push_back({s, y, x});
        }
    std::sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
        if (a.s != b.s) return a.s > b.s;
        return a.y != b.y ? a.y < b.y : a.x < b.x;
    });

    std::vector<Point2f> out;
    double md2 = min_distance_px * min_distance_px;
    for (const Cand& c : cands) {
        if (int(out.size()) >= max_corners) break;
        bool far = true;
        for (const Point2f& p : out) {
            double dx = p.x - c.x, dy = p.y - c.y;
            if (dx * dx + dy * dy < md2) { far = false; break; }
        }
        if (far) out.push_back({float(c.x), float(c.y)});
    }
    return out;
}

std::vector<TrackedPoint> lk_track(const ImageU8& prev, const ImageU8& next,
                                   const std::vector<Point2f>& points, const LkConfig& cfg) {
    if (prev.h != next.h || prev.w != next.w)
        throw std::invalid_argument("lk_track: frame size mismatch");
    std::vector<ImageF> pp{to_unit(prev)}, pn{to_unit(next)};
    for (int l = 1; l < cfg.pyramid_levels; ++l) {
        if (pp.back().h < 16 || pp.back().w < 16) break;
        pp.push_back(downsample_half(pp.back()));
        pn.push_back(downsample_half(pn.back()));
    }
    const int half = cfg.window_px / 2;
    const int npx = cfg.window_px * cfg.window_px;

    std::vector<TrackedPoint> out(points.size());
    for (size_t pi = 0; pi < points.size(); ++pi) {
        float gx_flow = 0.f, gy_flow = 0.f;
        bool ok = true;
        for (int l = int(pp.size()) - 1; l >= 0 && ok; --l) {
            const ImageF& A = pp[size_t(l)];
            const ImageF& B = pn[size_t(l)];
            float sx = float(A.w) / float(pp[0].w), sy = float(A.h) / float(pp[0].h);
            float px = points[pi].x * sx, py = points[pi].y * sy;

            // Spatial gradient matrix over the window (normalized by pixel count).
            double g11 = 0, g12 = 0, g22 = 0;
            std::vector<float> ix(static_cast<size_t>(npx)), iy(static_cast<size_t>(npx)), av(static_cast<size_t>(npx));
            int k = 0;
            for (int wy = -half; wy <= half; ++wy)
                for (int wx = -half; wx <= half; ++wx, ++k) {
                    float xx = px + wx, yy = py + wy;
                    float dx = 0.5f * (sample_bilinear(A, xx + 1, yy) - sample_bilinear(A, xx - 1, yy));
                    float dy = 0.5f * (sample_bilinear(A, xx, yy + 1) - sample_bilinear(A, xx, yy - 1));
                    ix[size_t(k)] = dx;
                    iy[size_t(k)] = dy;
                    av[size_t(k)] = sample_bilinear(A, xx, yy);
                    g11 += double(dx) * dx;
                    g12 += double(dx) * dy;
                    g22 += double(dy) * dy;
                }
            g11 /= npx; g12 /= npx; g22 /= npx;
            double tr = 0.5 * (g11 + g22);
            double min_eig = tr - std::sqrt(0.25 * (g11 - g22) * (g11 - g22) + g12 * g12);
            if (min_eig < 1e-4) { ok = false; break; }
            double det = g11 * g22 - g12 * g12;

            float dxf = 0.f, dyf = 0.f;
            for (int it = 0; it < cfg.iterations; ++it) {
                double b1 = 0, b2 = 0;
                k = 0;
                for (int wy = -half; wy <= half; ++wy)
                    for (int wx = -half; wx <= half; ++wx, ++k) {
                        float diff = av[size_t(k)] -
                                     sample_bilinear(B, px + gx_flow + dxf + wx, py + gy_flow + dyf + wy);
                        b1 += double(diff) * ix[size_t(k)];
                        b2 += double(diff) * iy[size_t(k)];
                    }
                b1 /= npx; b2 /= npx;
                dxf += float((g22 * b1 - g12 * b2) / det);
                dyf += float((g11 * b2 - g12 * b1) / det);
            }
            if (l > 0) {
                gx_flow = (gx_flow + dxf) * (float(pp[size_t(l - 1)].w) / float(A.w));
                gy_flow = (gy_flow + dyf) * (float(pp[size_t(l - 1)].h) / float(A.h));
            } else {
                gx_flow += dxf;
                gy_flow += dyf;
            }
        }
        Point2f q{points[pi].x + gx_flow, points[pi].y + gy_flow};
        if (q.x < 0 || q.y < 0 || q.x > float(prev.w - 1) || q.y > float(prev.h - 1)) ok = false;
        out[pi] = {q, ok};
    }
    return out;
}

MosseFilter mosse_init(const ImageU8& frame, const BoundingBox& box, double learning_rate,
                       double gaussian_sigma, uint64_t seed) {
    if (!box.valid_in(frame.h, frame.w)) throw std::invalid_argument("mosse_init: box out of frame");
    MosseFilter f;
    f.fh = std::clamp(next_pow2(int(std::lround(box.h))), 8, 128);
    f.fw = std::clamp(next_pow2(int(std::lround(box.w))), 8, 128);
    f.box = box;
    f.learning_rate = learning_rate;
    f.gaussian_sigma = gaussian_sigma;

    // Gaussian response target centered in the patch.
    std::vector<Cplx> g(size_t(f.fh) * f.fw);
    double cy = f.fh / 2.0, cx = f.fw / 2.0;
    for (int y = 0; y < f.fh; ++y)
        for (int x = 0; x < f.fw; ++x) {
            double d2 = (y - cy) * (y - cy) + (x - cx) * (x - cx);
            g[size_t(y) * f.fw + x] = Cplx(float(std::exp(-d2 / (2.0 * gaussian_sigma * gaussian_sigma))), 0.f);
        }
    fft2d(g, f.fh, f.fw, false);
    f.target = g;

    ImageF im = to_unit(frame);
    std::vector<float> base = extract_patch(im, box, f.fh, f.fw);

    f.h_num.assign(size_t(f.fh) * f.fw, Cplx(0, 0));
    f.h_den.assign(size_t(f.fh) * f.fw, Cplx(0, 0));
    Rng rng(seed);
    for (int k = 0; k < 9; ++k) {
        std::vector<float> patch = base;
        if (k > 0)
            patch = warp_affine_patch(base, f.fh, f.fw, uniform_real(rng, -0.15, 0.15),
                                      uniform_real(rng, 0.95, 1.05));
        std::vector<Cplx> F = preprocess_patch(patch, f.fh, f.fw);
        fft2d(F, f.fh, f.fw, false);
        for (size_t i = 0; i < F.size(); ++i) {
            f.h_num[i] += g[i] * std::conj(F[i]);
            f.h_den[i] += F[i] * std::conj(F[i]);
        }
    }
    return f;
}

std::vector<float> mosse_response(const MosseFilter& f, const ImageU8& frame,
                                  const BoundingBox& box) {
    ImageF im = to_unit(frame);
    std::vector<Cplx> F = preprocess_patch(extract_patch(im, box, f.fh, f.fw), f.fh, f.fw);
    fft2d(F, f.fh, f.fw, false);
    std::vector<Cplx> r(F.size());
    for (size_t i = 0; i < F.size(); ++i)
        r[i] = F[i] * (f.h_num[i] / (f.h_den[i] + Cplx(float(f.epsilon), 0.f)));
    fft2d(r, f.fh, f.fw, true);
    std::vector<float> out(r.size());
    for (size_t i = 0; i < r.size(); ++i) out[i] = r[i].real();
    return out;
}

MosseStepResult mosse_step(MosseFilter& f, const ImageU8& frame) {
    if (!f.box.valid_in(frame.h, frame.w))
        throw std::invalid_argument("mosse_step: box out of frame");
    std::vector<float> resp = mosse_response(f, frame, f.box);

    int peak = 0;
    for (size_t i = 1; i < resp.size(); ++i)
        if (resp[i] > resp[size_t(peak)]) peak = int(i);
    int py = peak / f.fw, px = peak % f.fw;

    // Displacement of the response peak from the target center, patch -> box scale.
    int dy = py - f.fh / 2, dx = px - f.fw / 2;
    f.box.x += double(dx) * f.box.w / f.fw;
    f.box.y += double(dy) * f.box.h / f.fh;

    // PSR over the response excluding an 11x11 window at the peak.
    double mean = 0, count = 0;
    for (int y = 0; y < f.fh; ++y)
        for (int x = 0; x < f.fw; ++x) {
            if (std::abs(y - py) <= 5 && std::abs(x - px) <= 5) continue;
            mean += resp[size_t(y) * f.fw + x];
            count += 1;
        }
    mean /= std::max(count, 1.0);
    double var = 0;
    for (int y = 0; y < f.fh; ++y)
        for (int x = 0; x < f.fw; ++x) {
            if (std::abs(y - py) <= 5 && std::abs(x - px) <= 5) continue;
            double d = resp[size_t(y) * f.fw + x] - mean;
            var += d * d;
        }
    double psr = (resp[size_t(peak)] - mean) / (std::sqrt(var / std::max(count, 1.0)) + 1e-12);

    // Exponential moving average update from the patch at the new location.
    if (f.learning_rate > 0.0) {
        ImageF im = to_unit(frame);
        std::vector<Cplx> F = preprocess_patch(extract_patch(im, f.box, f.fh, f.fw), f.fh, f.fw);
        fft2d(F, f.fh, f.fw, false);
        float lr = float(f.learning_rate);
        for (size_t i = 0; i < F.size(); ++i) {
            f.h_num[i] = (1.f - lr) * f.h_num[i] + lr * (f.target[i] * std::conj(F[i]));
            f.h_den[i] = (1.f - lr) * f.h_den[i] + lr * (F[i] * std::conj(F[i]));
        }
    }
    return {f.box, psr};
}

Trajectory smooth_trajectory(const Trajectory& traj, int window_frames) {
    if (window_frames < 1 || window_frames % 2 == 0)
        throw std::invalid_argument("smooth_trajectory: window must be odd and >= 1");
    size_t n = traj.dx.size();
    if (traj.dy.size() != n) throw std::invalid_argument("smooth_trajectory: axis length mismatch");
    Trajectory out;
    out.dx.resize(n);
    out.dy.resize(n);
    int half = window_frames / 2;
    for (size_t i = 0; i < n; ++i) {
        int hh = std::min({half, int(i), int(n - 1 - i)});
        double sx = 0, sy = 0;
        for (int k = -hh; k <= hh; ++k) {
            sx += traj.dx[size_t(int(i) + k)];
            sy += traj.dy[size_t(int(i) + k)];
        }
        out.dx[i] = sx / (2 * hh + 1);
        out.dy[i] = sy / (2 * hh + 1);
    }
    return out;
}

StabilizedCrop stabilized_crop(const FrameSequence& video, const BoundingBox& initial_box,
                               const StabilizeConfig& cfg) {
    int n = video.n_frames();
    if (n == 0) throw std::invalid_argument("stabilized_crop: empty video");
    if (video.channels != 1) throw std::invalid_argument("stabilized_crop: expects grayscale video");
    if (!initial_box.valid_in(video.height, video.width))
        throw std::invalid_argument("stabilized_crop: invalid initial box");

    StabilizedCrop out;
    out.raw_boxes.resize(size_t(n));
    out.psr.assign(size_t(n), 0.0);

    // (1) propagate the box with MOSSE
    ImageU8 frame0 = video.frame_gray(0);
    MosseFilter mosse = mosse_init(frame0, initial_box, cfg.mosse_learning_rate);
    out.raw_boxes[0] = initial_box;
    for (int f = 1; f < n; ++f) {
        MosseStepResult r = mosse_step(mosse, video.frame_gray(f));
        out.raw_boxes[size_t(f)] = r.box;
        out.psr[size_t(f)] = r.psr;
    }

    // (2) per-frame global camera translation: median LK displacement of
    // Shi-Tomasi corners, re-detected on a fixed schedule
    Trajectory raw;
    raw.dx.assign(size_t(n), 0.0);
    raw.dy.assign(size_t(n), 0.0);
    std::vector<Point2f> corners = shi_tomasi_corners(frame0, cfg.max_corners);
    ImageU8 prev = frame0;
    for (int f = 1; f < n; ++f) {
        ImageU8 cur = video.frame_gray(f);
        double mx = 0, my = 0;
        if (!corners.empty()) {
            std::vector<TrackedPoint> tr = lk_track(prev, cur, corners);
            std::vector<double> dxs, dys;
            std::vector<Point2f> alive;
            for (size_t i = 0; i < corners.size(); ++i)
                if (tr[i].ok) {
                    dxs.push_back(double(tr[i].p.x) - corners[i].x);
                    dys.push_back(double(tr[i].p.y) - corners[i].y);
                    alive.push_back(tr[i].p);
                }
            mx = median(dxs);
            my = median(dys);
            corners = std::move(alive);
        }
        raw.dx[size_t(f)] = raw.dx[size_t(f - 1)] + mx;
        raw.dy[size_t(f)] = raw.dy[size_t(f - 1)] + my;
        if (f % cfg.corner_redetect_every == 0 || int(corners.size()) < 8)
            corners = shi_tomasi_corners(cur, cfg.max_corners);
        prev = std::move(cur);
    }

    // (3) smooth and correct
    Trajectory smoothed = smooth_trajectory(raw, cfg.smooth_window);
    out.boxes.resize(size_t(n));
    for (int f = 0; f < n; ++f) {
        BoundingBox b = out.raw_boxes[size_t(f)];
        b.x += smoothed.dx[size_t(f)] - raw.dx[size_t(f)];
        b.y += smoothed.dy[size_t(f)] - raw.dy[size_t(f)];
        // (4) clamp to the frame
        b.w = std::min(b.w, double(video.width));
        b.h = std::min(b.h, double(video.height));
        b.x = std::clamp(b.x, 0.0, double(video.width) - b.w);
        b.y = std::clamp(b.y, 0.0, double(video.height) - b.h);
        out.boxes[size_t(f)] = b;
    }

    // (5) crop and resize
    out.crop.height = cfg.out_size_px;
    out.crop.width = cfg.out_size_px;
    out.crop.channels = 1;
    out.crop.fps = video.fps;
    out.crop.data.resize(size_t(n) * cfg.out_size_px * cfg.out_size_px);
    for (int f = 0; f < n; ++f) {
        ImageF im = to_float(video.frame_gray(f));
        std::vector<float> patch = extract_patch(im, out.boxes[size_t(f)], cfg.out_size_px, cfg.out_size_px);
        uint8_t* dst = out.crop.frame(f);
        for (size_t i = 0; i < patch.size(); ++i) {
            float v = std::round(patch[i]);
            dst[i] = uint8_t(v < 0 ? 0 : (v > 255 ? 255 : v));
        }
    }
    return out;
}

}  // namespace nns
