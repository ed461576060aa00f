#include "nns/recognizer.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "nns/io.hpp"

namespace nns {

void RecognizerConfig::validate() const {
    if (input_size < 8 || input_size % 8 != 0)
        throw std::invalid_argument("RecognizerConfig: input_size must be a positive multiple of 8");
    if (in_channels < 1) throw std::invalid_argument("RecognizerConfig: in_channels must be >= 1");
    if (hidden < 1 || feature_dim < 1) throw std::invalid_argument("RecognizerConfig: bad widths");
    if (n_classes != 2) throw std::invalid_argument("RecognizerConfig: only binary heads supported");
    if (n_frames < 1) throw std::invalid_argument("RecognizerConfig: n_frames must be >= 1");
    if (batch_size < 1) throw std::invalid_argument("RecognizerConfig: batch_size must be >= 1");
    for (int c : conv_channels)
        if (c < 1) throw std::invalid_argument("RecognizerConfig: conv channels must be >= 1");
}

ClipTensor clip_from_frames(const FrameSequence& video, int start, int n_frames, int out_size) {
    if (start < 0 || start + n_frames > video.n_frames())
        throw std::invalid_argument("clip_from_frames: window out of range");
    ClipTensor clip(n_frames, video.channels, out_size);
    ImageF plane(video.height, video.width);
    for (int f = 0; f < n_frames; ++f) {
        const uint8_t* src = video.frame(start + f);
        for (int c = 0; c < video.channels; ++c) {
            for (int y = 0; y < video.height; ++y)
                for (int x = 0; x < video.width; ++x)
                    plane.at(y, x) = float(src[(size_t(y) * video.width + x) * video.channels + c]);
            ImageF r = (video.height == out_size && video.width == out_size)
                           ? plane
                           : resize_bilinear(plane, out_size, out_size);
            for (int y = 0; y < out_size; ++y)
                for (int x = 0; x < out_size; ++x) clip.at(f, c, y, x) = r.at(y, x) / 255.f;
        }
    }
    return clip;
}

namespace {

// Bilinear sample with replicated edges on one [S][S] channel plane.
float sample_plane(const float* p, int s, float x, float y) {
    x = std::clamp(x, 0.f, float(s - 1));
    y = std::clamp(y, 0.f, float(s - 1));
    int x0 = int(x), y0 = int(y);
    int x1 = std::min(x0 + 1, s - 1), y1 = std::min(y0 + 1, s - 1);
    float fx = x - float(x0), fy = y - float(y0);
    float a = p[y0 * s + x0], b = p[y0 * s + x1], c = p[y1 * s + x0], d = p[y1 * s + x1];
    return (a * (1.f - fx) + b * fx) * (1.f - fy) + (c * (1.f - fx) + d * fx) * fy;
}

}  // namespace

ClipTensor augment_clip(const ClipTensor& clip, Rng& rng) {
    double theta = uniform_real(rng, -15.0, 15.0) * M_PI / 180.0;
    double scale = uniform_real(rng, 0.9, 1.1);
    bool flip = uniform_real(rng, 0.0, 1.0) < 0.5;
    int s = clip.size;
    double c0 = (s - 1) / 2.0;
    double ct = std::cos(-theta) / scale, st = std::sin(-theta) / scale;

    ClipTensor out(clip.frames, clip.channels, s);
    for (int f = 0; f < clip.frames; ++f)
        for (int c = 0; c < clip.channels; ++c) {
            const float* src = &clip.data[((size_t(f) * clip.channels + c) * s) * s];
            for (int y = 0; y < s; ++y)
                for (int x = 0; x < s; ++x) {
                    double xo = flip ? double(s - 1 - x) : double(x);
                    double dx = xo - c0, dy = double(y) - c0;
                    float sx = float(c0 + ct * dx - st * dy);
                    float sy = float(c0 + st * dx + ct * dy);
                    out.at(f, c, y, x) = sample_plane(src, s, sx, sy);
                }
        }
    return out;
}

// --- RecognizerNet ------------------------------------------------------------

namespace {

template <class T>
void conv3x3_relu(const T* in, int cin, int s, const Param<T>& w, const Param<T>& b, int cout,
                  T* out) {
    for (int co = 0; co < cout; ++co) {
        T* orow = out + size_t(co) * s * s;
        std::fill(orow, orow + size_t(s) * s, b.w[size_t(co)]);
        for (int ci = 0; ci < cin; ++ci) {
            const T* irow = in + size_t(ci) * s * s;
            const T* k = w.w.data() + (size_t(co) * cin + ci) * 9;
            for (int y = 0; y < s; ++y)
                for (int ky = -1; ky <= 1; ++ky) {
                    int sy = y + ky;
                    if (sy < 0 || sy >= s) continue;
                    const T* ir = irow + size_t(sy) * s;
                    const T* kk = k + (ky + 1) * 3;
                    T* orw = orow + size_t(y) * s;
                    for (int x = 0; x < s; ++x) {
                        T acc = T(0);
                        if (x > 0) acc += kk[0] * ir[x - 1];
                        acc += kk[1] * ir[x];
                        if (x + 1 < s) acc += kk[2] * ir[x + 1];
                        orw[x] += acc;
                    }
                }
        }
        for (size_t i = 0; i < size_t(s) * s; ++i)
            if (orow[i] < T(0)) orow[i] = T(0);
    }
}

template <class T>
void maxpool2(const T* in, int c, int s, T* out, int* argmax) {
    int hs = s / 2;
    for (int ch = 0; ch < c; ++ch) {
        const T* ip = in + size_t(ch) * s * s;
        T* op = out + size_t(ch) * hs * hs;
        int* ap = argmax + size_t(ch) * hs * hs;
        for (int y = 0; y < hs; ++y)
            for (int x = 0; x < hs; ++x) {
                int base = (2 * y) * s + 2 * x;
                int best = base;
                T bv = ip[base];
                for (int d : {1, s, s + 1})
                    if (ip[base + d] > bv) {
                        bv = ip[base + d];
                        best = base + d;
                    }
                op[y * hs + x] = bv;
                ap[y * hs + x] = best;
            }
    }
}

template <class T>
struct ConvCache {
    std::vector<T> in;      // layer input [Cin][S][S]
    std::vector<T> act;     // post-ReLU conv output [Cout][S][S]
    std::vector<T> pooled;  // [Cout][S/2][S/2]
    std::vector<int> argmax;
};

template <class T>
struct LstmCache {
    // Per step, indexed by frame.
    std::vector<std::vector<T>> gi, gf, gg, go, c, h, tc;
};

template <class T>
struct Workspace {
    std::vector<std::array<ConvCache<T>, 3>> frames;
    std::vector<std::vector<T>> x;  // per-frame GAP vectors
    LstmCache<T> fwd, bwd;
    std::vector<T> v, y;            // lstm concat, feature layer output
    std::array<T, 2> logits{}, probs{};
};

template <class T>
void lstm_step(const typename RecognizerNet<T>::LstmDir& d, const std::vector<T>& x,
               const std::vector<T>& hprev, const std::vector<T>& cprev, int hid,
               std::vector<T>& gi, std::vector<T>& gf, std::vector<T>& gg, std::vector<T>& go,
               std::vector<T>& c, std::vector<T>& h, std::vector<T>& tc) {
    int in = int(x.size());
    std::vector<T> z(size_t(4) * hid);
    for (int r = 0; r < 4 * hid; ++r) {
        T s = d.b.w[size_t(r)];
        const T* wi = d.wih.w.data() + size_t(r) * in;
        for (int j = 0; j < in; ++j) s += wi[j] * x[size_t(j)];
        const T* wh = d.whh.w.data() + size_t(r) * hid;
        for (int j = 0; j < hid; ++j) s += wh[j] * hprev[size_t(j)];
        z[size_t(r)] = s;
    }
    gi.resize(hid); gf.resize(hid); gg.resize(hid); go.resize(hid);
    c.resize(hid); h.resize(hid); tc.resize(hid);
    auto sig = [](T v) { return T(1) / (T(1) + std::exp(-v)); };
    for (int j = 0; j < hid; ++j) {
        gi[j] = sig(z[size_t(j)]);
        gf[j] = sig(z[size_t(hid + j)]);
        gg[j] = std::tanh(z[size_t(2 * hid + j)]);
        go[j] = sig(z[size_t(3 * hid + j)]);
        c[j] = gf[j] * cprev[size_t(j)] + gi[j] * gg[j];
        tc[j] = std::tanh(c[j]);
        h[j] = go[j] * tc[j];
    }
}

template <class T>
void net_forward(const RecognizerNet<T>& net, const ClipTensor& clip, Workspace<T>& ws) {
    const RecognizerConfig& cfg = net.cfg;
    if (clip.channels != cfg.in_channels || clip.size != cfg.input_size ||
        clip.frames != cfg.n_frames)
        throw std::invalid_argument("recognizer: clip shape does not match the model");
    int f_cnt = clip.frames;
    int hid = cfg.hidden;
    int in_dim = cfg.conv_channels[2];

    ws.frames.resize(size_t(f_cnt));
    ws.x.assign(size_t(f_cnt), std::vector<T>(size_t(in_dim), T(0)));
    for (int f = 0; f < f_cnt; ++f) {
        int s = cfg.input_size;
        int cin = cfg.in_channels;
        std::vector<T> cur(size_t(cin) * s * s);
        for (size_t i = 0; i < cur.size(); ++i)
            cur[i] = T(clip.data[size_t(f) * cur.size() + i]);
        for (int l = 0; l < 3; ++l) {
            ConvCache<T>& cc = ws.frames[size_t(f)][size_t(l)];
            int cout = cfg.conv_channels[size_t(l)];
            cc.in = std::move(cur);
            cc.act.assign(size_t(cout) * s * s, T(0));
            conv3x3_relu<T>(cc.in.data(), cin, s, net.convs[size_t(l)].w, net.convs[size_t(l)].b,
                            cout, cc.act.data());
            int hs = s / 2;
            cc.pooled.assign(size_t(cout) * hs * hs, T(0));
            cc.argmax.assign(size_t(cout) * hs * hs, 0);
            maxpool2<T>(cc.act.data(), cout, s, cc.pooled.data(), cc.argmax.data());
            cur = cc.pooled;
            cin = cout;
            s = hs;
        }
        int s3 = cfg.input_size / 8;
        T inv = T(1) / T(s3 * s3);
        for (int c = 0; c < in_dim; ++c) {
            T acc = T(0);
            const T* p = cur.data() + size_t(c) * s3 * s3;
            for (int i = 0; i < s3 * s3; ++i) acc += p[i];
            ws.x[size_t(f)][size_t(c)] = acc * inv;
        }
    }

    auto run_dir = [&](const typename RecognizerNet<T>::LstmDir& d, LstmCache<T>& lc, bool rev) {
        lc.gi.assign(size_t(f_cnt), {}); lc.gf.assign(size_t(f_cnt), {});
        lc.gg.assign(size_t(f_cnt), {}); lc.go.assign(size_t(f_cnt), {});
        lc.c.assign(size_t(f_cnt), {}); lc.h.assign(size_t(f_cnt), {});
        lc.tc.assign(size_t(f_cnt), {});
        std::vector<T> hprev(size_t(hid), T(0)), cprev(size_t(hid), T(0));
        for (int i = 0; i < f_cnt; ++i) {
            int t = rev ? f_cnt - 1 - i : i;
            lstm_step<T>(d, ws.x[size_t(t)], hprev, cprev, hid, lc.gi[size_t(t)], lc.gf[size_t(t)],
                         lc.gg[size_t(t)], lc.go[size_t(t)], lc.c[size_t(t)], lc.h[size_t(t)],
                         lc.tc[size_t(t)]);
            hprev = lc.h[size_t(t)];
            cprev = lc.c[size_t(t)];
        }
    };
    run_dir(net.fwd, ws.fwd, false);
    int dirs = cfg.bidirectional ? 2 : 1;
    if (cfg.bidirectional) run_dir(net.bwd, ws.bwd, true);

    ws.v.assign(size_t(dirs) * hid, T(0));
    std::copy(ws.fwd.h[size_t(f_cnt - 1)].begin(), ws.fwd.h[size_t(f_cnt - 1)].end(), ws.v.begin());
    if (cfg.bidirectional)
        std::copy(ws.bwd.h[0].begin(), ws.bwd.h[0].end(), ws.v.begin() + hid);

    ws.y.assign(size_t(cfg.feature_dim), T(0));
    for (int r = 0; r < cfg.feature_dim; ++r) {
        T s = net.feat_b.w[size_t(r)];
        const T* w = net.feat_w.w.data() + size_t(r) * ws.v.size();
        for (size_t j = 0; j < ws.v.size(); ++j) s += w[j] * ws.v[j];
        ws.y[size_t(r)] = s;
    }
    for (int k = 0; k < 2; ++k) {
        T s = net.head_b.w[size_t(k)];
        const T* w = net.head_w.w.data() + size_t(k) * cfg.feature_dim;
        for (int j = 0; j < cfg.feature_dim; ++j) s += w[j] * ws.y[size_t(j)];
        ws.logits[size_t(k)] = s;
    }
    softmax2(ws.logits.data(), ws.probs.data(), 2);
}

}  // namespace

template <class T>
void RecognizerNet<T>::init(uint64_t seed) {
    cfg.validate();
    Rng rng(seed);
    int cin = cfg.in_channels;
    for (int l = 0; l < 3; ++l) {
        int cout = cfg.conv_channels[size_t(l)];
        std::string p = "conv" + std::to_string(l) + ".";
        convs[size_t(l)].w.init(p + "weight", {uint32_t(cout), uint32_t(cin), 3, 3});
        convs[size_t(l)].b.init(p + "bias", {uint32_t(cout)});
        init_uniform(convs[size_t(l)].w, size_t(cin) * 9, rng);
        init_uniform(convs[size_t(l)].b, size_t(cin) * 9, rng);
        cin = cout;
    }
    int in_dim = cfg.conv_channels[2], hid = cfg.hidden;
    auto init_dir = [&](LstmDir& d, const std::string& p) {
        d.wih.init(p + "weight_ih", {uint32_t(4 * hid), uint32_t(in_dim)});
        d.whh.init(p + "weight_hh", {uint32_t(4 * hid), uint32_t(hid)});
        d.b.init(p + "bias", {uint32_t(4 * hid)});
        init_uniform(d.wih, size_t(in_dim), rng);
        init_uniform(d.whh, size_t(hid), rng);
        init_uniform(d.b, size_t(hid), rng);
    };
    init_dir(fwd, "lstm_fwd.");
    if (cfg.bidirectional) init_dir(bwd, "lstm_bwd.");
    int dirs = cfg.bidirectional ? 2 : 1;
    feat_w.init("feature.weight", {uint32_t(cfg.feature_dim), uint32_t(dirs * hid)});
    feat_b.init("feature.bias", {uint32_t(cfg.feature_dim)});
    init_uniform(feat_w, size_t(dirs) * hid, rng);
    init_uniform(feat_b, size_t(dirs) * hid, rng);
    head_w.init("head.weight", {uint32_t(cfg.n_classes), uint32_t(cfg.feature_dim)});
    head_b.init("head.bias", {uint32_t(cfg.n_classes)});
    init_uniform(head_w, size_t(cfg.feature_dim), rng);
    init_uniform(head_b, size_t(cfg.feature_dim), rng);
}

template <class T>
std::vector<Param<T>*> RecognizerNet<T>::params() {
    std::vector<Param<T>*> p;
    for (auto& c : convs) {
        p.push_back(&c.w);
        p.push_back(&c.b);
    }
    p.push_back(&fwd.wih);
    p.push_back(&fwd.whh);
    p.push_back(&fwd.b);
    if (cfg.bidirectional) {
        p.push_back(&bwd.wih);
        p.push_back(&bwd.whh);
        p.push_back(&bwd.b);
    }
    p.push_back(&feat_w);
    p.push_back(&feat_b);
    p.push_back(&head_w);
    p.push_back(&head_b);
    return p;
}

template <class T>
std::vector<const Param<T>*> RecognizerNet<T>::params() const {
    auto mut = const_cast<RecognizerNet<T>*>(this)->params();
    return std::vector<const Param<T>*>(mut.begin(), mut.end());
}

template <class T>
std::vector<T> RecognizerNet<T>::forward_feature(const ClipTensor& clip) const {
    Workspace<T> ws;
    net_forward(*this, clip, ws);
    return ws.y;
}

template <class T>
std::array<T, 2> RecognizerNet<T>::forward(const ClipTensor& clip) const {
    Workspace<T> ws;
    net_forward(*this, clip, ws);
    return ws.probs;
}

template <class T>
T RecognizerNet<T>::loss_and_grad(const ClipTensor& clip, int label) {
    if (label != 0 && label != 1) throw std::invalid_argument("recognizer: label must be 0 or 1");
    Workspace<T> ws;
    net_forward(*this, clip, ws);
    int hid = cfg.hidden;
    int f_cnt = clip.frames;
    T loss = -std::log(std::max(ws.probs[size_t(label)], T(1e-12)));

    // Head and feature layers.
    std::array<T, 2> dz;
    for (int k = 0; k < 2; ++k) dz[size_t(k)] = ws.probs[size_t(k)] - T(k == label ? 1 : 0);
    std::vector<T> dy(size_t(cfg.feature_dim), T(0));
    for (int k = 0; k < 2; ++k) {
        head_b.g[size_t(k)] += dz[size_t(k)];
        for (int j = 0; j < cfg.feature_dim; ++j) {
            head_w.g[size_t(k) * cfg.feature_dim + j] += dz[size_t(k)] * ws.y[size_t(j)];
            dy[size_t(j)] += head_w.w[size_t(k) * cfg.feature_dim + j] * dz[size_t(k)];
        }
    }
    std::vector<T> dv(ws.v.size(), T(0));
    for (int r = 0; r < cfg.feature_dim; ++r) {
        feat_b.g[size_t(r)] += dy[size_t(r)];
        for (size_t j = 0; j < ws.v.size(); ++j) {
            feat_w.g[size_t(r) * ws.v.size() + j] += dy[size_t(r)] * ws.v[j];
            dv[j] += feat_w.w[size_t(r) * ws.v.size() + j] * dy[size_t(r)];
        }
    }

    std::vector<std::vector<T>> dx(size_t(f_cnt), std::vector<T>(ws.x[0].size(), T(0)));

    // BPTT through one direction; `rev` marks the backward-in-time pass.
    auto bptt = [&](LstmDir& d, LstmCache<T>& lc, bool rev, const std::vector<T>& dh_ext,
                    int ext_t) {
        int in = int(ws.x[0].size());
        std::vector<T> dh(size_t(hid), T(0)), dc(size_t(hid), T(0));
        std::vector<T> dzg(size_t(4) * hid);
        for (int i = f_cnt - 1; i >= 0; --i) {
            int t = rev ? f_cnt - 1 - i : i;  // step i of the pass touched frame t
            if (t == ext_t)
                for (int j = 0; j < hid; ++j) dh[size_t(j)] += dh_ext[size_t(j)];
            int tp = rev ? t + 1 : t - 1;  // previous step's frame
            const std::vector<T>* hp = (tp >= 0 && tp < f_cnt) ? &lc.h[size_t(tp)] : nullptr;
            const std::vector<T>* cp = (tp >= 0 && tp < f_cnt) ? &lc.c[size_t(tp)] : nullptr;
            for (int j = 0; j < hid; ++j) {
                T i_g = lc.gi[size_t(t)][size_t(j)], f_g = lc.gf[size_t(t)][size_t(j)];
                T g_g = lc.gg[size_t(t)][size_t(j)], o_g = lc.go[size_t(t)][size_t(j)];
                T tc = lc.tc[size_t(t)][size_t(j)];
                T dho = dh[size_t(j)];
                T dct = dc[size_t(j)] + dho * o_g * (T(1) - tc * tc);
                T cprev = cp ? (*cp)[size_t(j)] : T(0);
                dzg[size_t(j)] = dct * g_g * i_g * (T(1) - i_g);
                dzg[size_t(hid + j)] = dct * cprev * f_g * (T(1) - f_g);
                dzg[size_t(2 * hid + j)] = dct * i_g * (T(1) - g_g * g_g);
                dzg[size_t(3 * hid + j)] = dho * tc * o_g * (T(1) - o_g);
                dc[size_t(j)] = dct * f_g;
            }
            std::fill(dh.begin(), dh.end(), T(0));
            for (int r = 0; r < 4 * hid; ++r) {
                T g = dzg[size_t(r)];
                d.b.g[size_t(r)] += g;
                T* gwi = d.wih.g.data() + size_t(r) * in;
                const T* wi = d.wih.w.data() + size_t(r) * in;
                for (int j = 0; j < in; ++j) {
                    gwi[j] += g * ws.x[size_t(t)][size_t(j)];
                    dx[size_t(t)][size_t(j)] += wi[j] * g;
                }
                T* gwh = d.whh.g.data() + size_t(r) * hid;
                const T* wh = d.whh.w.data() + size_t(r) * hid;
                for (int j = 0; j < hid; ++j) {
                    if (hp) gwh[j] += g * (*hp)[size_t(j)];
                    dh[size_t(j)] += wh[j] * g;
                }
            }
            if (!hp) std::fill(dh.begin(), dh.end(), T(0));  // first step: no carry target
        }
    };
    std::vector<T> dhf(dv.begin(), dv.begin() + hid);
    bptt(fwd, ws.fwd, false, dhf, f_cnt - 1);
    if (cfg.bidirectional) {
        std::vector<T> dhb(dv.begin() + hid, dv.end());
        bptt(bwd, ws.bwd, true, dhb, 0);
    }

    // Conv stack backward, frame by frame.
    int s3 = cfg.input_size / 8;
    T inv = T(1) / T(s3 * s3);
    for (int f = 0; f < f_cnt; ++f) {
        int s = s3;
        int cout = cfg.conv_channels[2];
        std::vector<T> dpool(size_t(cout) * s * s);
        for (int c = 0; c < cout; ++c)
            for (int i = 0; i < s * s; ++i) dpool[size_t(c) * s * s + i] = dx[size_t(f)][size_t(c)] * inv;
        for (int l = 2; l >= 0; --l) {
            ConvCache<T>& cc = ws.frames[size_t(f)][size_t(l)];
            cout = cfg.conv_channels[size_t(l)];
            int cin = l == 0 ? cfg.in_channels : cfg.conv_channels[size_t(l - 1)];
            int so = 2 * s;  // pre-pool side
            // Unpool into post-ReLU activation gradient.
            std::vector<T> dact(size_t(cout) * so * so, T(0));
            for (int c = 0; c < cout; ++c)
                for (int i = 0; i < s * s; ++i)
                    dact[size_t(c) * so * so + cc.argmax[size_t(c) * s * s + i]] +=
                        dpool[size_t(c) * s * s + i];
            for (size_t i = 0; i < dact.size(); ++i)
                if (cc.act[i] <= T(0)) dact[i] = T(0);
            // Conv backward.
            std::vector<T> din(size_t(cin) * so * so, T(0));
            Param<T>& wp = convs[size_t(l)].w;
            Param<T>& bp = convs[size_t(l)].b;
            for (int co = 0; co < cout; ++co) {
                const T* drow = dact.data() + size_t(co) * so * so;
                T bacc = T(0);
                for (int i = 0; i < so * so; ++i) bacc += drow[i];
                bp.g[size_t(co)] += bacc;
                for (int ci = 0; ci < cin; ++ci) {
                    const T* irow = cc.in.data() + size_t(ci) * so * so;
                    T* dirow = din.data() + size_t(ci) * so * so;
                    const T* k = wp.w.data() + (size_t(co) * cin + ci) * 9;
                    T* gk = wp.g.data() + (size_t(co) * cin + ci) * 9;
                    for (int y = 0; y < so; ++y)
                        for (int ky = -1; ky <= 1; ++ky) {
                            int sy = y + ky;
                            if (sy < 0 || sy >= so) continue;
                            const T* ir = irow + size_t(sy) * so;
                            T* dir = dirow + size_t(sy) * so;
                            const T* kk = k + (ky + 1) * 3;
                            T* gkk = gk + (ky + 1) * 3;
                            const T* dr = drow + size_t(y) * so;
                            for (int x = 0; x < so; ++x) {
                                T g = dr[x];
                                if (g == T(0)) continue;
                                if (x > 0) {
                                    gkk[0] += g * ir[x - 1];
                                    dir[x - 1] += kk[0] * g;
                                }
                                gkk[1] += g * ir[x];
                                dir[x] += kk[1] * g;
                                if (x + 1 < so) {
                                    gkk[2] += g * ir[x + 1];
                                    dir[x + 1] += kk[2] * g;
                                }
                            }
                        }
                }
            }
            dpool.swap(din);
            s = so;
        }
    }
    return loss;
}

template struct RecognizerNet<float>;
template struct RecognizerNet<double>;

RecognizerModel train_recognizer(const std::vector<ClipTensor>& clips,
                                 const std::vector<int>& labels, const RecognizerConfig& cfg,
                                 const std::vector<ClipTensor>* val_clips,
                                 const std::vector<int>* val_labels, TrainReport* report) {
    if (clips.empty() || clips.size() != labels.size())
        throw std::invalid_argument("train_recognizer: empty or mismatched training set");
    bool has0 = false, has1 = false;
    for (int l : labels) (l ? has1 : has0) = true;
    if (!has0 || !has1)
        throw std::invalid_argument("train_recognizer: both classes must be present");

    RecognizerModel model;
    model.cfg = cfg;
    model.init(cfg.seed);
    std::vector<Param<float>*> ps = model.params();
    Adam<float> adam;
    adam.lr = cfg.learning_rate;
    adam.attach(ps);

    Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<size_t> order(clips.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    double best_acc = -1.0;
    int best_epoch = -1;
    std::vector<std::vector<float>> best_weights;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        double epoch_loss = 0.0;
        for (size_t b = 0; b < order.size(); b += size_t(cfg.batch_size)) {
            size_t e = std::min(b + size_t(cfg.batch_size), order.size());
            for (Param<float>* p : ps) p->zero_grad();
            for (size_t i = b; i < e; ++i) {
                const ClipTensor& clip = clips[order[i]];
                if (cfg.augment) {
                    ClipTensor aug = augment_clip(clip, rng);
                    epoch_loss += model.loss_and_grad(aug, labels[order[i]]);
                } else {
                    epoch_loss += model.loss_and_grad(clip, labels[order[i]]);
                }
            }
            float inv = 1.f / float(e - b);
            for (Param<float>* p : ps)
                for (float& g : p->g) g *= inv;
            adam.step(ps);
        }
        if (report) report->train_loss.push_back(epoch_loss / double(clips.size()));
        if (val_clips && val_labels) {
            long correct = 0;
            for (size_t i = 0; i < val_clips->size(); ++i) {
                auto p = model.forward((*val_clips)[i]);
                correct += (p[1] >= p[0] ? 1 : 0) == (*val_labels)[i];
            }
            double acc = val_clips->empty() ? 0.0 : double(correct) / double(val_clips->size());
            if (report) report->val_accuracy.push_back(acc);
            if (acc > best_acc) {
                best_acc = acc;
                best_epoch = epoch;
                best_weights.clear();
                for (Param<float>* p : ps) best_weights.push_back(p->w);
            }
        }
    }
    if (!best_weights.empty()) {
        for (size_t i = 0; i < ps.size(); ++i) ps[i]->w = best_weights[i];
        if (report) report->best_epoch = best_epoch;
    }
    return model;
}

std::vector<double> classify_windows(const RecognizerModel& model, const FrameSequence& video,
                                     int window_frames, int stride_frames) {
    if (stride_frames < 1 || window_frames < 1 || video.n_frames() < window_frames)
        throw std::invalid_argument("classify_windows: bad window geometry");
    int n = (video.n_frames() - window_frames) / stride_frames + 1;
    std::vector<double> out(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        ClipTensor clip =
            clip_from_frames(video, i * stride_frames, window_frames, model.cfg.input_size);
        out[size_t(i)] = double(model.forward(clip)[1]);
    }
    return out;
}

FeatureSequence extract_features(const RecognizerModel& model, const FrameSequence& video,
                                 int window_frames, int stride_frames) {
    if (stride_frames < 1 || window_frames < 1 || video.n_frames() < window_frames)
        throw std::invalid_argument("extract_features: bad window geometry");
    int n = (video.n_frames() - window_frames) / stride_frames + 1;
    FeatureSequence seq;
    seq.window_frames = window_frames;
    seq.stride_frames = stride_frames;
    seq.fps = video.fps;
    seq.rows.resize(size_t(n));
    for (int i = 0; i < n; ++i) {
        ClipTensor clip =
            clip_from_frames(video, i * stride_frames, window_frames, model.cfg.input_size);
        seq.rows[size_t(i)] = model.forward_feature(clip);
    }
    return seq;
}

void save_recognizer(const std::string& path, const RecognizerModel& model) {
    const RecognizerConfig& c = model.cfg;
    nlohmann::json j{{"type", "recognizer"},
                     {"input_size", c.input_size},
                     {"in_channels", c.in_channels},
                     {"conv_channels", c.conv_channels},
                     {"hidden", c.hidden},
                     {"bidirectional", c.bidirectional},
                     {"feature_dim", c.feature_dim},
                     {"n_classes", c.n_classes},
                     {"n_frames", c.n_frames},
                     {"epochs", c.epochs},
                     {"learning_rate", c.learning_rate},
                     {"batch_size", c.batch_size},
                     {"augment", c.augment},
                     {"seed", c.seed}};
    std::vector<NamedTensor> tensors;
    for (const Param<float>* p : model.params()) tensors.push_back({p->name, p->dims, p->w});
    save_nnsm(path, j.dump(), tensors);
}

RecognizerModel load_recognizer(const std::string& path) {
    auto [cfg_json, tensors] = load_nnsm(path);
    nlohmann::json j = nlohmann::json::parse(cfg_json);
    if (j.value("type", "") != "recognizer")
        throw std::runtime_error("load_recognizer: not a recognizer model file");
    RecognizerModel model;
    RecognizerConfig& c = model.cfg;
    c.input_size = j.at("input_size");
    c.in_channels = j.at("in_channels");
    auto cc = j.at("conv_channels");
    for (int i = 0; i < 3; ++i) c.conv_channels[size_t(i)] = cc.at(size_t(i));
    c.hidden = j.at("hidden");
    c.bidirectional = j.at("bidirectional");
    c.feature_dim = j.at("feature_dim");
    c.n_classes = j.at("n_classes");
    c.n_frames = j.at("n_frames");
    c.epochs = j.at("epochs");
    c.learning_rate = j.at("learning_rate");
    c.batch_size = j.at("batch_size");
    c.augment = j.at("augment");
    c.seed = j.at("seed");
    model.init(c.seed);
    std::vector<Param<float>*> ps = model.params();
    if (ps.size() != tensors.size())
        throw std::runtime_error("load_recognizer: tensor count mismatch");
    for (size_t i = 0; i < ps.size(); ++i) {
        if (tensors[i].name != ps[i]->name || tensors[i].data.size() != ps[i]->w.size())
            throw std::runtime_error("load_recognizer: tensor layout mismatch at " +
                                     tensors[i].name);
        ps[i]->w = tensors[i].data;
    }
    return model;
}

}  // namespace nns
