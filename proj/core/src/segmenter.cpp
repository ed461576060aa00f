#include "nns/segmenter.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "nns/io.hpp"

namespace nns {

namespace {

// Sliding aggregation geometry: 0.5 s steps, the window's label lands two
// steps after its start (the middle fifth of the nominal 2.5 s span).
constexpr int kMiddleFifthOffset = 2;
constexpr int kNominalFifths = 5;

void check_sliding(const ConfidenceSequence& seq) {
    if (seq.stride_frames <= 0) throw std::invalid_argument("aggregate: stride must be positive");
    int diff = seq.window_frames - kNominalFifths * seq.stride_frames;
    if (diff < 0 || diff > seq.stride_frames)
        throw std::invalid_argument("aggregate: window must span five nominal strides");
    for (double s : seq.scores)
        if (s < 0.0 || s > 1.0) throw std::invalid_argument("aggregate: score outside [0,1]");
}

StepSeries assemble_sliding(const ConfidenceSequence& seq, const std::vector<double>& assigned,
                            double threshold) {
    size_t t = assigned.size();
    StepSeries out;
    out.step_s = double(seq.stride_frames) / seq.fps;
    size_t total = t + kNominalFifths;
    out.scores.assign(total, 0.0);
    out.labels.assign(total, 0);
    for (size_t i = 0; i < t; ++i) {
        out.scores[i + kMiddleFifthOffset] = assigned[i];
        out.labels[i + kMiddleFifthOffset] = assigned[i] >= threshold ? 1 : 0;
    }
    if (t > 0) {
        for (int k = 0; k < kMiddleFifthOffset; ++k) {  // leading edge fill
            out.scores[size_t(k)] = out.scores[kMiddleFifthOffset];
            out.labels[size_t(k)] = out.labels[kMiddleFifthOffset];
        }
        for (size_t k = t + kMiddleFifthOffset; k < total; ++k) {  // trailing
            out.scores[k] = out.scores[t + kMiddleFifthOffset - 1];
            out.labels[k] = out.labels[t + kMiddleFifthOffset - 1];
        }
    }
    return out;
}

}  // namespace

StepSeries aggregate_tiled(const ConfidenceSequence& seq, double threshold) {
    if (seq.stride_frames != seq.window_frames)
        throw std::invalid_argument("aggregate_tiled: windows must tile (stride == window)");
    StepSeries out;
    out.step_s = double(seq.window_frames) / seq.fps;
    out.scores = seq.scores;
    out.labels.resize(seq.scores.size());
    for (size_t i = 0; i < seq.scores.size(); ++i)
        out.labels[i] = seq.scores[i] >= threshold ? 1 : 0;
    return out;
}

StepSeries aggregate_sliding(const ConfidenceSequence& seq, double threshold) {
    check_sliding(seq);
    return assemble_sliding(seq, seq.scores, threshold);
}

StepSeries aggregate_smoothed(const ConfidenceSequence& seq, double threshold) {
    check_sliding(seq);
    size_t t = seq.scores.size();
    std::vector<double> avg(t, 0.0);
    for (size_t i = 0; i < t; ++i) {
        size_t lo = i >= 2 ? i - 2 : 0;
        size_t hi = std::min(i + 2, t - 1);
        double s = 0.0;
        for (size_t k = lo; k <= hi; ++k) s += seq.scores[k];
        avg[i] = s / double(hi - lo + 1);
    }
    return assemble_sliding(seq, avg, threshold);
}

std::vector<uint8_t> labels_to_steps(const EventTrack& track, int window_frames, int stride_frames,
                                     double fps) {
    track.validate();
    if (window_frames <= 0 || stride_frames <= 0 || !(fps > 0))
        throw std::invalid_argument("labels_to_steps: bad window geometry");
    long n_video = std::llround(track.duration_s * fps);
    long n_steps = (n_video - window_frames) / stride_frames + 1;
    if (n_steps < 0) n_steps = 0;
    std::vector<uint8_t> out(size_t(n_steps), 0);
    for (long s = 0; s < n_steps; ++s) {
        double t = double(s * stride_frames + window_frames / 2) / fps;
        for (const Event& e : track.events)
            if (t >= e.start_s - 1e-9 && t < e.end_s - 1e-9) {
                out[size_t(s)] = 1;
                break;
            }
    }
    return out;
}

EventTrack segment(const std::vector<uint8_t>& labels, double step_s, double offset_s,
                   double duration_s, double merge_gap_s, double min_duration_s) {
    EventTrack raw = extract_events(labels, step_s, merge_gap_s, min_duration_s);
    EventTrack out;
    out.duration_s = duration_s;
    for (Event e : raw.events) {
        e.start_s += offset_s;
        e.end_s = std::min(e.end_s + offset_s, duration_s);
        if (e.start_s < duration_s && e.start_s < e.end_s) out.events.push_back(e);
    }
    out.validate();
    return out;
}

void TcnConfig::validate() const {
    if (layers < 1) throw std::invalid_argument("TcnConfig: layers must be >= 1");
    if (lambda_smooth < 0.0) throw std::invalid_argument("TcnConfig: lambda must be >= 0");
    if (!(kappa_trunc > 0.0)) throw std::invalid_argument("TcnConfig: kappa must be positive");
    if (channels < 1 || in_dim < 1) throw std::invalid_argument("TcnConfig: bad dimensions");
}

double tcn_loss(const std::vector<std::array<double, 2>>& probs, const std::vector<uint8_t>& labels,
                double lambda_smooth, double kappa_trunc) {
    size_t t_len = probs.size();
    if (labels.size() != t_len) throw std::invalid_argument("tcn_loss: label length mismatch");
    if (t_len == 0) throw std::invalid_argument("tcn_loss: empty sequence");
    const int c_num = 2;
    double ce = 0.0, smooth = 0.0;
    auto lp = [&](size_t t, int c) { return std::log(std::max(probs[t][size_t(c)], 1e-8)); };
    for (size_t t = 0; t < t_len; ++t) ce += -lp(t, labels[t]);
    ce /= double(t_len);
    for (size_t t = 1; t < t_len; ++t)
        for (int c = 0; c < c_num; ++c) {
            double d = std::min(std::abs(lp(t, c) - lp(t - 1, c)), kappa_trunc);
            smooth += d * d;
        }
    smooth /= double(t_len) * c_num;
    return ce + lambda_smooth * smooth;
}

// --- TcnNet -------------------------------------------------------------------

template <class T>
void TcnNet<T>::init(uint64_t seed) {
    cfg.validate();
    Rng rng(seed);
    int c = cfg.channels, d = cfg.in_dim;
    in_w.init("in.weight", {uint32_t(c), uint32_t(d)});
    in_b.init("in.bias", {uint32_t(c)});
    init_uniform(in_w, size_t(d), rng);
    init_uniform(in_b, size_t(d), rng);
    blocks.assign(size_t(cfg.layers), {});
    for (int l = 0; l < cfg.layers; ++l) {
        Block& b = blocks[size_t(l)];
        std::string p = "block" + std::to_string(l) + ".";
        b.dw.init(p + "dilated.weight", {uint32_t(c), uint32_t(c), 3});
        b.db.init(p + "dilated.bias", {uint32_t(c)});
        b.pw.init(p + "pointwise.weight", {uint32_t(c), uint32_t(c)});
        b.pb.init(p + "pointwise.bias", {uint32_t(c)});
        init_uniform(b.dw, size_t(3 * c), rng);
        init_uniform(b.db, size_t(3 * c), rng);
        init_uniform(b.pw, size_t(c), rng);
        init_uniform(b.pb, size_t(c), rng);
    }
    out_w.init("out.weight", {uint32_t(cfg.n_classes), uint32_t(c)});
    out_b.init("out.bias", {uint32_t(cfg.n_classes)});
    init_uniform(out_w, size_t(c), rng);
    init_uniform(out_b, size_t(c), rng);
}

template <class T>
std::vector<Param<T>*> TcnNet<T>::params() {
    std::vector<Param<T>*> p{&in_w, &in_b};
    for (Block& b : blocks) {
        p.push_back(&b.dw);
        p.push_back(&b.db);
        p.push_back(&b.pw);
        p.push_back(&b.pb);
    }
    p.push_back(&out_w);
    p.push_back(&out_b);
    return p;
}

template <class T>
std::vector<const Param<T>*> TcnNet<T>::params() const {
    auto mut = const_cast<TcnNet<T>*>(this)->params();
    return std::vector<const Param<T>*>(mut.begin(), mut.end());
}

namespace {

// One dilated residual block forward; h is [C][T] flattened.
template <class T>
void block_forward(const typename TcnNet<T>::Block& b, const std::vector<T>& h, int c_num,
                   long t_len, int dil, bool linear, std::vector<T>& a, std::vector<T>& r,
                   std::vector<T>& out) {
    a.assign(h.size(), T(0));
    for (int co = 0; co < c_num; ++co) {
        T* arow = a.data() + size_t(co) * t_len;
        for (int ci = 0; ci < c_num; ++ci) {
            const T* hrow = h.data() + size_t(ci) * t_len;
            T w0 = b.dw.w[size_t(co) * c_num * 3 + size_t(ci) * 3 + 0];
            T w1 = b.dw.w[size_t(co) * c_num * 3 + size_t(ci) * 3 + 1];
            T w2 = b.dw.w[size_t(co) * c_num * 3 + size_t(ci) * 3 + 2];
            for (long t = 0; t < t_len; ++t) {
                T s = w1 * hrow[t];
                if (t - dil >= 0) s += w0 * hrow[t - dil];
                if (t + dil < t_len) s += w2 * hrow[t + dil];
                arow[t] += s;
            }
        }
        for (long t = 0; t < t_len; ++t) arow[t] += b.db.w[size_t(co)];
    }
    r.resize(a.size());
    for (size_t i = 0; i < a.size(); ++i) r[i] = linear ? a[i] : std::max(a[i], T(0));
    out = h;  // residual
    for (int co = 0; co < c_num; ++co) {
        T* orow = out.data() + size_t(co) * t_len;
        for (int ci = 0; ci < c_num; ++ci) {
            const T* rrow = r.data() + size_t(ci) * t_len;
            T w = b.pw.w[size_t(co) * c_num + ci];
            for (long t = 0; t < t_len; ++t) orow[t] += w * rrow[t];
        }
        for (long t = 0; t < t_len; ++t) orow[t] += b.pb.w[size_t(co)];
    }
}

}  // namespace

template <class T>
std::vector<std::array<T, 2>> TcnNet<T>::forward_logits(
    const std::vector<std::vector<T>>& features) const {
    long t_len = long(features.size());
    if (t_len == 0) throw std::invalid_argument("tcn: empty feature sequence");
    if (int(features[0].size()) != cfg.in_dim)
        throw std::invalid_argument("tcn: feature dimension mismatch");
    int c_num = cfg.channels;

    std::vector<T> h(size_t(c_num) * t_len, T(0));
    for (long t = 0; t < t_len; ++t)
        for (int c = 0; c < c_num; ++c) {
            T s = in_b.w[size_t(c)];
            const T* wrow = in_w.w.data() + size_t(c) * cfg.in_dim;
            for (int d = 0; d < cfg.in_dim; ++d) s += wrow[d] * features[size_t(t)][size_t(d)];
            h[size_t(c) * t_len + t] = s;
        }

    std::vector<T> a, r, nxt;
    for (int l = 0; l < cfg.layers; ++l) {
        block_forward<T>(blocks[size_t(l)], h, c_num, t_len, 1 << l, linear_probe, a, r, nxt);
        h.swap(nxt);
    }

    std::vector<std::array<T, 2>> logits(static_cast<size_t>(t_len));
    for (long t = 0; t < t_len; ++t)
        for (int k = 0; k < 2; ++k) {
            T s = out_b.w[size_t(k)];
            for (int c = 0; c < c_num; ++c) s += out_w.w[size_t(k) * c_num + c] * h[size_t(c) * t_len + t];
            logits[size_t(t)][size_t(k)] = s;
        }
    return logits;
}

template <class T>
std::vector<std::array<T, 2>> TcnNet<T>::forward(const std::vector<std::vector<T>>& features) const {
    std::vector<std::array<T, 2>> logits = forward_logits(features);
    for (auto& row : logits) {
        std::array<T, 2> p;
        softmax2(row.data(), p.data(), 2);
        row = p;
    }
    return logits;
}

template <class T>
T TcnNet<T>::loss_and_grad(const std::vector<std::vector<T>>& features,
                           const std::vector<uint8_t>& labels) {
    long t_len = long(features.size());
    if (labels.size() != size_t(t_len)) throw std::invalid_argument("tcn: label length mismatch");
    int c_num = cfg.channels;

    // Forward with caches.
    std::vector<T> h(size_t(c_num) * t_len, T(0));
    for (long t = 0; t < t_len; ++t)
        for (int c = 0; c < c_num; ++c) {
            T s = in_b.w[size_t(c)];
            const T* wrow = in_w.w.data() + size_t(c) * cfg.in_dim;
            for (int d = 0; d < cfg.in_dim; ++d) s += wrow[d] * features[size_t(t)][size_t(d)];
            h[size_t(c) * t_len + t] = s;
        }
    std::vector<std::vector<T>> h_in(size_t(cfg.layers)), act_a(size_t(cfg.layers)),
        act_r(size_t(cfg.layers));
    for (int l = 0; l < cfg.layers; ++l) {
        h_in[size_t(l)] = h;
        std::vector<T> nxt;
        block_forward<T>(blocks[size_t(l)], h, c_num, t_len, 1 << l, linear_probe, act_a[size_t(l)],
                         act_r[size_t(l)], nxt);
        h.swap(nxt);
    }

    std::vector<std::array<T, 2>> probs(static_cast<size_t>(t_len));
    std::vector<std::array<T, 2>> logits(static_cast<size_t>(t_len));
    for (long t = 0; t < t_len; ++t) {
        for (int k = 0; k < 2; ++k) {
            T s = out_b.w[size_t(k)];
            for (int c = 0; c < c_num; ++c) s += out_w.w[size_t(k) * c_num + c] * h[size_t(c) * t_len + t];
            logits[size_t(t)][size_t(k)] = s;
        }
        softmax2(logits[size_t(t)].data(), probs[size_t(t)].data(), 2);
    }

    // Loss and gradient w.r.t. clamped log-probabilities.
    const double clamp = 1e-8;
    auto lp = [&](long t, int c) { return std::log(std::max(double(probs[size_t(t)][size_t(c)]), clamp)); };
    double loss_ce = 0.0, loss_sm = 0.0;
    std::vector<std::array<double, 2>> dlp(size_t(t_len), {0.0, 0.0});
    for (long t = 0; t < t_len; ++t) {
        loss_ce += -lp(t, labels[size_t(t)]);
        dlp[size_t(t)][labels[size_t(t)]] += -1.0 / double(t_len);
    }
    loss_ce /= double(t_len);
    double sm_scale = cfg.lambda_smooth / (double(t_len) * 2.0);
    for (long t = 1; t < t_len; ++t)
        for (int c = 0; c < 2; ++c) {
            double d = lp(t, c) - lp(t - 1, c);  // previous step is stop-gradient
            if (std::abs(d) < cfg.kappa_trunc) {
                loss_sm += d * d;
                dlp[size_t(t)][size_t(c)] += sm_scale * 2.0 * d;
            } else {
                loss_sm += cfg.kappa_trunc * cfg.kappa_trunc;
            }
        }
    double total = loss_ce + cfg.lambda_smooth * loss_sm / (double(t_len) * 2.0);

    // dlp -> dlogits (clamped entries carry no gradient).
    std::vector<std::array<T, 2>> dz(static_cast<size_t>(t_len));
    for (long t = 0; t < t_len; ++t) {
        std::array<double, 2> g = dlp[size_t(t)];
        for (int c = 0; c < 2; ++c)
            if (double(probs[size_t(t)][size_t(c)]) < clamp) g[size_t(c)] = 0.0;
        double gsum = g[0] + g[1];
        for (int k = 0; k < 2; ++k)
            dz[size_t(t)][size_t(k)] = T(g[size_t(k)] - double(probs[size_t(t)][size_t(k)]) * gsum);
    }

    // Output layer backward.
    std::vector<T> dh(size_t(c_num) * t_len, T(0));
    for (long t = 0; t < t_len; ++t)
        for (int k = 0; k < 2; ++k) {
            T g = dz[size_t(t)][size_t(k)];
            out_b.g[size_t(k)] += g;
            for (int c = 0; c < c_num; ++c) {
                out_w.g[size_t(k) * c_num + c] += g * h[size_t(c) * t_len + t];
                dh[size_t(c) * t_len + t] += out_w.w[size_t(k) * c_num + c] * g;
            }
        }

    // Blocks backward.
    for (int l = cfg.layers - 1; l >= 0; --l) {
        Block& b = blocks[size_t(l)];
        int dil = 1 << l;
        const std::vector<T>& hin = h_in[size_t(l)];
        const std::vector<T>& a = act_a[size_t(l)];
        const std::vector<T>& r = act_r[size_t(l)];

        // Through the pointwise conv.
        std::vector<T> dr(size_t(c_num) * t_len, T(0));
        for (int co = 0; co < c_num; ++co) {
            const T* dout = dh.data() + size_t(co) * t_len;
            for (long t = 0; t < t_len; ++t) b.pb.g[size_t(co)] += dout[t];
            for (int ci = 0; ci < c_num; ++ci) {
                const T* rrow = r.data() + size_t(ci) * t_len;
                T* drrow = dr.data() + size_t(ci) * t_len;
                T w = b.pw.w[size_t(co) * c_num + ci];
                T gw = T(0);
                for (long t = 0; t < t_len; ++t) {
                    gw += dout[t] * rrow[t];
                    drrow[t] += w * dout[t];
                }
                b.pw.g[size_t(co) * c_num + ci] += gw;
            }
        }
        // Activation.
        std::vector<T> da(dr.size());
        for (size_t i = 0; i < dr.size(); ++i)
            da[i] = linear_probe ? dr[i] : (a[i] > T(0) ? dr[i] : T(0));
        // Dilated conv; residual path adds dh directly.
        std::vector<T> dhin = dh;
        for (int co = 0; co < c_num; ++co) {
            const T* darow = da.data() + size_t(co) * t_len;
            for (long t = 0; t < t_len; ++t) b.db.g[size_t(co)] += darow[t];
            for (int ci = 0; ci < c_num; ++ci) {
                const T* hrow = hin.data() + size_t(ci) * t_len;
                T* drow = dhin.data() + size_t(ci) * t_len;
                T w0 = b.dw.w[size_t(co) * c_num * 3 + size_t(ci) * 3 + 0];
                T w1 = b.dw.w[size_t(co) * c_num * 3 + size_t(ci) * 3 + 1];
                T w2 = b.dw.w[size_t(co) * c_num * 3 + size_t(ci) * 3 + 2];
                T g0 = T(0), g1 = T(0), g2 = T(0);
                for (long t = 0; t < t_len; ++t) {
                    T g = darow[t];
                    g1 += g * hrow[t];
                    drow[t] += w1 * g;
                    if (t - dil >= 0) {
                        g0 += g * hrow[t - dil];
                        drow[t - dil] += w0 * g;
                    }
                    if (t + dil < t_len) {
                        g2 += g * hrow[t + dil];
                        drow[t + dil] += w2 * g;
                    }
                }
                b.dw.g[size_t(co) * c_num * 3 + size_t(ci) * 3 + 0] += g0;
                b.dw.g[size_t(co) * c_num * 3 + size_t(ci) * 3 + 1] += g1;
                b.dw.g[size_t(co) * c_num * 3 + size_t(ci) * 3 + 2] += g2;
            }
        }
        dh.swap(dhin);
    }

    // Input 1x1 conv backward.
    for (long t = 0; t < t_len; ++t)
        for (int c = 0; c < c_num; ++c) {
            T g = dh[size_t(c) * t_len + t];
            in_b.g[size_t(c)] += g;
            T* grow = in_w.g.data() + size_t(c) * cfg.in_dim;
            for (int d = 0; d < cfg.in_dim; ++d) grow[d] += g * features[size_t(t)][size_t(d)];
        }

    return T(total);
}

template struct TcnNet<float>;
template struct TcnNet<double>;

TcnModel tcn_train(const std::vector<FeatureSequence>& features,
                   const std::vector<std::vector<uint8_t>>& labels, const TcnConfig& cfg,
                   const std::vector<FeatureSequence>* val_features,
                   const std::vector<std::vector<uint8_t>>* val_labels) {
    if (features.empty() || features.size() != labels.size())
        throw std::invalid_argument("tcn_train: empty or mismatched inputs");
    TcnModel model;
    model.cfg = cfg;
    model.cfg.in_dim = int(features[0].rows[0].size());
    model.init(cfg.seed);

    auto to_t = [](const FeatureSequence& f) {
        std::vector<std::vector<float>> x(f.rows.size());
        for (size_t i = 0; i < f.rows.size(); ++i) x[i] = f.rows[i];
        return x;
    };

    Adam<float> adam;
    adam.lr = cfg.learning_rate;
    std::vector<Param<float>*> ps = model.params();
    adam.attach(ps);

    double best_acc = -1.0;
    std::vector<std::vector<float>> best_weights;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        for (size_t s = 0; s < features.size(); ++s) {
            for (Param<float>* p : ps) p->zero_grad();
            model.loss_and_grad(to_t(features[s]), labels[s]);
            adam.step(ps);
        }
        if (val_features && val_labels) {
            long correct = 0, total = 0;
            for (size_t s = 0; s < val_features->size(); ++s) {
                auto probs = model.forward(to_t((*val_features)[s]));
                for (size_t t = 0; t < probs.size(); ++t) {
                    int pred = probs[t][1] >= probs[t][0] ? 1 : 0;
                    correct += pred == (*val_labels)[s][t];
                    ++total;
                }
            }
            double acc = total ? double(correct) / double(total) : 0.0;
            if (acc > best_acc) {
                best_acc = acc;
                best_weights.clear();
                for (Param<float>* p : ps) best_weights.push_back(p->w);
            }
        }
    }
    if (!best_weights.empty()) {
        std::vector<Param<float>*> ps2 = model.params();
        for (size_t i = 0; i < ps2.size(); ++i) ps2[i]->w = best_weights[i];
    }
    return model;
}

std::vector<std::array<float, 2>> tcn_forward(const TcnModel& model,
                                              const FeatureSequence& features) {
    std::vector<std::vector<float>> x(features.rows.size());
    for (size_t i = 0; i < features.rows.size(); ++i) x[i] = features.rows[i];
    return model.forward(x);
}

void save_tcn(const std::string& path, const TcnModel& model) {
    nlohmann::json j{{"type", "tcn"},
                     {"layers", model.cfg.layers},
                     {"channels", model.cfg.channels},
                     {"in_dim", model.cfg.in_dim},
                     {"n_classes", model.cfg.n_classes},
                     {"lambda_smooth", model.cfg.lambda_smooth},
                     {"kappa_trunc", model.cfg.kappa_trunc},
                     {"epochs", model.cfg.epochs},
                     {"learning_rate", model.cfg.learning_rate},
                     {"seed", model.cfg.seed}};
    std::vector<NamedTensor> tensors;
    for (const Param<float>* p : model.params())
        tensors.push_back({p->name, p->dims, p->w});
    save_nnsm(path, j.dump(), tensors);
}

TcnModel load_tcn(const std::string& path) {
    auto [cfg_json, tensors] = load_nnsm(path);
    nlohmann::json j = nlohmann::json::parse(cfg_json);
    if (j.value("type", "") != "tcn") throw std::runtime_error("load_tcn: not a TCN model file");
    TcnModel model;
    model.cfg.layers = j.at("layers");
    model.cfg.channels = j.at("channels");
    model.cfg.in_dim = j.at("in_dim");
    model.cfg.n_classes = j.at("n_classes");
    model.cfg.lambda_smooth = j.at("lambda_smooth");
    model.cfg.kappa_trunc = j.at("kappa_trunc");
    model.cfg.epochs = j.at("epochs");
    model.cfg.learning_rate = j.at("learning_rate");
    model.cfg.seed = j.at("seed");
    model.init(model.cfg.seed);
    std::vector<Param<float>*> ps = model.params();
    if (ps.size() != tensors.size()) throw std::runtime_error("load_tcn: tensor count mismatch");
    for (size_t i = 0; i < ps.size(); ++i) {
        if (tensors[i].name != ps[i]->name || tensors[i].data.size() != ps[i]->w.size())
            throw std::runtime_error("load_tcn: tensor layout mismatch at " + tensors[i].name);
        ps[i]->w = tensors[i].data;
    }
    return model;
}

}  // namespace nns
