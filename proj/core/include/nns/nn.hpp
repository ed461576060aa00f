#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "nns/common.hpp"

namespace nns {

// Learnable tensor with its gradient buffer.
template <class T>
struct Param {
    std::string name;
    std::vector<uint32_t> dims;
    std::vector<T> w, g;

    void init(std::string n, std::vector<uint32_t> d) {
        name = std::move(n);
        dims = std::move(d);
        size_t sz = 1;
        for (uint32_t x : dims) sz *= x;
        w.assign(sz, T(0));
        g.assign(sz, T(0));
    }
    void zero_grad() { std::fill(g.begin(), g.end(), T(0)); }
};

// Uniform(-k, k) with k = 1/sqrt(fan_in).
template <class T>
void init_uniform(Param<T>& p, size_t fan_in, Rng& rng) {
    double k = 1.0 / std::sqrt(double(fan_in));
    for (T& v : p.w) v = T(uniform_real(rng, -k, k));
}

// Adaptive-moment SGD (beta1=0.9, beta2=0.999).
template <class T>
struct Adam {
    double lr = 1e-4, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;
    std::vector<std::vector<T>> m, v;
    long step_count = 0;

    void attach(const std::vector<Param<T>*>& params) {
        m.clear();
        v.clear();
        for (const Param<T>* p : params) {
            m.emplace_back(p->w.size(), T(0));
            v.emplace_back(p->w.size(), T(0));
        }
        step_count = 0;
    }

    void step(const std::vector<Param<T>*>& params) {
        ++step_count;
        double bc1 = 1.0 - std::pow(beta1, double(step_count));
        double bc2 = 1.0 - std::pow(beta2, double(step_count));
        for (size_t i = 0; i < params.size(); ++i) {
            Param<T>& p = *params[i];
            for (size_t j = 0; j < p.w.size(); ++j) {
                double g = double(p.g[j]);
                m[i][j] = T(beta1 * double(m[i][j]) + (1.0 - beta1) * g);
                v[i][j] = T(beta2 * double(v[i][j]) + (1.0 - beta2) * g * g);
                double mhat = double(m[i][j]) / bc1;
                double vhat = double(v[i][j]) / bc2;
                p.w[j] -= T(lr * mhat / (std::sqrt(vhat) + eps));
            }
        }
    }
};

template <class T>
inline void softmax2(const T* logits, T* probs, int n) {
    T mx = logits[0];
    for (int i = 1; i < n; ++i) mx = std::max(mx, logits[i]);
    T sum = T(0);
    for (int i = 0; i < n; ++i) {
        probs[i] = std::exp(logits[i] - mx);
        sum += probs[i];
    }
    for (int i = 0; i < n; ++i) probs[i] /= sum;
}

}  // namespace nns
