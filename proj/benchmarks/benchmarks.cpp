#include <benchmark/benchmark.h>

#include <cmath>
#include <random>

#include "nns/flow.hpp"
#include "nns/recognizer.hpp"
#include "nns/segmenter.hpp"
#include "nns/track.hpp"

using namespace nns;

namespace {

// Smooth textured frame so flow and tracking have structure to latch onto.
ImageU8 textured_frame(int size, float phase) {
    ImageU8 im(size, size);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            float v = 128.f + 60.f * std::sin(0.21f * float(x) + phase) *
                                  std::cos(0.17f * float(y) - phase);
            im.at(y, x) = uint8_t(v);
        }
    return im;
}

void bm_dense_flow(benchmark::State& state) {
    int size = int(state.range(0));
    ImageU8 prev = textured_frame(size, 0.f);
    ImageU8 next = textured_frame(size, 0.35f);
    for (auto _ : state) {
        FlowField f = dense_flow(prev, next);
        benchmark::DoNotOptimize(f.u.data());
    }
}

void bm_mosse_step(benchmark::State& state) {
    ImageU8 frame = textured_frame(96, 0.f);
    BoundingBox box{30, 30, 36, 36};
    MosseFilter filter = mosse_init(frame, box);
    for (auto _ : state) {
        MosseStepResult r = mosse_step(filter, frame);
        benchmark::DoNotOptimize(r.psr);
    }
}

void bm_tcn_forward(benchmark::State& state) {
    TcnConfig cfg;
    cfg.in_dim = 128;
    cfg.channels = 64;
    cfg.layers = 10;
    TcnModel net;
    net.cfg = cfg;
    net.init(1);
    int t = int(state.range(0));
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<float> u(-1.f, 1.f);
    std::vector<std::vector<float>> feats(size_t(t), std::vector<float>(128));
    for (auto& row : feats)
        for (float& x : row) x = u(rng);
    for (auto _ : state) {
        auto probs = net.forward(feats);
        benchmark::DoNotOptimize(probs.data());
    }
}

void bm_recognizer_forward(benchmark::State& state) {
    RecognizerConfig cfg;
    cfg.seed = 3;
    RecognizerModel net;
    net.cfg = cfg;
    net.init(cfg.seed);
    ClipTensor clip(cfg.n_frames, cfg.in_channels, cfg.input_size);
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<float> u(0.f, 1.f);
    for (float& x : clip.data) x = u(rng);
    for (auto _ : state) {
        auto p = net.forward(clip);
        benchmark::DoNotOptimize(p[0]);
    }
}

BENCHMARK(bm_dense_flow)->Arg(64)->Arg(96)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_mosse_step);
BENCHMARK(bm_tcn_forward)->Arg(115)->Arg(575)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_recognizer_forward)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
