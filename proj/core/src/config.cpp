#include "nns/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "nns/io.hpp"

namespace nns {

namespace {

using json = nlohmann::json;

// Pulls known keys out of `o` and errors on anything left over.
struct Section {
    const json& o;
    std::string name;
    std::set<std::string> seen;

    template <class T>
    void get(const char* key, T& out) {
        seen.insert(key);
        if (o.contains(key)) out = o.at(key).get<T>();
    }
    void check() const {
        for (auto it = o.begin(); it != o.end(); ++it)
            if (!seen.count(it.key()))
                throw std::invalid_argument("config: unknown key '" + name + "." + it.key() + "'");
    }
};

void parse_synth(const json& o, SynthConfig& c) {
    Section s{o, "synth", {}};
    s.get("fps", c.fps);
    s.get("suck_hz", c.suck_hz);
    s.get("sucks_per_burst_lo", c.sucks_per_burst_lo);
    s.get("sucks_per_burst_hi", c.sucks_per_burst_hi);
    s.get("bursts_per_minute", c.bursts_per_minute);
    s.get("frame_h", c.frame_h);
    s.get("frame_w", c.frame_w);
    s.get("mouth_amplitude_px", c.mouth_amplitude_px);
    s.get("noise_sigma", c.noise_sigma);
    s.get("seed", c.seed);
    s.seen.insert("jitter");
    if (o.contains("jitter") && !o.at("jitter").is_null()) {
        JitterConfig j;
        Section js{o.at("jitter"), "synth.jitter", {}};
        js.get("amplitude_px", j.amplitude_px);
        js.get("period_s", j.period_s);
        js.check();
        c.jitter = j;
    }
    s.check();
}

void parse_flow(const json& o, FlowConfig& c) {
    Section s{o, "flow", {}};
    s.get("pyramid_levels", c.pyramid_levels);
    s.get("iterations_per_level", c.iterations_per_level);
    s.get("smoothness_alpha", c.smoothness_alpha);
    s.get("downscale", c.downscale);
    s.check();
}

void parse_track(const json& o, StabilizeConfig& c) {
    Section s{o, "track", {}};
    s.get("out_size_px", c.out_size_px);
    s.get("smooth_window", c.smooth_window);
    s.get("corner_redetect_every", c.corner_redetect_every);
    s.get("max_corners", c.max_corners);
    s.get("mosse_learning_rate", c.mosse_learning_rate);
    s.check();
}

void parse_recognizer(const json& o, RecognizerConfig& c) {
    Section s{o, "recognizer", {}};
    s.get("input_size", c.input_size);
    s.get("in_channels", c.in_channels);
    s.seen.insert("conv_channels");
    if (o.contains("conv_channels")) {
        auto a = o.at("conv_channels");
        if (a.size() != 3)
            throw std::invalid_argument("config: recognizer.conv_channels needs 3 entries");
        for (int i = 0; i < 3; ++i) c.conv_channels[size_t(i)] = a.at(size_t(i)).get<int>();
    }
    s.get("hidden", c.hidden);
    s.get("bidirectional", c.bidirectional);
    s.get("feature_dim", c.feature_dim);
    s.get("n_frames", c.n_frames);
    s.get("epochs", c.epochs);
    s.get("learning_rate", c.learning_rate);
    s.get("batch_size", c.batch_size);
    s.get("augment", c.augment);
    s.get("seed", c.seed);
    s.check();
}

void parse_segmenter(const json& o, TcnConfig& c) {
    Section s{o, "segmenter", {}};
    s.get("layers", c.layers);
    s.get("channels", c.channels);
    s.get("in_dim", c.in_dim);
    s.get("lambda_smooth", c.lambda_smooth);
    s.get("kappa_trunc", c.kappa_trunc);
    s.get("epochs", c.epochs);
    s.get("learning_rate", c.learning_rate);
    s.get("seed", c.seed);
    s.check();
}

}  // namespace

PipelineConfig parse_pipeline_config(const std::string& json_text) {
    json o;
    try {
        o = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(e.what(), e.byte);
    }
    PipelineConfig cfg;
    std::set<std::string> known{"synth", "flow", "track", "recognizer",
                                "segmenter", "hsv_max_magnitude", "seed"};
    for (auto it = o.begin(); it != o.end(); ++it)
        if (!known.count(it.key()))
            throw std::invalid_argument("config: unknown key '" + it.key() + "'");
    if (o.contains("synth")) parse_synth(o["synth"], cfg.synth);
    if (o.contains("flow")) parse_flow(o["flow"], cfg.flow);
    if (o.contains("track")) parse_track(o["track"], cfg.stabilize);
    if (o.contains("recognizer")) parse_recognizer(o["recognizer"], cfg.recognizer);
    if (o.contains("segmenter")) parse_segmenter(o["segmenter"], cfg.segmenter);
    if (o.contains("hsv_max_magnitude")) cfg.hsv_max_magnitude = o["hsv_max_magnitude"];
    if (o.contains("seed")) cfg.seed = o["seed"];
    // A top-level seed overrides per-module seeds left at their defaults.
    if (cfg.seed != 0) {
        if (cfg.synth.seed == 0) cfg.synth.seed = cfg.seed;
        if (cfg.recognizer.seed == 0) cfg.recognizer.seed = cfg.seed;
        if (cfg.segmenter.seed == 0) cfg.segmenter.seed = cfg.seed;
    }
    return cfg;
}

PipelineConfig load_pipeline_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse_pipeline_config(ss.str());
}

std::string pipeline_config_json(const PipelineConfig& cfg) {
    json o;
    o["synth"] = {{"fps", cfg.synth.fps},
                  {"suck_hz", cfg.synth.suck_hz},
                  {"sucks_per_burst_lo", cfg.synth.sucks_per_burst_lo},
                  {"sucks_per_burst_hi", cfg.synth.sucks_per_burst_hi},
                  {"bursts_per_minute", cfg.synth.bursts_per_minute},
                  {"frame_h", cfg.synth.frame_h},
                  {"frame_w", cfg.synth.frame_w},
                  {"mouth_amplitude_px", cfg.synth.mouth_amplitude_px},
                  {"noise_sigma", cfg.synth.noise_sigma},
                  {"seed", cfg.synth.seed}};
    if (cfg.synth.jitter)
        o["synth"]["jitter"] = {{"amplitude_px", cfg.synth.jitter->amplitude_px},
                                {"period_s", cfg.synth.jitter->period_s}};
    o["flow"] = {{"pyramid_levels", cfg.flow.pyramid_levels},
                 {"iterations_per_level", cfg.flow.iterations_per_level},
                 {"smoothness_alpha", cfg.flow.smoothness_alpha},
                 {"downscale", cfg.flow.downscale}};
    o["track"] = {{"out_size_px", cfg.stabilize.out_size_px},
                  {"smooth_window", cfg.stabilize.smooth_window},
                  {"corner_redetect_every", cfg.stabilize.corner_redetect_every},
                  {"max_corners", cfg.stabilize.max_corners},
                  {"mosse_learning_rate", cfg.stabilize.mosse_learning_rate}};
    o["recognizer"] = {{"input_size", cfg.recognizer.input_size},
                       {"in_channels", cfg.recognizer.in_channels},
                       {"conv_channels", cfg.recognizer.conv_channels},
                       {"hidden", cfg.recognizer.hidden},
                       {"bidirectional", cfg.recognizer.bidirectional},
                       {"feature_dim", cfg.recognizer.feature_dim},
                       {"n_frames", cfg.recognizer.n_frames},
                       {"epochs", cfg.recognizer.epochs},
                       {"learning_rate", cfg.recognizer.learning_rate},
                       {"batch_size", cfg.recognizer.batch_size},
                       {"augment", cfg.recognizer.augment},
                       {"seed", cfg.recognizer.seed}};
    o["segmenter"] = {{"layers", cfg.segmenter.layers},
                      {"channels", cfg.segmenter.channels},
                      {"in_dim", cfg.segmenter.in_dim},
                      {"lambda_smooth", cfg.segmenter.lambda_smooth},
                      {"kappa_trunc", cfg.segmenter.kappa_trunc},
                      {"epochs", cfg.segmenter.epochs},
                      {"learning_rate", cfg.segmenter.learning_rate},
                      {"seed", cfg.segmenter.seed}};
    o["hsv_max_magnitude"] = cfg.hsv_max_magnitude;
    o["seed"] = cfg.seed;
    return o.dump(2);
}

}  // namespace nns
