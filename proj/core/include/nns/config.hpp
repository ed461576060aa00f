#pragma once

#include <string>

#include "nns/pipeline.hpp"
#include "nns/segmenter.hpp"

namespace nns {

// Whole-pipeline settings document. Every field defaults as in the per-module
// config records; unknown JSON keys are rejected.
struct PipelineConfig {
    SynthConfig synth;
    FlowConfig flow;
    StabilizeConfig stabilize;
    RecognizerConfig recognizer;
    TcnConfig segmenter;
    double hsv_max_magnitude = 4.0;
    uint64_t seed = 0;
};

PipelineConfig parse_pipeline_config(const std::string& json_text);
PipelineConfig load_pipeline_config(const std::string& path);
std::string pipeline_config_json(const PipelineConfig& cfg);

}  // namespace nns
