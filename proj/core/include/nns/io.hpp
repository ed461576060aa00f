#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "nns/common.hpp"
#include "nns/flow.hpp"
#include "nns/timeline.hpp"

namespace nns {

// Malformed input file; `offset` is the byte position of the problem.
struct ParseError : std::runtime_error {
    size_t offset;
    ParseError(const std::string& what, size_t off)
        : std::runtime_error(what + " (byte offset " + std::to_string(off) + ")"), offset(off) {}
};

// Write-temp-then-rename.
void atomic_write(const std::string& path, const std::vector<uint8_t>& bytes);
void atomic_write(const std::string& path, const std::string& text);

// --- NNSV raw video container -----------------------------------------------
// "NNSV", u32 version=1, u32 n_frames, u32 height, u32 width, u32 fps_milli,
// then n_frames*height*width row-major 8-bit frames. Multi-channel sequences
// are stored with width multiplied by the channel count (interleaved pixels).
void save_nnsv(const std::string& path, const FrameSequence& video);
FrameSequence load_nnsv(const std::string& path, int channels = 1);

// --- NNSF flow dump ----------------------------------------------------------
// "NNSF" header in the NNSV layout; each frame is an f32 u plane then v plane.
void save_nnsf(const std::string& path, const std::vector<FlowField>& flows, double fps);
std::vector<FlowField> load_nnsf(const std::string& path, double* fps = nullptr);

// --- NNSX feature matrix -----------------------------------------------------
// "NNSX", u32 T, u32 D, then T*D little-endian f32, row major.
void save_nnsx(const std::string& path, const std::vector<std::vector<float>>& features);
std::vector<std::vector<float>> load_nnsx(const std::string& path);

// --- NNSM model container ----------------------------------------------------
// "NNSM", u32 version=1, u32 json_len + UTF-8 JSON config, then tensors in a
// fixed order: u32 name_len + name, u32 rank, u32 dims..., f32 data.
struct NamedTensor {
    std::string name;
    std::vector<uint32_t> dims;
    std::vector<float> data;
};
void save_nnsm(const std::string& path, const std::string& config_json,
               const std::vector<NamedTensor>& tensors);
std::pair<std::string, std::vector<NamedTensor>> load_nnsm(const std::string& path);

// --- Annotation CSV ----------------------------------------------------------
// Header `event_type,start_s,end_s[,confidence]`, one row per event.
void save_annotation_csv(const std::string& path, const EventTrack& track,
                         const std::string& event_type = "nns");
// Loads rows whose event_type matches (all rows when event_type is empty).
EventTrack load_annotation_csv(const std::string& path, double duration_s,
                               const std::string& event_type = "");

// --- Events JSON ---------------------------------------------------------
std::string events_to_json(const EventTrack& track);
EventTrack events_from_json(const std::string& json_text, double duration_s);

// Manifest recording config hash and seed next to an artifact.
void write_manifest(const std::string& artifact_path, const std::string& config_json,
                    uint64_t seed);

}  // namespace nns
