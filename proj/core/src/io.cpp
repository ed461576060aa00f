#include "nns/io.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

namespace nns {

namespace {

using json = nlohmann::json;

void put_u32(std::vector<uint8_t>& b, uint32_t v) {
    b.push_back(uint8_t(v)); b.push_back(uint8_t(v >> 8));
    b.push_back(uint8_t(v >> 16)); b.push_back(uint8_t(v >> 24));
}

void put_f32(std::vector<uint8_t>& b, float f) {
    uint32_t v;
    std::memcpy(&v, &f, 4);
    put_u32(b, v);
}

struct Reader {
    const std::vector<uint8_t>& b;
    size_t pos = 0;

    void need(size_t n, const char* what) const {
        if (pos + n > b.size()) throw ParseError(std::string("truncated ") + what, pos);
    }
    uint32_t u32(const char* what) {
        need(4, what);
        uint32_t v = uint32_t(b[pos]) | uint32_t(b[pos + 1]) << 8 | uint32_t(b[pos + 2]) << 16 |
                     uint32_t(b[pos + 3]) << 24;
        pos += 4;
        return v;
    }
    float f32(const char* what) {
        uint32_t v = u32(what);
        float f;
        std::memcpy(&f, &v, 4);
        return f;
    }
    void bytes(void* dst, size_t n, const char* what) {
        need(n, what);
        std::memcpy(dst, b.data() + pos, n);
        pos += n;
    }
    void magic(const char* m) {
        need(4, "magic");
        if (std::memcmp(b.data() + pos, m, 4) != 0)
            throw ParseError(std::string("bad magic, expected ") + m, pos);
        pos += 4;
    }
};

std::vector<uint8_t> read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    return std::vector<uint8_t>(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>());
}

}  // namespace

void atomic_write(const std::string& path, const std::vector<uint8_t>& bytes) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw std::runtime_error("cannot write " + tmp);
        f.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    }
    std::filesystem::rename(tmp, path);
}

void atomic_write(const std::string& path, const std::string& text) {
    atomic_write(path, std::vector<uint8_t>(text.begin(), text.end()));
}

void save_nnsv(const std::string& path, const FrameSequence& video) {
    std::vector<uint8_t> b;
    b.insert(b.end(), {'N', 'N', 'S', 'V'});
    put_u32(b, 1);
    put_u32(b, uint32_t(video.n_frames()));
    put_u32(b, uint32_t(video.height));
    put_u32(b, uint32_t(video.width * video.channels));
    put_u32(b, uint32_t(std::lround(video.fps * 1000.0)));
    b.insert(b.end(), video.data.begin(), video.data.end());
    atomic_write(path, b);
}

FrameSequence load_nnsv(const std::string& path, int channels) {
    std::vector<uint8_t> bytes = read_file(path);
    Reader r{bytes};
    r.magic("NNSV");
    uint32_t version = r.u32("version");
    if (version != 1) throw ParseError("unsupported NNSV version", r.pos - 4);
    FrameSequence v;
    uint32_t n = r.u32("n_frames");
    v.height = int(r.u32("height"));
    uint32_t stored_w = r.u32("width");
    if (channels < 1 || stored_w % uint32_t(channels) != 0)
        throw ParseError("width not divisible by channel count", r.pos - 4);
    v.width = int(stored_w) / channels;
    v.channels = channels;
    v.fps = double(r.u32("fps_milli")) / 1000.0;
    size_t total = size_t(n) * v.height * stored_w;
    v.data.resize(total);
    r.bytes(v.data.data(), total, "frame data");
    return v;
}

void save_nnsf(const std::string& path, const std::vector<FlowField>& flows, double fps) {
    std::vector<uint8_t> b;
    b.insert(b.end(), {'N', 'N', 'S', 'F'});
    put_u32(b, 1);
    put_u32(b, uint32_t(flows.size()));
    put_u32(b, flows.empty() ? 0 : uint32_t(flows[0].h));
    put_u32(b, flows.empty() ? 0 : uint32_t(flows[0].w));
    put_u32(b, uint32_t(std::lround(fps * 1000.0)));
    for (const FlowField& f : flows) {
        for (float x : f.u) put_f32(b, x);
        for (float x : f.v) put_f32(b, x);
    }
    atomic_write(path, b);
}

std::vector<FlowField> load_nnsf(const std::string& path, double* fps) {
    std::vector<uint8_t> bytes = read_file(path);
    Reader r{bytes};
    r.magic("NNSF");
    if (r.u32("version") != 1) throw ParseError("unsupported NNSF version", r.pos - 4);
    uint32_t n = r.u32("n_frames");
    int h = int(r.u32("height")), w = int(r.u32("width"));
    double fp = double(r.u32("fps_milli")) / 1000.0;
    if (fps) *fps = fp;
    std::vector<FlowField> out(n, FlowField(h, w));
    for (FlowField& f : out) {
        for (float& x : f.u) x = r.f32("u plane");
        for (float& x : f.v) x = r.f32("v plane");
    }
    return out;
}

void save_nnsx(const std::string& path, const std::vector<std::vector<float>>& features) {
    std::vector<uint8_t> b;
    b.insert(b.end(), {'N', 'N', 'S', 'X'});
    put_u32(b, uint32_t(features.size()));
    put_u32(b, features.empty() ? 0 : uint32_t(features[0].size()));
    for (const auto& row : features)
        for (float f : row) put_f32(b, f);
    atomic_write(path, b);
}

std::vector<std::vector<float>> load_nnsx(const std::string& path) {
    std::vector<uint8_t> bytes = read_file(path);
    Reader r{bytes};
    r.magic("NNSX");
    uint32_t t = r.u32("T"), d = r.u32("D");
    std::vector<std::vector<float>> out(t, std::vector<float>(d));
    for (auto& row : out)
        for (float& f : row) f = r.f32("feature data");
    return out;
}

void save_nnsm(const std::string& path, const std::string& config_json,
               const std::vector<NamedTensor>& tensors) {
    std::vector<uint8_t> b;
    b.insert(b.end(), {'N', 'N', 'S', 'M'});
    put_u32(b, 1);
    put_u32(b, uint32_t(config_json.size()));
    b.insert(b.end(), config_json.begin(), config_json.end());
    for (const NamedTensor& t : tensors) {
        put_u32(b, uint32_t(t.name.size()));
        b.insert(b.end(), t.name.begin(), t.name.end());
        put_u32(b, uint32_t(t.dims.size()));
        size_t n = 1;
        for (uint32_t d : t.dims) {
            put_u32(b, d);
            n *= d;
        }
        if (n != t.data.size()) throw std::invalid_argument("save_nnsm: dims/data mismatch");
        for (float f : t.data) put_f32(b, f);
    }
    atomic_write(path, b);
}

std::pair<std::string, std::vector<NamedTensor>> load_nnsm(const std::string& path) {
    std::vector<uint8_t> bytes = read_file(path);
    Reader r{bytes};
    r.magic("NNSM");
    if (r.u32("version") != 1) throw ParseError("unsupported NNSM version", r.pos - 4);
    uint32_t jl = r.u32("config length");
    std::string cfg(jl, '\0');
    r.bytes(cfg.data(), jl, "config json");
    std::vector<NamedTensor> tensors;
    while (r.pos < bytes.size()) {
        NamedTensor t;
        uint32_t nl = r.u32("tensor name length");
        t.name.resize(nl);
        r.bytes(t.name.data(), nl, "tensor name");
        uint32_t rank = r.u32("tensor rank");
        size_t n = 1;
        for (uint32_t i = 0; i < rank; ++i) {
            t.dims.push_back(r.u32("tensor dim"));
            n *= t.dims.back();
        }
        t.data.resize(n);
        for (float& f : t.data) f = r.f32("tensor data");
        tensors.push_back(std::move(t));
    }
    return {cfg, tensors};
}

void save_annotation_csv(const std::string& path, const EventTrack& track,
                         const std::string& event_type) {
    std::ostringstream ss;
    ss << "event_type,start_s,end_s,confidence\n";
    ss.precision(9);
    for (const Event& e : track.events) {
        ss << event_type << "," << e.start_s << "," << e.end_s << ",";
        if (e.confidence) ss << *e.confidence;
        ss << "\n";
    }
    atomic_write(path, ss.str());
}

EventTrack load_annotation_csv(const std::string& path, double duration_s,
                               const std::string& event_type) {
    std::vector<uint8_t> bytes = read_file(path);
    std::string text(bytes.begin(), bytes.end());
    EventTrack track;
    track.duration_s = duration_s;
    size_t pos = 0;
    bool header = true;
    while (pos < text.size()) {
        size_t eol = text.find('\n', pos);
        if (eol == std::string::npos) eol = text.size();
        std::string line = text.substr(pos, eol - pos);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (header) {
            if (line.rfind("event_type,start_s,end_s", 0) != 0)
                throw ParseError("bad annotation CSV header", pos);
            header = false;
        } else if (!line.empty()) {
            std::vector<std::string> cols;
            std::stringstream ls(line);
            std::string c;
            while (std::getline(ls, c, ',')) cols.push_back(c);
            if (cols.size() < 3) throw ParseError("annotation row needs 3+ columns", pos);
            if (!event_type.empty() && cols[0] != event_type) { pos = eol + 1; continue; }
            Event e;
            try {
                e.start_s = std::stod(cols[1]);
                e.end_s = std::stod(cols[2]);
                if (cols.size() > 3 && !cols[3].empty()) e.confidence = std::stod(cols[3]);
            } catch (const std::exception&) {
                throw ParseError("bad number in annotation row", pos);
            }
            track.events.push_back(e);
        }
        pos = eol + 1;
    }
    std::sort(track.events.begin(), track.events.end(),
              [](const Event& a, const Event& b) { return a.start_s < b.start_s; });
    track.validate();
    return track;
}

std::string events_to_json(const EventTrack& track) {
    json arr = json::array();
    for (const Event& e : track.events) {
        json o{{"start_s", e.start_s}, {"end_s", e.end_s}};
        if (e.confidence) o["confidence"] = *e.confidence;
        arr.push_back(o);
    }
    return arr.dump(2);
}

EventTrack events_from_json(const std::string& json_text, double duration_s) {
    json arr;
    try {
        arr = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(e.what(), e.byte);
    }
    EventTrack track;
    track.duration_s = duration_s;
    for (const json& o : arr) {
        Event e;
        e.start_s = o.at("start_s").get<double>();
        e.end_s = o.at("end_s").get<double>();
        if (o.contains("confidence")) e.confidence = o["confidence"].get<double>();
        track.events.push_back(e);
    }
    std::sort(track.events.begin(), track.events.end(),
              [](const Event& a, const Event& b) { return a.start_s < b.start_s; });
    track.validate();
    return track;
}

void write_manifest(const std::string& artifact_path, const std::string& config_json,
                    uint64_t seed) {
    json m{{"artifact", std::filesystem::path(artifact_path).filename().string()},
           {"config_hash", std::hash<std::string>{}(config_json)},
           {"seed", seed}};
    atomic_write(artifact_path + ".manifest.json", m.dump(2));
}

}  // namespace nns
