#pragma once

#include <optional>
#include <string>
#include <vector>

namespace tfme {

// One parsed `-vf` / `-af` filter with key=value args (positional args get
// synthetic keys "0", "1", ...).
struct FilterSpec {
    std::string name;
    std::vector<std::pair<std::string, std::string>> args;

    std::string arg(const std::string& key, const std::string& fallback = "") const {
        for (const auto& [k, v] : args)
            if (k == key) return v;
        return fallback;
    }
    bool has(const std::string& key) const {
        for (const auto& [k, v] : args)
            if (k == key) return true;
        return false;
    }
};

struct InputSpec {
    std::string url;
    std::string format;        // "", "rawvideo", "s16le", "concat"
    int width = 0, height = 0; // rawvideo
    double fps = 0;            // rawvideo
    std::string pix_fmt;       // rawvideo (rgb24 only)
    int sample_rate = 0;       // s16le
    int channels = 0;          // s16le
    double seek_s = -1;        // -ss placed before -i
};

struct OutputSpec {
    std::string url;
    std::string format;  // from -f, else guessed from the extension
    double start_s = -1; // -ss (output side)
    double end_s = -1;   // -to
    double duration_s = -1; // -t
    long frames_v = -1;  // -frames:v
    std::string vcodec;  // "", "mpeg4", "mjpeg", "copy"
    std::string acodec;  // "", "aac", "pcm_s16le"
    bool no_video = false;
    bool no_audio = false;
    double qscale_v = -1;
    long bitrate_a = -1;
    int sample_rate = 0; // -ar
    int channels = 0;    // -ac
    double fps = 0;      // -r
    std::vector<FilterSpec> vf;
    std::vector<FilterSpec> af;
    std::vector<std::string> maps; // "0:v", "1:a"
};

struct EngineArgs {
    std::vector<InputSpec> inputs;
    std::vector<OutputSpec> outputs; // at most one supported
    bool quiet = false;
};

EngineArgs parse_args(int argc, char** argv);

// Splits a filter chain on top-level commas (quotes and parens protected),
// then each filter into name + args.
std::vector<FilterSpec> parse_filter_chain(const std::string& chain);

double parse_time(const std::string& text); // "SS.ms" or "HH:MM:SS.ms"

} // namespace tfme
