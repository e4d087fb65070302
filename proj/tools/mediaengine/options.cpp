#include "options.hpp"

#include "av_raii.hpp"

#include <cstdlib>
#include <cstring>
#include <map>

namespace tfme {

namespace {

[[noreturn]] void usage_error(const std::string& msg) {
    throw EngineError(msg);
}

double to_double(const std::string& s, const char* what) {
    char* end = nullptr;
    double v = strtod(s.c_str(), &end);
    if (end == s.c_str()) usage_error(std::string("bad number for ") + what + ": " + s);
    return v;
}

// Split on `sep` at paren/quote depth zero.
std::vector<std::string> split_protected(const std::string& s, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    int depth = 0;
    bool quoted = false;
    for (char c : s) {
        if (quoted) {
            if (c == '\'') { quoted = false; continue; }
            cur.push_back(c);
            continue;
        }
        if (c == '\'') { quoted = true; continue; }
        if (c == '(') depth++;
        if (c == ')') depth--;
        if (c == sep && depth == 0) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    parts.push_back(cur);
    return parts;
}

} // namespace

double parse_time(const std::string& text) {
    // HH:MM:SS(.frac) or plain seconds.
    if (text.find(':') == std::string::npos) return to_double(text, "time");
    double total = 0;
    for (const auto& p : split_protected(text, ':')) total = total * 60 + to_double(p, "time");
    return total;
}

std::vector<FilterSpec> parse_filter_chain(const std::string& chain) {
    std::vector<FilterSpec> filters;
    for (const auto& item : split_protected(chain, ',')) {
        if (item.empty()) continue;
        FilterSpec f;
        auto eqname = item.find('=');
        if (eqname == std::string::npos) {
            f.name = item;
        } else {
            f.name = item.substr(0, eqname);
            int pos_index = 0;
            for (const auto& kv : split_protected(item.substr(eqname + 1), ':')) {
                auto eq = kv.find('=');
                if (eq == std::string::npos) f.args.emplace_back(std::to_string(pos_index++), kv);
                else f.args.emplace_back(kv.substr(0, eq), kv.substr(eq + 1));
            }
        }
        filters.push_back(std::move(f));
    }
    return filters;
}

// ffmpeg option placement: every per-file option applies to the *next* file
// on the command line, input (-i URL) or output (bare URL). We accumulate
// pending options and materialize them when the file token arrives.
EngineArgs parse_args(int argc, char** argv) {
    EngineArgs out;
    std::map<std::string, std::string> pend;       // single-valued pending options
    std::vector<FilterSpec> pend_vf, pend_af;
    std::vector<std::string> pend_maps;
    bool pend_vn = false, pend_an = false;

    auto clear_pending = [&] {
        pend.clear();
        pend_vf.clear();
        pend_af.clear();
        pend_maps.clear();
        pend_vn = pend_an = false;
    };

    auto take_input = [&](const std::string& url) {
        InputSpec in;
        in.url = url;
        in.format = pend.count("f") ? pend["f"] : "";
        if (pend.count("s") &&
            sscanf(pend["s"].c_str(), "%dx%d", &in.width, &in.height) != 2)
            usage_error("bad -s value: " + pend["s"]);
        if (pend.count("r")) in.fps = to_double(pend["r"], "-r");
        if (pend.count("pix_fmt")) in.pix_fmt = pend["pix_fmt"];
        if (pend.count("ar")) in.sample_rate = static_cast<int>(to_double(pend["ar"], "-ar"));
        if (pend.count("ac")) in.channels = static_cast<int>(to_double(pend["ac"], "-ac"));
        if (pend.count("ss")) in.seek_s = parse_time(pend["ss"]);
        out.inputs.push_back(std::move(in));
        clear_pending();
    };

    auto take_output = [&](const std::string& url) {
        OutputSpec o;
        o.url = url;
        if (pend.count("f")) o.format = pend["f"];
        if (pend.count("ss")) o.start_s = parse_time(pend["ss"]);
        if (pend.count("to")) o.end_s = parse_time(pend["to"]);
        if (pend.count("t")) o.duration_s = parse_time(pend["t"]);
        if (pend.count("frames_v")) o.frames_v = static_cast<long>(to_double(pend["frames_v"], "-frames:v"));
        if (pend.count("vcodec")) o.vcodec = pend["vcodec"];
        if (pend.count("acodec")) o.acodec = pend["acodec"];
        if (pend.count("qscale_v")) o.qscale_v = to_double(pend["qscale_v"], "-q:v");
        if (pend.count("b_a")) {
            std::string v = pend["b_a"];
            double mult = 1;
            if (!v.empty() && (v.back() == 'k' || v.back() == 'K')) { mult = 1000; v.pop_back(); }
            o.bitrate_a = static_cast<long>(to_double(v, "-b:a") * mult);
        }
        if (pend.count("ar")) o.sample_rate = static_cast<int>(to_double(pend["ar"], "-ar"));
        if (pend.count("ac")) o.channels = static_cast<int>(to_double(pend["ac"], "-ac"));
        if (pend.count("r")) o.fps = to_double(pend["r"], "-r");
        o.vf = std::move(pend_vf);
        o.af = std::move(pend_af);
        o.maps = std::move(pend_maps);
        o.no_video = pend_vn;
        o.no_audio = pend_an;
        out.outputs.push_back(std::move(o));
        clear_pending();
    };

    auto need_value = [&](int& i, const std::string& opt) -> std::string {
        if (i + 1 >= argc) usage_error("missing value for " + opt);
        return argv[++i];
    };

    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        if (a == "-hide_banner" || a == "-y" || a == "-nostdin" || a == "-stats" ||
            a == "-nostats" || a == "-shortest")
            continue;
        if (a == "-v" || a == "-loglevel") {
            std::string lvl = need_value(i, a);
            out.quiet = (lvl == "quiet" || lvl == "error" || lvl == "warning");
            continue;
        }
        if (a == "-i") { take_input(need_value(i, a)); continue; }
        if (a == "-vf" || a == "-filter:v") { pend_vf = parse_filter_chain(need_value(i, a)); continue; }
        if (a == "-af" || a == "-filter:a") { pend_af = parse_filter_chain(need_value(i, a)); continue; }
        if (a == "-map") { pend_maps.push_back(need_value(i, a)); continue; }
        if (a == "-vn") { pend_vn = true; continue; }
        if (a == "-an") { pend_an = true; continue; }
        if (a == "-safe") { need_value(i, a); continue; }

        static const std::map<std::string, std::string> value_opts = {
            {"-f", "f"}, {"-s", "s"}, {"-video_size", "s"}, {"-r", "r"}, {"-framerate", "r"},
            {"-pix_fmt", "pix_fmt"}, {"-ar", "ar"}, {"-ac", "ac"}, {"-ss", "ss"}, {"-to", "to"},
            {"-t", "t"}, {"-frames:v", "frames_v"}, {"-vframes", "frames_v"},
            {"-c:v", "vcodec"}, {"-vcodec", "vcodec"}, {"-c:a", "acodec"}, {"-acodec", "acodec"},
            {"-q:v", "qscale_v"}, {"-qscale:v", "qscale_v"}, {"-b:a", "b_a"},
        };
        if (auto it = value_opts.find(a); it != value_opts.end()) {
            pend[it->second] = need_value(i, a);
            continue;
        }
        if (!a.empty() && a[0] == '-' && a != "-") usage_error("unsupported option: " + a);

        take_output(a);  // bare token (or "-") = output url
    }
    if (!pend.empty() || !pend_vf.empty() || !pend_af.empty() || !pend_maps.empty())
        usage_error("trailing options without an output file");
    return out;
}

} // namespace tfme
