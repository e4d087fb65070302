#include "fixtures.hpp"

#include "trailforge/errors.hpp"
#include "trailforge/jsonio.hpp"
#include "trailforge/subprocess.hpp"

#include <fmt/core.h>

#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdlib>

#include <unistd.h>

namespace fixtures {

namespace fs = std::filesystem;
using namespace trailforge;

fs::path engine_binary() {
    const char* env = std::getenv("TRAILFORGE_MEDIA_ENGINE");
    if (!env || !*env)
        throw std::runtime_error("TRAILFORGE_MEDIA_ENGINE is not set (run via ctest)");
    return env;
}

fs::path mockadapter_binary() {
    const char* env = std::getenv("TRAILFORGE_MOCKADAPTER");
    if (!env || !*env)
        throw std::runtime_error("TRAILFORGE_MOCKADAPTER is not set (run via ctest)");
    return env;
}

TempDir::TempDir(const std::string& tag) {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            fmt::format("trailforge_test_{}_{}_{}", tag, getpid(), counter.fetch_add(1));
    fs::create_directories(path_);
    keep_ = std::getenv("KEEP_TEST_OUTPUT") != nullptr;
}

TempDir::~TempDir() {
    if (!keep_) {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
}

void make_movie(const fs::path& out, const MovieSpec& spec) {
    const auto frame_bytes = static_cast<size_t>(spec.width) * spec.height * 3;

    // Per-segment frame counts snap to the cumulative timeline so rounding
    // never drifts across many segments.
    std::vector<long> frames_per_segment;
    double elapsed = 0;
    long emitted = 0;
    for (const auto& seg : spec.segments) {
        elapsed += seg.duration_s;
        auto target = static_cast<long>(std::llround(elapsed * spec.fps));
        frames_per_segment.push_back(target - emitted);
        emitted = target;
    }

    fs::path audio_pcm;
    const bool with_audio = !spec.audio.samples.empty();
    if (with_audio) {
        audio_pcm = out;
        audio_pcm += ".pcm";
        std::string bytes;
        bytes.reserve(spec.audio.samples.size() * 2);
        for (float v : spec.audio.samples) {
            float c = std::clamp(v, -1.0f, 1.0f);
            auto s = static_cast<int16_t>(std::lrintf(c * 32767.0f));
            bytes.push_back(static_cast<char>(s & 0xff));
            bytes.push_back(static_cast<char>((s >> 8) & 0xff));
        }
        write_text_file(audio_pcm, bytes);
    }

    std::vector<std::string> argv = {engine_binary().string(), "-hide_banner", "-y",
                                     "-f", "rawvideo", "-pix_fmt", "rgb24",
                                     "-s", fmt::format("{}x{}", spec.width, spec.height),
                                     "-r", fmt::format("{:g}", spec.fps), "-i", "-"};
    if (with_audio) {
        argv.insert(argv.end(), {"-f", "s16le", "-ar", std::to_string(spec.audio.sample_rate),
                                 "-ac", "1", "-i", audio_pcm.string()});
    }
    argv.insert(argv.end(), {"-c:v", "mpeg4", "-q:v", "3"});
    if (with_audio) argv.insert(argv.end(), {"-c:a", "aac", "-b:a", "192k"});
    argv.push_back(out.string());

    // Stream frames segment by segment so multi-minute fixtures never touch
    // the disk as raw RGB.
    size_t segment = 0;
    long emitted_in_segment = 0;
    CommandOptions opts;
    opts.stdin_provider = [&, frame_bytes](std::string& chunk) {
        while (segment < frames_per_segment.size() &&
               emitted_in_segment >= frames_per_segment[segment]) {
            ++segment;
            emitted_in_segment = 0;
        }
        if (segment >= frames_per_segment.size()) return false;
        const auto& rgb = spec.segments[segment].rgb;
        chunk.resize(frame_bytes);
        for (size_t i = 0; i < frame_bytes; i += 3) {
            chunk[i] = static_cast<char>(rgb[0]);
            chunk[i + 1] = static_cast<char>(rgb[1]);
            chunk[i + 2] = static_cast<char>(rgb[2]);
        }
        ++emitted_in_segment;
        return true;
    };
    CommandResult res = run_command(argv, opts);
    if (with_audio) fs::remove(audio_pcm);
    if (res.exit_code != 0)
        throw std::runtime_error("fixture encode failed: " + res.err);
}

std::array<uint8_t, 3> scene_color(int index) {
    // Walk the hue wheel in big steps; neighbours stay far apart.
    double h = std::fmod(index * 77.0, 360.0) / 60.0;
    double x = 1.0 - std::abs(std::fmod(h, 2.0) - 1.0);
    double r = 0, g = 0, b = 0;
    switch (static_cast<int>(h)) {
        case 0: r = 1; g = x; break;
        case 1: r = x; g = 1; break;
        case 2: g = 1; b = x; break;
        case 3: g = x; b = 1; break;
        case 4: r = x; b = 1; break;
        default: r = 1; b = x; break;
    }
    auto byte = [](double v) { return static_cast<uint8_t>(std::lround(40 + v * 200)); };
    return {byte(r), byte(g), byte(b)};
}

ProjectFixture make_project_fixture(const fs::path& dir, const ProjectFixtureSpec& spec) {
    fs::create_directories(dir);
    fs::path cues = dir / "cues";
    fs::create_directories(cues);

    // Dialogue windows sit at fixed fractions of the runtime inside stable
    // scenes; each window may carry a short orphan flash.
    std::vector<DialogueSpot> dialogues;
    const std::vector<std::pair<std::string, std::string>> lines = {
        {"You're in danger now.", "Mara"},
        {"I fear the coming storm.", "Joss"},
        {"There is still hope for us.", "Mara"},
    };
    int n_dialogues = std::min<int>(static_cast<int>(lines.size()), std::max(1, spec.n_qc_target));
    for (int i = 0; i < n_dialogues; ++i) {
        double center = spec.duration_s * (0.25 + 0.25 * i);
        double len = 2.4 + 0.3 * i;
        dialogues.push_back({center - len / 2, center + len / 2, lines[static_cast<size_t>(i)].first,
                             lines[static_cast<size_t>(i)].second});
    }

    // Scene plan: varied 3-7 s scenes, forced stable across each dialogue
    // window (with +-1.5 s margin), plus the orphan flash.
    MovieSpec movie;
    movie.width = spec.width;
    movie.height = spec.height;
    movie.fps = spec.fps;

    auto in_dialogue_margin = [&](double t) {
        for (const auto& d : dialogues)
            if (t > d.start_s - 1.6 && t < d.end_s + 1.6) return true;
        return false;
    };

    int color_index = 0;
    double t = 0;
    const std::array<uint8_t, 3> flash = {250, 250, 250};
    while (t < spec.duration_s - 1e-9) {
        double scene_len = 3.0 + std::fmod(color_index * 1.7, 4.0);
        // A scene that would end inside a dialogue margin stretches past it.
        double end = t + scene_len;
        for (const auto& d : dialogues) {
            if (end > d.start_s - 1.6 && end < d.end_s + 1.6) end = d.end_s + 1.6;
        }
        end = std::min(end, spec.duration_s);
        auto color = scene_color(color_index++);
        // Split the scene around any orphan flash it contains.
        bool split = false;
        if (spec.orphan_flashes) {
            for (const auto& d : dialogues) {
                double fmid = (d.start_s + d.end_s) / 2;
                if (fmid > t && fmid + 0.3 < end && in_dialogue_margin(fmid)) {
                    movie.segments.push_back({color, fmid - t});
                    movie.segments.push_back({flash, 0.3});
                    movie.segments.push_back({color, end - (fmid + 0.3)});
                    split = true;
                    break;
                }
            }
        }
        if (!split) movie.segments.push_back({color, end - t});
        t = end;
    }

    // Audio: quiet noise bed + a 330 Hz burst per dialogue.
    movie.audio = make_noise(spec.duration_s, 0.02, 99);
    for (const auto& d : dialogues) {
        PcmBuffer burst = make_sine(d.end_s - d.start_s, 330.0, 0.3);
        mix_into(movie.audio, burst, d.start_s);
    }

    fs::path movie_path = dir / "movie.mp4";
    make_movie(movie_path, movie);

    // Cue sheets keyed to the pipeline's extracted-audio filename.
    json asr_segments = json::array();
    json vad_speech = json::array();
    for (const auto& d : dialogues) {
        std::string normalized;
        for (char c : d.text) {
            if (std::isalnum(static_cast<unsigned char>(c)) || c == ' ' || c == '\'')
                normalized.push_back(c);
        }
        asr_segments.push_back(
            {{"start_s", d.start_s}, {"end_s", d.end_s}, {"text", normalized}});
        vad_speech.push_back({{"start_s", d.start_s + 0.05}, {"end_s", d.end_s - 0.1}});
    }
    save_json(cues / "movie.audio.wav.asr.json", json{{"segments", asr_segments}});
    save_json(cues / "movie.audio.wav.vad.json", json{{"speech", vad_speech}});

    // Metadata: quotes as IMDb-style blocks; a long decoy quote sorts last.
    json metadata;
    metadata["title"] = "The Signal Fire";
    metadata["synopsis"] =
        "A storm batters the coastal town of Graymoor. Mara keeps the signal fire burning "
        "against the dark. Joss returns from the sea with a warning no one believes. "
        "Together they must hold the light until dawn. An old enemy moves in the shadows. "
        "The town must choose between fear and hope.";
    json quotes = json::array();
    for (const auto& d : dialogues)
        quotes.push_back(fmt::format("{}: \"{}\"", d.speaker, d.text));
    quotes.push_back("Joss: \"Everything we love will be lost forever tonight, Mara.\"");
    metadata["quotes"] = quotes;
    metadata["genres"] = json::array({"Action", "Adventure", "Sci-Fi"});
    metadata["directors"] = json::array({"R. Calloway"});
    metadata["release_date"] = "2024-06-01";
    metadata["color_info"] = "Color";
    save_json(dir / "metadata.json", metadata);

    // Config.
    json config;
    config["movie_path"] = "movie.mp4";
    config["project_name"] = "fixture";
    config["external_movie_id"] = "fx0000001";
    config["n_sc_target"] = spec.n_sc_target;
    config["n_qc_target"] = spec.n_qc_target;
    config["clip_len_min_s"] = 3.0;
    config["clip_len_max_s"] = 8.0;
    config["seed"] = spec.seed;
    save_json(dir / "config.json", config);

    // Adapters manifest.
    json adapters = json::object();
    for (const char* kind : {"llm", "text-embed", "image-embed", "asr", "vad", "tts", "music",
                             "vocal-separate", "ocr"}) {
        json entry;
        if (spec.inproc_adapters) {
            entry["transport"] = "mock";
            entry["options"] = json{{"seed", spec.seed},
                                    {"fixtures_dir", fs::absolute(cues).string()}};
        } else {
            entry["transport"] = "subprocess-lines";
            entry["address"] =
                fmt::format("{} --kind {} --seed {} --fixtures-dir {}",
                            mockadapter_binary().string(), kind, spec.seed,
                            fs::absolute(cues).string());
        }
        adapters[kind] = entry;
    }
    save_json(dir / "adapters.json", adapters);

    ProjectFixture fixture;
    fixture.dir = dir;
    fixture.config = dir / "config.json";
    fixture.adapters = dir / "adapters.json";
    fixture.movie = movie_path;
    fixture.dialogues = dialogues;
    return fixture;
}

} // namespace fixtures
