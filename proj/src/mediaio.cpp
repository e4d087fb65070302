#include "trailforge/mediaio.hpp"

#include "trailforge/errors.hpp"
#include "trailforge/log.hpp"
#include "trailforge/paths.hpp"
#include "trailforge/subprocess.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <thread>

namespace trailforge {

namespace fs = std::filesystem;

namespace {

std::string err_tail(const std::string& err, size_t n = 400) {
    return err.size() <= n ? err : err.substr(err.size() - n);
}

// Run fn(i) for i in [0, count) on up to `parallelism` threads.
void run_parallel(int parallelism, size_t count, const std::function<void(size_t)>& fn) {
    parallelism = std::max(1, parallelism);
    if (parallelism == 1 || count <= 1) {
        for (size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<size_t> next{0};
    std::vector<std::exception_ptr> errors(static_cast<size_t>(parallelism));
    std::vector<std::thread> workers;
    for (int w = 0; w < parallelism; ++w) {
        workers.emplace_back([&, w] {
            for (;;) {
                size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    errors[static_cast<size_t>(w)] = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& t : workers) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

std::string fmt_time(double t) { return fmt::format("{:.6f}", t); }

} // namespace

void Interval::validate() const {
    if (!(start_s >= 0) || !(start_s < end_s))
        fail(errc::invalid_argument,
             fmt::format("invalid interval [{:.3f}, {:.3f}]", start_s, end_s));
}

std::vector<double> plan_frame_timestamps(double duration_s, double head_trim_frac,
                                          double tail_trim_frac) {
    if (duration_s <= 0) fail(errc::invalid_argument, "duration must be positive");
    if (head_trim_frac < 0 || head_trim_frac > 0.3 || tail_trim_frac < 0 || tail_trim_frac > 0.3)
        fail(errc::invalid_argument, "trim fractions must lie in [0, 0.3]");
    if (head_trim_frac + tail_trim_frac >= 1)
        fail(errc::invalid_argument, "trim fractions exceed timeline");

    const double effective = duration_s * (1.0 - head_trim_frac - tail_trim_frac);
    const auto count = static_cast<long>(std::floor(effective / 9.0));
    std::vector<double> stamps;
    if (count <= 0) return stamps;
    stamps.reserve(static_cast<size_t>(count));
    const double start = head_trim_frac * duration_s;
    const double spacing = effective / static_cast<double>(count);
    for (long i = 0; i < count; ++i)
        stamps.push_back(start + (static_cast<double>(i) + 0.5) * spacing);
    return stamps;
}

MediaEngine::MediaEngine(std::string binary_path) : binary_(std::move(binary_path)) {
    if (binary_.empty()) fail(errc::config, "media engine binary path is empty");
}

MediaEngine MediaEngine::resolve(const std::string& configured) {
    if (!configured.empty()) return MediaEngine(configured);
    if (const char* env = std::getenv("TRAILFORGE_MEDIA_ENGINE"); env && *env)
        return MediaEngine(env);
    if (const char* path = std::getenv("PATH")) {
        std::string paths = path;
        size_t pos = 0;
        while (pos <= paths.size()) {
            size_t colon = paths.find(':', pos);
            std::string dir =
                paths.substr(pos, colon == std::string::npos ? std::string::npos : colon - pos);
            if (!dir.empty()) {
                fs::path candidate = fs::path(dir) / "ffmpeg";
                std::error_code ec;
                if (fs::exists(candidate, ec)) return MediaEngine(candidate.string());
            }
            if (colon == std::string::npos) break;
            pos = colon + 1;
        }
    }
    fail(errc::config,
         "no media engine found: set media_engine in the config or TRAILFORGE_MEDIA_ENGINE");
}

std::string MediaEngine::run_expect_ok(const std::vector<std::string>& args,
                                       const std::function<void(const char*, size_t)>& sink) const {
    std::vector<std::string> argv = {binary_, "-hide_banner", "-y"};
    argv.insert(argv.end(), args.begin(), args.end());
    CommandOptions opts;
    opts.stdout_sink = sink;
    CommandResult res = run_command(argv, opts);
    if (res.exit_code != 0)
        fail(errc::media_engine,
             fmt::format("media engine failed ({}): {}", res.exit_code, err_tail(res.err)));
    return res.out;
}

MediaInfo MediaEngine::probe(const fs::path& media) const {
    if (!fs::exists(media)) fail(errc::io, fmt::format("no such file: {}", media.string()));
    // A bare `-i` probe exits nonzero ("At least one output file must be
    // specified") on stock ffmpeg and the bundled engine alike; the stream
    // summary on stderr is the contract.
    CommandResult res = run_command({binary_, "-hide_banner", "-i", media.string()});

    static const std::regex duration_re(R"(Duration: (\d+):(\d+):(\d+(?:\.\d+)?))");
    static const std::regex video_re(R"(Video: [^\n]*?(\d{2,})x(\d{2,}))");
    static const std::regex fps_re(R"((\d+(?:\.\d+)?) fps)");
    static const std::regex audio_re(R"(Audio: [^\n]*?(\d+) Hz)");

    std::smatch m;
    MediaInfo info;
    if (!std::regex_search(res.err, m, duration_re))
        fail(errc::media_engine,
             fmt::format("cannot probe {}: {}", media.string(), err_tail(res.err)));
    info.duration_s = std::stod(m[1]) * 3600.0 + std::stod(m[2]) * 60.0 + std::stod(m[3]);
    if (info.duration_s <= 0)
        fail(errc::media_engine, fmt::format("zero-duration stream: {}", media.string()));
    if (std::regex_search(res.err, m, video_re)) {
        info.width = std::stoi(m[1]);
        info.height = std::stoi(m[2]);
        std::smatch fm;
        if (std::regex_search(res.err, fm, fps_re)) info.fps = std::stod(fm[1]);
    }
    if (std::regex_search(res.err, m, audio_re)) {
        info.has_audio = true;
        info.sample_rate_hz = std::stoi(m[1]);
    }
    return info;
}

std::vector<FrameRecord> MediaEngine::extract_frames(const fs::path& movie,
                                                     const std::vector<double>& timestamps,
                                                     const fs::path& frames_dir,
                                                     int parallelism) const {
    if (timestamps.empty()) return {};
    MediaInfo info = probe(movie);
    for (double t : timestamps)
        if (t >= info.duration_s)
            fail(errc::invalid_argument,
                 fmt::format("frame timestamp {:.3f} beyond movie duration {:.3f}", t,
                             info.duration_s));
    ensure_dir(frames_dir);

    std::vector<FrameRecord> records(timestamps.size());
    run_parallel(parallelism, timestamps.size(), [&](size_t i) {
        const double t = timestamps[i];
        auto ms = static_cast<long long>(std::llround(t * 1000.0));
        fs::path out = frames_dir / fmt::format("frame_{:06}_{}.jpg", i, ms);
        run_expect_ok({"-ss", fmt_time(t), "-i", movie.string(), "-frames:v", "1", "-q:v", "2",
                       out.string()});
        records[i] =
            FrameRecord{static_cast<int>(i), t, out.string(), std::nullopt, std::nullopt};
    });
    return records;
}

void MediaEngine::cut_clip(const fs::path& movie, Interval interval, const fs::path& out) const {
    interval.validate();
    MediaInfo info = probe(movie);
    if (interval.end_s > info.duration_s + 0.05)
        fail(errc::invalid_argument,
             fmt::format("cut interval [{:.3f}, {:.3f}] outside movie duration {:.3f}",
                         interval.start_s, interval.end_s, info.duration_s));
    run_expect_ok({"-i", movie.string(), "-ss", fmt_time(interval.start_s), "-to",
                   fmt_time(interval.end_s), "-c:v", "mpeg4", "-q:v", "3", "-c:a", "aac",
                   "-b:a", "192k", out.string()});
}

void MediaEngine::blank_video_span(const fs::path& clip, const std::vector<Interval>& spans,
                                   const fs::path& out) const {
    MediaInfo info = probe(clip);
    std::vector<Interval> sorted = spans;
    std::sort(sorted.begin(), sorted.end(),
              [](const Interval& a, const Interval& b) { return a.start_s < b.start_s; });
    for (size_t i = 0; i < sorted.size(); ++i) {
        sorted[i].validate();
        if (sorted[i].end_s > info.duration_s + 0.05)
            fail(errc::invalid_argument, fmt::format("blank span [{:.3f}, {:.3f}] out of range",
                                                     sorted[i].start_s, sorted[i].end_s));
        if (i > 0 && sorted[i].start_s < sorted[i - 1].end_s)
            fail(errc::invalid_argument, "blank spans overlap");
    }

    std::vector<std::string> args = {"-i", clip.string()};
    if (!sorted.empty()) {
        std::string chain;
        for (const auto& span : sorted) {
            if (!chain.empty()) chain += ",";
            chain += fmt::format("drawbox=color=black:t=fill:enable='between(t,{:.6f},{:.6f})'",
                                 span.start_s, span.end_s);
        }
        args.insert(args.end(), {"-vf", chain});
    }
    args.insert(args.end(), {"-c:v", "mpeg4", "-q:v", "3"});
    if (info.has_audio) args.insert(args.end(), {"-c:a", "aac", "-b:a", "192k"});
    args.push_back(out.string());
    run_expect_ok(args);
}

void MediaEngine::normalize_clip(const fs::path& in, const fs::path& out, int width, int height,
                                 double fps) const {
    run_expect_ok({"-i", in.string(), "-vf",
                   fmt::format("scale={}:{},fps={:g}", width, height, fps), "-c:v", "mpeg4",
                   "-q:v", "3", "-c:a", "aac", "-b:a", "192k", out.string()});
}

void MediaEngine::concat_with_fades(const std::vector<ConcatItem>& clips, double video_fade_s,
                                    double audio_fade_s, const fs::path& out) const {
    if (clips.empty()) fail(errc::invalid_argument, "concat: empty clip list");

    int width = 0, height = 0;
    double fps = 0;
    std::vector<double> durations(clips.size());
    for (size_t i = 0; i < clips.size(); ++i) {
        MediaInfo info = probe(clips[i].path);
        durations[i] = info.duration_s;
        if (i == 0) {
            width = info.width;
            height = info.height;
            fps = info.fps;
        } else if (info.width != width || info.height != height ||
                   std::abs(info.fps - fps) > 0.01) {
            fail(errc::invalid_argument,
                 fmt::format("concat: {} is {}x{}@{:g}, expected {}x{}@{:g} (normalize first)",
                             clips[i].path.string(), info.width, info.height, info.fps, width,
                             height, fps));
        }
    }

    fs::path workdir = out.parent_path().empty() ? "." : out.parent_path();
    std::vector<fs::path> temps;
    std::vector<fs::path> entries(clips.size());
    for (size_t i = 0; i < clips.size(); ++i) {
        entries[i] = fs::absolute(clips[i].path);
        const bool fades = clips[i].fade_audio && (audio_fade_s > 0 || video_fade_s > 0);
        if (!fades) continue;
        fs::path faded = workdir / fmt::format(".concat_fade_{}.mp4", i);
        std::vector<std::string> args = {"-i", entries[i].string()};
        if (video_fade_s > 0) {
            args.insert(args.end(),
                        {"-vf",
                         fmt::format("fade=t=in:st=0:d={:.3f},fade=t=out:st={:.3f}:d={:.3f}",
                                     video_fade_s, durations[i] - video_fade_s, video_fade_s),
                         "-c:v", "mpeg4", "-q:v", "3"});
        } else {
            args.insert(args.end(), {"-c:v", "copy"});
        }
        if (audio_fade_s > 0) {
            args.insert(args.end(),
                        {"-af",
                         fmt::format("afade=t=in:st=0:d={:.3f},afade=t=out:st={:.3f}:d={:.3f}",
                                     audio_fade_s, durations[i] - audio_fade_s, audio_fade_s)});
        }
        args.insert(args.end(), {"-c:a", "aac", "-b:a", "192k", faded.string()});
        run_expect_ok(args);
        temps.push_back(faded);
        entries[i] = faded;
    }

    fs::path list = out;
    list += ".list.txt";
    {
        std::ofstream f(list);
        for (const auto& e : entries) f << fmt::format("file '{}'\n", fs::absolute(e).string());
    }
    run_expect_ok({"-f", "concat", "-safe", "0", "-i", list.string(), "-c:v", "mpeg4", "-q:v",
                   "3", "-c:a", "aac", "-b:a", "192k", out.string()});
    fs::remove(list);
    for (const auto& t : temps) fs::remove(t);
}

PcmBuffer MediaEngine::decode_audio(const fs::path& media, std::optional<Interval> span) const {
    std::vector<std::string> args = {"-i", media.string()};
    if (span) {
        span->validate();
        args.insert(args.end(), {"-ss", fmt_time(span->start_s), "-to", fmt_time(span->end_s)});
    }
    args.insert(args.end(),
                {"-vn", "-f", "s16le", "-ac", "1", "-ar", std::to_string(kMixSampleRate), "-"});
    std::string bytes = run_expect_ok(args);
    PcmBuffer pcm;
    pcm.sample_rate = kMixSampleRate;
    pcm.samples = decode_s16le_mono(
        std::span(reinterpret_cast<const uint8_t*>(bytes.data()), bytes.size()));
    return pcm;
}

void MediaEngine::extract_audio_wav(const fs::path& media, const fs::path& out_wav) const {
    run_expect_ok({"-i", media.string(), "-vn", out_wav.string()});
}

MediaEngine::RgbGeometry MediaEngine::decode_video_rgb(
    const fs::path& media, std::optional<Interval> span, int downscale_width,
    const std::function<void(int index, const uint8_t* rgb, const RgbGeometry& geo)>& on_frame)
    const {
    MediaInfo info = probe(media);
    if (info.width <= 0 || info.height <= 0)
        fail(errc::media_engine, fmt::format("{} has no video stream", media.string()));

    RgbGeometry geo;
    geo.fps = info.fps;
    if (downscale_width > 0 && downscale_width < info.width) {
        // Mirrors the engine's scale=W:-2 rounding.
        geo.width = std::max(2, downscale_width & ~1);
        geo.height =
            std::max(2, static_cast<int>(std::lround(static_cast<double>(info.height) *
                                                     geo.width / info.width)) &
                            ~1);
    } else {
        geo.width = info.width;
        geo.height = info.height;
    }

    std::vector<std::string> args = {"-i", media.string()};
    if (span) {
        span->validate();
        args.insert(args.end(), {"-ss", fmt_time(span->start_s), "-to", fmt_time(span->end_s)});
    }
    if (geo.width != info.width)
        args.insert(args.end(), {"-vf", fmt::format("scale={}:-2", geo.width)});
    args.insert(args.end(), {"-an", "-f", "rawvideo", "-pix_fmt", "rgb24", "-"});

    const size_t frame_bytes = static_cast<size_t>(geo.width) * geo.height * 3;
    std::string carry;
    int index = 0;
    run_expect_ok(args, [&](const char* data, size_t n) {
        carry.append(data, n);
        size_t off = 0;
        while (carry.size() - off >= frame_bytes) {
            on_frame(index++, reinterpret_cast<const uint8_t*>(carry.data() + off), geo);
            off += frame_bytes;
        }
        carry.erase(0, off);
    });
    return geo;
}

void MediaEngine::replace_audio(const fs::path& video, const fs::path& wav, const fs::path& out,
                                double video_fade_in_s, double video_fade_out_s) const {
    std::vector<std::string> args = {"-i",   video.string(), "-i",   wav.string(),
                                     "-map", "0:v",          "-map", "1:a"};
    if (video_fade_in_s > 0 || video_fade_out_s > 0) {
        MediaInfo info = probe(video);
        std::string chain;
        if (video_fade_in_s > 0) chain = fmt::format("fade=t=in:st=0:d={:.3f}", video_fade_in_s);
        if (video_fade_out_s > 0) {
            if (!chain.empty()) chain += ",";
            chain += fmt::format("fade=t=out:st={:.3f}:d={:.3f}",
                                 info.duration_s - video_fade_out_s, video_fade_out_s);
        }
        args.insert(args.end(), {"-vf", chain, "-c:v", "mpeg4", "-q:v", "3"});
    } else {
        args.insert(args.end(), {"-c:v", "copy"});
    }
    args.insert(args.end(), {"-c:a", "aac", "-b:a", "192k", out.string()});
    run_expect_ok(args);
}

double measure_rms(const MediaEngine& engine, const fs::path& media,
                   std::optional<Interval> span) {
    PcmBuffer pcm = engine.decode_audio(media, span);
    if (pcm.samples.empty())
        fail(errc::media_engine, fmt::format("no audio decoded from {}", media.string()));
    return rms_dbfs(pcm.samples);
}

void mix_and_mux(const MediaEngine& engine, const fs::path& video,
                 const std::vector<MixTrack>& tracks, const fs::path& out,
                 const MixOptions& opts) {
    MediaInfo vinfo = engine.probe(video);
    if (vinfo.width <= 0) fail(errc::invalid_argument, "mix_and_mux: no video stream");

    PcmBuffer bus = make_silence(vinfo.duration_s);
    for (const auto& track : tracks) {
        track.envelope.validate();
        PcmBuffer audio = engine.decode_audio(track.audio);
        if (track.offset_s < 0)
            fail(errc::invalid_argument, "mix_and_mux: negative track offset");
        if (track.offset_s + audio.duration_s() > vinfo.duration_s + 0.1)
            fail(errc::invalid_argument,
                 fmt::format("track {} (offset {:.2f}s, {:.2f}s long) overruns video end {:.2f}s",
                             track.audio.string(), track.offset_s, audio.duration_s(),
                             vinfo.duration_s));
        apply_envelope(audio, track.envelope, track.offset_s);
        mix_into(bus, audio, track.offset_s);
    }
    if (opts.fade_in_s > 0) fade_in(bus, opts.fade_in_s);
    if (opts.fade_out_s > 0) fade_out(bus, opts.fade_out_s);

    // Static safety limiter: scale the mix when the peak breaches the
    // headroom ceiling.
    float peak = 0;
    for (float v : bus.samples) peak = std::max(peak, std::abs(v));
    const auto ceiling = static_cast<float>(db_to_linear(opts.headroom_db));
    if (peak > ceiling) {
        float g = ceiling / peak;
        log::info("mix limiter engaged: peak {:.2f} dBFS, applying {:.2f} dB",
                  linear_to_db(peak), linear_to_db(g));
        for (float& v : bus.samples) v *= g;
    }

    fs::path mixed = out;
    mixed += ".mix.wav";
    write_wav(mixed, bus);
    engine.replace_audio(video, mixed, out, opts.fade_in_s, opts.fade_out_s);
    fs::remove(mixed);
}

} // namespace trailforge
