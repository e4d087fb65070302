// trailforge-media: a compact FFmpeg-compatible command-line transcoder built
// on the FFmpeg libraries. It implements the option dialect the pipeline
// emits (probe, trim, scale/fps/drawbox/fade, afade/volume, concat lists,
// rawvideo/s16le pipes, stream-copy mux), so a stock ffmpeg binary can be
// dropped in via TRAILFORGE_MEDIA_ENGINE at any time.

#include "filters.hpp"
#include "options.hpp"
#include "sink.hpp"
#include "sources.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace tfme {

namespace {

std::string format_duration(double seconds) {
    if (seconds < 0) seconds = 0;
    int total_cs = static_cast<int>(std::lround(seconds * 100));
    int h = total_cs / 360000;
    int m = (total_cs / 6000) % 60;
    int s = (total_cs / 100) % 60;
    int cs = total_cs % 100;
    char buf[32];
    snprintf(buf, sizeof buf, "%02d:%02d:%02d.%02d", h, m, s, cs);
    return buf;
}

void print_probe(const EngineArgs& args) {
    for (size_t i = 0; i < args.inputs.size(); ++i) {
        auto input = open_input(args.inputs[i]);
        const SourceInfo& info = input->info();
        fprintf(stderr, "Input #%zu, %s, from '%s':\n", i, info.container.c_str(),
                args.inputs[i].url.c_str());
        fprintf(stderr, "  Duration: %s, start: 0.000000, bitrate: N/A\n",
                format_duration(info.duration_s).c_str());
        int sidx = 0;
        if (info.has_video) {
            fprintf(stderr, "    Stream #%zu:%d: Video: %s, yuv420p, %dx%d, %g fps\n", i,
                    sidx++, info.vcodec.c_str(), info.width, info.height, info.fps);
        }
        if (info.has_audio) {
            fprintf(stderr, "    Stream #%zu:%d: Audio: %s, %d Hz, %d channels, fltp\n", i,
                    sidx++, info.acodec.c_str(), info.sample_rate, info.channels);
        }
    }
}

struct StreamMap {
    int video_input = -1;
    int audio_input = -1;
};

StreamMap resolve_maps(const EngineArgs& args) {
    StreamMap map;
    for (const auto& m : args.outputs[0].maps) {
        int idx = -1;
        char kind = 0;
        if (sscanf(m.c_str(), "%d:%c", &idx, &kind) != 2 || idx < 0 ||
            idx >= static_cast<int>(args.inputs.size()))
            throw EngineError("bad -map " + m);
        if (kind == 'v') map.video_input = idx;
        else if (kind == 'a') map.audio_input = idx;
        else throw EngineError("bad -map " + m);
    }
    return map;
}

// Stateful linear resampler (only engaged when rates differ).
class Resampler {
public:
    Resampler(int in_rate, int out_rate, int channels)
        : in_rate_(in_rate), out_rate_(out_rate), channels_(channels) {}

    bool active() const { return in_rate_ != out_rate_; }

    std::vector<float> process(const std::vector<float>& in) {
        if (!active()) return in;
        std::vector<float> all;
        all.reserve(prev_.size() + in.size());
        all.insert(all.end(), prev_.begin(), prev_.end());
        all.insert(all.end(), in.begin(), in.end());
        size_t in_frames = all.size() / channels_;
        if (in_frames < 2) {
            prev_ = all;
            return {};
        }
        std::vector<float> out;
        const double step = static_cast<double>(in_rate_) / out_rate_;
        while (pos_ + 1.0 < static_cast<double>(in_frames)) {
            auto i0 = static_cast<size_t>(pos_);
            double frac = pos_ - static_cast<double>(i0);
            for (int c = 0; c < channels_; ++c) {
                float a = all[i0 * channels_ + c];
                float b = all[(i0 + 1) * channels_ + c];
                out.push_back(static_cast<float>(a + (b - a) * frac));
            }
            pos_ += step;
        }
        // Keep the last frame for continuity with the next chunk.
        size_t keep_from = in_frames - 1;
        prev_.assign(all.begin() + static_cast<long>(keep_from * channels_), all.end());
        pos_ -= static_cast<double>(keep_from);
        return out;
    }

private:
    int in_rate_, out_rate_, channels_;
    std::vector<float> prev_;
    double pos_ = 0;
};

std::vector<float> convert_channels(const std::vector<float>& in, int in_ch, int out_ch) {
    if (in_ch == out_ch) return in;
    size_t frames = in.size() / static_cast<size_t>(in_ch);
    std::vector<float> out(frames * static_cast<size_t>(out_ch));
    if (out_ch == 1) {
        for (size_t i = 0; i < frames; ++i) {
            double acc = 0;
            for (int c = 0; c < in_ch; ++c) acc += in[i * in_ch + c];
            out[i] = static_cast<float>(acc / in_ch);
        }
    } else if (in_ch == 1) {
        for (size_t i = 0; i < frames; ++i)
            for (int c = 0; c < out_ch; ++c) out[i * out_ch + c] = in[i];
    } else {
        for (size_t i = 0; i < frames; ++i)
            for (int c = 0; c < out_ch; ++c) out[i * out_ch + c] = in[i * in_ch + std::min(c, in_ch - 1)];
    }
    return out;
}

struct OutputCaps {
    bool video = false;
    bool audio = false;
    std::string default_vcodec = "mpeg4";
    std::string default_acodec = "aac";
    std::string resolved_format;
};

OutputCaps caps_for(const std::string& url, const std::string& format) {
    auto ext = [&]() -> std::string {
        auto dot = url.rfind('.');
        return dot == std::string::npos ? "" : url.substr(dot + 1);
    }();
    std::string f = format;
    if (f.empty()) {
        if (ext == "mp4" || ext == "mov" || ext == "m4v") f = "mp4";
        else if (ext == "wav") f = "wav";
        else if (ext == "jpg" || ext == "jpeg" || ext == "png") f = "image2";
        else if (url == "-") throw EngineError("stdout output requires -f");
        else throw EngineError("cannot guess output format for " + url);
    }
    OutputCaps caps;
    caps.resolved_format = f;
    if (f == "mp4" || f == "mov") {
        caps.video = caps.audio = true;
    } else if (f == "wav") {
        caps.audio = true;
        caps.default_acodec = "pcm_s16le";
    } else if (f == "image2") {
        caps.video = true;
        caps.default_vcodec = "mjpeg";
    } else if (f == "rawvideo") {
        caps.video = true;
    } else if (f == "s16le") {
        caps.audio = true;
    } else {
        throw EngineError("unsupported output format " + f);
    }
    return caps;
}

int transcode(const EngineArgs& args) {
    const OutputSpec& out = args.outputs[0];
    OutputCaps caps = caps_for(out.url, out.format);

    std::vector<std::unique_ptr<MediaInput>> inputs;
    inputs.reserve(args.inputs.size());
    for (const auto& spec : args.inputs) inputs.push_back(open_input(spec));

    StreamMap map = resolve_maps(args);
    if (map.video_input < 0) {
        for (size_t i = 0; i < inputs.size(); ++i)
            if (inputs[i]->info().has_video) { map.video_input = static_cast<int>(i); break; }
    }
    if (map.audio_input < 0) {
        for (size_t i = 0; i < inputs.size(); ++i)
            if (inputs[i]->info().has_audio) { map.audio_input = static_cast<int>(i); break; }
    }

    bool want_video = caps.video && !out.no_video && map.video_input >= 0;
    bool want_audio = caps.audio && !out.no_audio && map.audio_input >= 0;
    if (!want_video && !want_audio) throw EngineError("nothing to output");

    MediaInput* vsrc = want_video ? inputs[map.video_input].get() : nullptr;
    MediaInput* asrc = want_audio ? inputs[map.audio_input].get() : nullptr;
    for (size_t i = 0; i < inputs.size(); ++i) {
        inputs[i]->set_need_video(vsrc == inputs[i].get());
        inputs[i]->set_need_audio(asrc == inputs[i].get());
    }

    const double trim_start = out.start_s > 0 ? out.start_s : 0.0;
    double trim_end = out.end_s > 0 ? out.end_s : -1;
    if (out.duration_s > 0) trim_end = trim_start + out.duration_s;

    const bool copy_video = out.vcodec == "copy";
    ContainerInput* copy_src = nullptr;
    if (copy_video) {
        copy_src = dynamic_cast<ContainerInput*>(vsrc);
        if (!copy_src) throw EngineError("-c:v copy requires a container video input");
        if (trim_start > 0 || trim_end > 0 || !out.vf.empty())
            throw EngineError("-c:v copy cannot be combined with trims or video filters");
    }

    // Video geometry and rate are known up front, so the muxer header can be
    // written before the loop.
    VideoEncSettings vset;
    AudioEncSettings aset;
    std::optional<VideoFilterChain> vfilter;
    double out_fps = 25;
    if (want_video) {
        const SourceInfo& vi = vsrc->info();
        vfilter.emplace(out.vf, vi.width, vi.height);
        out_fps = out.fps > 0 ? out.fps
                 : vfilter->fps_override() > 0 ? vfilter->fps_override()
                 : vi.fps > 0 ? vi.fps
                               : 25.0;
        vset.codec = out.vcodec.empty() ? caps.default_vcodec : out.vcodec;
        vset.width = vfilter->out_width();
        vset.height = vfilter->out_height();
        vset.fps = out_fps;
        vset.qscale = out.qscale_v > 0 ? out.qscale_v : (vset.codec == "mjpeg" ? 2.0 : 3.0);
    }
    AudioFilterChain afilter(out.af);
    int target_rate = 48000, target_ch = 1;
    if (want_audio) {
        const SourceInfo& ai = asrc->info();
        target_rate = out.sample_rate > 0 ? out.sample_rate : (ai.sample_rate > 0 ? ai.sample_rate : 48000);
        target_ch = out.channels > 0 ? out.channels : (ai.channels > 0 ? ai.channels : 1);
        aset.codec = out.acodec.empty() ? caps.default_acodec : out.acodec;
        aset.sample_rate = target_rate;
        aset.channels = target_ch;
        if (out.bitrate_a > 0) aset.bitrate = out.bitrate_a;
    }

    long frames_cap = out.frames_v;
    if (frames_cap < 0 && caps.resolved_format == "image2")
        frames_cap = 1;  // single-image outputs take the first frame

    OutputSink sink(out.url, caps.resolved_format, want_video, want_audio, vset, aset,
                    copy_src ? copy_src->video_stream() : nullptr);

    // CFR duplicate/drop state.
    std::optional<VideoFrameRGB> prev;
    double prev_rt = 0;
    bool video_active = want_video;
    bool audio_active = want_audio;
    Resampler resampler(asrc ? (asrc->info().sample_rate > 0 ? asrc->info().sample_rate : target_rate)
                             : target_rate,
                        target_rate, target_ch);

    auto slot_time = [&] { return static_cast<double>(sink.video_frames_written()) / out_fps; };

    auto emit_prev_until = [&](double rt_limit) {
        while (prev && slot_time() < rt_limit - 1e-6) {
            sink.write_video(*prev);
            if (frames_cap > 0 && sink.video_frames_written() >= frames_cap) {
                video_active = false;
                return;
            }
        }
    };

    auto step_video = [&] {
        if (copy_video) {
            auto pkt = copy_src->next_video_packet();
            if (!pkt) { video_active = false; return; }
            sink.write_video_packet(pkt->get(), copy_src->video_stream());
            return;
        }
        auto frame = vsrc->next_video();
        if (!frame) {
            // Flush: pad slots up to the nominal end of the last frame.
            if (prev) {
                while (slot_time() <= prev_rt + 1e-6) {
                    sink.write_video(*prev);
                    if (frames_cap > 0 && sink.video_frames_written() >= frames_cap) break;
                }
            }
            video_active = false;
            return;
        }
        if (frame->t < trim_start - 1e-9) return;
        if (trim_end > 0 && frame->t >= trim_end - 1e-9) {
            if (prev) {
                while (slot_time() <= prev_rt + 1e-6) {
                    sink.write_video(*prev);
                    if (frames_cap > 0 && sink.video_frames_written() >= frames_cap) break;
                }
            }
            video_active = false;
            return;
        }
        vfilter->apply(*frame);
        double rt = frame->t - trim_start;
        if (frames_cap > 0) {
            // Direct emit path (frame grabs): no duplicate/drop.
            sink.write_video(*frame);
            if (sink.video_frames_written() >= frames_cap) video_active = false;
            return;
        }
        emit_prev_until(rt);
        prev = std::move(*frame);
        prev_rt = rt;
    };

    auto step_audio = [&] {
        auto chunk = asrc->next_audio();
        if (!chunk) { audio_active = false; return; }
        // Trim in the source timeline, sample-accurately.
        size_t frames = static_cast<size_t>(chunk->frames());
        if (frames == 0) return;
        double chunk_end = chunk->t + static_cast<double>(frames) / chunk->sample_rate;
        if (chunk_end <= trim_start) return;
        if (trim_end > 0 && chunk->t >= trim_end) { audio_active = false; return; }
        size_t first = 0, last = frames;
        if (chunk->t < trim_start)
            first = static_cast<size_t>(std::llround((trim_start - chunk->t) * chunk->sample_rate));
        if (trim_end > 0 && chunk_end > trim_end)
            last = static_cast<size_t>(std::llround((trim_end - chunk->t) * chunk->sample_rate));
        if (first >= last) return;

        std::vector<float> sliced(chunk->interleaved.begin() + static_cast<long>(first * chunk->channels),
                                  chunk->interleaved.begin() + static_cast<long>(last * chunk->channels));
        auto mixed = convert_channels(sliced, chunk->channels, target_ch);
        auto resampled = resampler.process(mixed);
        if (resampled.empty()) return;
        double rt = chunk->t + static_cast<double>(first) / chunk->sample_rate - trim_start;
        afilter.apply(resampled, target_ch, target_rate, rt);
        sink.write_audio(resampled.data(), resampled.size());
    };

    while (video_active || audio_active) {
        double vtime = static_cast<double>(sink.video_frames_written()) / out_fps;
        double atime = static_cast<double>(sink.audio_samples_written()) / std::max(1, target_rate);
        if (video_active && (!audio_active || vtime <= atime)) step_video();
        else step_audio();
    }

    sink.finalize();
    if (want_video && sink.video_frames_written() == 0)
        throw EngineError("no video frames produced (trim outside input?)");
    if (!want_video && want_audio && sink.audio_samples_written() == 0)
        throw EngineError("no audio samples produced (trim outside input?)");
    return 0;
}

} // namespace

} // namespace tfme

int main(int argc, char** argv) {
    av_log_set_level(AV_LOG_ERROR);
    try {
        tfme::EngineArgs args = tfme::parse_args(argc, argv);
        if (args.inputs.empty()) {
            fprintf(stderr, "trailforge-media: no input given\n");
            return 1;
        }
        if (args.outputs.empty()) {
            tfme::print_probe(args);
            fprintf(stderr, "At least one output file must be specified\n");
            return 1;
        }
        if (args.outputs.size() > 1) {
            fprintf(stderr, "trailforge-media: multiple outputs not supported\n");
            return 1;
        }
        return tfme::transcode(args);
    } catch (const std::exception& e) {
        fprintf(stderr, "trailforge-media: error: %s\n", e.what());
        return 1;
    }
}
