#pragma once

#include "trailforge/audio.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace trailforge {

struct MediaInfo {
    double duration_s = 0;
    double fps = 0;  // 0 when there is no video stream
    int width = 0;
    int height = 0;
    bool has_audio = false;
    std::optional<int> sample_rate_hz;
};

struct Interval {
    double start_s = 0;
    double end_s = 0;

    double length() const { return end_s - start_s; }
    bool contains(double t) const { return t >= start_s && t < end_s; }
    void validate() const;  // 0 <= start < end
};

struct FrameRecord {
    int index = 0;
    double timestamp_s = 0;
    std::string image_path;
    std::optional<std::vector<float>> embedding;
    std::optional<bool> has_text;
};

// Sampling plan: trim head/tail, one stamp per 9 s of the effective span,
// midpoint-offset so no stamp lands on a trim boundary.
std::vector<double> plan_frame_timestamps(double duration_s, double head_trim_frac,
                                          double tail_trim_frac);

// Wraps the external FFmpeg-compatible transcoder subprocess. Every method
// spawns a fresh engine process; instances are freely shareable across
// threads.
class MediaEngine {
public:
    explicit MediaEngine(std::string binary_path);

    // config value > $TRAILFORGE_MEDIA_ENGINE > `ffmpeg` on PATH.
    static MediaEngine resolve(const std::string& configured = "");

    const std::string& binary() const { return binary_; }

    MediaInfo probe(const std::filesystem::path& media) const;

    // One JPEG per timestamp: frames_dir/frame_{index:06}_{ms}.jpg.
    std::vector<FrameRecord> extract_frames(const std::filesystem::path& movie,
                                            const std::vector<double>& timestamps,
                                            const std::filesystem::path& frames_dir,
                                            int parallelism = 1) const;

    // Frame-accurate re-encoded cut, audio preserved when present.
    void cut_clip(const std::filesystem::path& movie, Interval interval,
                  const std::filesystem::path& out) const;

    // Video inside each span turns solid black; audio re-encoded untouched.
    void blank_video_span(const std::filesystem::path& clip, const std::vector<Interval>& spans,
                          const std::filesystem::path& out) const;

    void normalize_clip(const std::filesystem::path& in, const std::filesystem::path& out,
                        int width, int height, double fps) const;

    struct ConcatItem {
        std::filesystem::path path;
        bool fade_audio = false;
    };
    void concat_with_fades(const std::vector<ConcatItem>& clips, double video_fade_s,
                           double audio_fade_s, const std::filesystem::path& out) const;

    // Decode to the canonical measurement form: mono float, 48 kHz.
    PcmBuffer decode_audio(const std::filesystem::path& media,
                           std::optional<Interval> span = std::nullopt) const;

    void extract_audio_wav(const std::filesystem::path& media,
                           const std::filesystem::path& out_wav) const;

    // Streams decoded RGB24 frames through `on_frame`. Returns the decoded
    // geometry. downscale_width 0 keeps the source size.
    struct RgbGeometry {
        int width = 0, height = 0;
        double fps = 0;
    };
    RgbGeometry decode_video_rgb(
        const std::filesystem::path& media, std::optional<Interval> span, int downscale_width,
        const std::function<void(int index, const uint8_t* rgb, const RgbGeometry& geo)>&
            on_frame) const;

    // Mux `wav` as the audio of `video`; optional global video fades force a
    // re-encode, otherwise the video stream is copied.
    void replace_audio(const std::filesystem::path& video, const std::filesystem::path& wav,
                       const std::filesystem::path& out, double video_fade_in_s = 0,
                       double video_fade_out_s = 0) const;

private:
    std::vector<std::string> base_argv() const;
    std::string run_expect_ok(const std::vector<std::string>& args,
                              const std::function<void(const char*, size_t)>& sink = {}) const;

    std::string binary_;
};

double measure_rms(const MediaEngine& engine, const std::filesystem::path& media,
                   std::optional<Interval> span = std::nullopt);

struct MixTrack {
    std::filesystem::path audio;
    double offset_s = 0;
    GainEnvelope envelope = GainEnvelope::flat(0.0);
};

struct MixOptions {
    double headroom_db = -1.0;  // static safety limiter threshold
    double fade_in_s = 0;
    double fade_out_s = 0;
};

// Gain-shape each track, sum onto a silence bus of the video's length,
// limit, and mux back onto the video.
void mix_and_mux(const MediaEngine& engine, const std::filesystem::path& video,
                 const std::vector<MixTrack>& tracks, const std::filesystem::path& out,
                 const MixOptions& opts = {});

} // namespace trailforge
