#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace trailforge {

inline constexpr int kMixSampleRate = 48000;
inline constexpr double kRmsFloorDb = -120.0;

// Mono float PCM in [-1, 1]. The whole mixing path runs on this form.
struct PcmBuffer {
    std::vector<float> samples;
    int sample_rate = kMixSampleRate;

    double duration_s() const {
        return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
    }
};

double db_to_linear(double db);
double linear_to_db(double lin);  // clamped at kRmsFloorDb

// RMS level in dBFS, floor-clamped at -120.
double rms_dbfs(std::span<const float> samples);

// 16-bit PCM WAV. Multichannel files are downmixed to mono on read.
PcmBuffer read_wav(const std::filesystem::path& path);
void write_wav(const std::filesystem::path& path, const PcmBuffer& pcm);

std::vector<float> decode_s16le_mono(std::span<const uint8_t> bytes);

struct GainPoint {
    double time_s;
    double gain_db;
};

// Piecewise-linear gain curve in the dB domain. Before the first breakpoint
// and after the last one the boundary value holds.
struct GainEnvelope {
    std::vector<GainPoint> points;

    static GainEnvelope flat(double gain_db = 0.0);
    void validate() const;  // times strictly increasing, gains finite
    double gain_db_at(double t) const;
    bool is_flat() const;
};

// In-place helpers on mono buffers.
void apply_gain_db(PcmBuffer& pcm, double gain_db);
void apply_envelope(PcmBuffer& pcm, const GainEnvelope& env, double start_offset_s = 0.0);
void fade_in(PcmBuffer& pcm, double seconds);
void fade_out(PcmBuffer& pcm, double seconds);

// Add `track` into `bus` starting at offset_s; bus must already be long enough.
void mix_into(PcmBuffer& bus, const PcmBuffer& track, double offset_s);

// Extend by looping with an equal-power crossfade at each joint until the
// buffer covers target_s.
PcmBuffer loop_with_crossfade(const PcmBuffer& src, double target_s, double crossfade_s);

// Deterministic generators (mock backends, test fixtures).
PcmBuffer make_sine(double duration_s, double freq_hz, double amplitude,
                    int sample_rate = kMixSampleRate);
PcmBuffer make_noise(double duration_s, double amplitude, uint64_t seed,
                     int sample_rate = kMixSampleRate);
PcmBuffer make_silence(double duration_s, int sample_rate = kMixSampleRate);

} // namespace trailforge
