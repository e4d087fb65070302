#include "trailforge/audio.hpp"

#include "trailforge/errors.hpp"
#include "trailforge/hashing.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

namespace trailforge {

namespace {

constexpr double kPi = std::numbers::pi;

int16_t float_to_s16(float v) {
    float clamped = std::clamp(v, -1.0f, 1.0f);
    return static_cast<int16_t>(std::lrintf(clamped * 32767.0f));
}

uint32_t read_u32(const uint8_t* p) {
    return static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
           (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
}
uint16_t read_u16(const uint8_t* p) {
    return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

void put_u32(std::string& s, uint32_t v) {
    s.push_back(static_cast<char>(v & 0xff));
    s.push_back(static_cast<char>((v >> 8) & 0xff));
    s.push_back(static_cast<char>((v >> 16) & 0xff));
    s.push_back(static_cast<char>((v >> 24) & 0xff));
}
void put_u16(std::string& s, uint16_t v) {
    s.push_back(static_cast<char>(v & 0xff));
    s.push_back(static_cast<char>((v >> 8) & 0xff));
}

} // namespace

double db_to_linear(double db) { return std::pow(10.0, db / 20.0); }

double linear_to_db(double lin) {
    if (lin <= 0.0) return kRmsFloorDb;
    return std::max(kRmsFloorDb, 20.0 * std::log10(lin));
}

double rms_dbfs(std::span<const float> samples) {
    if (samples.empty()) return kRmsFloorDb;
    double acc = 0.0;
    for (float v : samples) acc += static_cast<double>(v) * v;
    return linear_to_db(std::sqrt(acc / static_cast<double>(samples.size())));
}

PcmBuffer read_wav(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(errc::io, fmt::format("cannot open {}", path.string()));
    std::vector<uint8_t> data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (data.size() < 44 || std::memcmp(data.data(), "RIFF", 4) != 0 ||
        std::memcmp(data.data() + 8, "WAVE", 4) != 0)
        fail(errc::parse, fmt::format("{}: not a RIFF/WAVE file", path.string()));

    int channels = 0, sample_rate = 0, bits = 0;
    size_t pos = 12;
    const uint8_t* pcm_bytes = nullptr;
    size_t pcm_size = 0;
    while (pos + 8 <= data.size()) {
        uint32_t chunk_size = read_u32(data.data() + pos + 4);
        const uint8_t* body = data.data() + pos + 8;
        if (pos + 8 + chunk_size > data.size()) chunk_size = static_cast<uint32_t>(data.size() - pos - 8);
        if (std::memcmp(data.data() + pos, "fmt ", 4) == 0 && chunk_size >= 16) {
            uint16_t format = read_u16(body);
            channels = read_u16(body + 2);
            sample_rate = static_cast<int>(read_u32(body + 4));
            bits = read_u16(body + 14);
            if (format != 1 || bits != 16)
                fail(errc::parse, fmt::format("{}: only 16-bit PCM WAV supported", path.string()));
        } else if (std::memcmp(data.data() + pos, "data", 4) == 0) {
            pcm_bytes = body;
            pcm_size = chunk_size;
        }
        pos += 8 + chunk_size + (chunk_size & 1);
    }
    if (!pcm_bytes || channels <= 0 || sample_rate <= 0)
        fail(errc::parse, fmt::format("{}: missing fmt/data chunk", path.string()));

    size_t frames = pcm_size / (2 * static_cast<size_t>(channels));
    PcmBuffer out;
    out.sample_rate = sample_rate;
    out.samples.resize(frames);
    for (size_t i = 0; i < frames; ++i) {
        double acc = 0.0;
        for (int c = 0; c < channels; ++c) {
            const uint8_t* p = pcm_bytes + (i * channels + c) * 2;
            auto v = static_cast<int16_t>(p[0] | (p[1] << 8));
            acc += v / 32768.0;
        }
        out.samples[i] = static_cast<float>(acc / channels);
    }
    return out;
}

void write_wav(const std::filesystem::path& path, const PcmBuffer& pcm) {
    std::string body;
    body.reserve(44 + pcm.samples.size() * 2);
    const uint32_t data_bytes = static_cast<uint32_t>(pcm.samples.size() * 2);
    body += "RIFF";
    put_u32(body, 36 + data_bytes);
    body += "WAVEfmt ";
    put_u32(body, 16);
    put_u16(body, 1);  // PCM
    put_u16(body, 1);  // mono
    put_u32(body, static_cast<uint32_t>(pcm.sample_rate));
    put_u32(body, static_cast<uint32_t>(pcm.sample_rate * 2));
    put_u16(body, 2);
    put_u16(body, 16);
    body += "data";
    put_u32(body, data_bytes);
    for (float v : pcm.samples) {
        int16_t s = float_to_s16(v);
        body.push_back(static_cast<char>(s & 0xff));
        body.push_back(static_cast<char>((s >> 8) & 0xff));
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(errc::io, fmt::format("cannot write {}", path.string()));
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!out) fail(errc::io, fmt::format("write failed: {}", path.string()));
}

std::vector<float> decode_s16le_mono(std::span<const uint8_t> bytes) {
    std::vector<float> out(bytes.size() / 2);
    for (size_t i = 0; i < out.size(); ++i) {
        auto v = static_cast<int16_t>(bytes[2 * i] | (bytes[2 * i + 1] << 8));
        out[i] = static_cast<float>(v / 32768.0);
    }
    return out;
}

GainEnvelope GainEnvelope::flat(double gain_db) { return GainEnvelope{{{0.0, gain_db}}}; }

void GainEnvelope::validate() const {
    for (size_t i = 0; i < points.size(); ++i) {
        if (!std::isfinite(points[i].gain_db) || !std::isfinite(points[i].time_s))
            fail(errc::invalid_argument, "gain envelope contains non-finite values");
        if (i > 0 && points[i].time_s <= points[i - 1].time_s)
            fail(errc::invalid_argument,
                 fmt::format("gain envelope times must be strictly increasing (point {})", i));
    }
}

double GainEnvelope::gain_db_at(double t) const {
    if (points.empty()) return 0.0;
    if (t <= points.front().time_s) return points.front().gain_db;
    if (t >= points.back().time_s) return points.back().gain_db;
    auto it = std::upper_bound(points.begin(), points.end(), t,
                               [](double v, const GainPoint& p) { return v < p.time_s; });
    const GainPoint& hi = *it;
    const GainPoint& lo = *(it - 1);
    double u = (t - lo.time_s) / (hi.time_s - lo.time_s);
    return lo.gain_db + u * (hi.gain_db - lo.gain_db);
}

bool GainEnvelope::is_flat() const {
    for (const auto& p : points)
        if (p.gain_db != points.front().gain_db) return false;
    return true;
}

void apply_gain_db(PcmBuffer& pcm, double gain_db) {
    if (gain_db == 0.0) return;
    float g = static_cast<float>(db_to_linear(gain_db));
    for (float& v : pcm.samples) v *= g;
}

void apply_envelope(PcmBuffer& pcm, const GainEnvelope& env, double start_offset_s) {
    if (env.points.empty()) return;
    if (env.is_flat()) {
        apply_gain_db(pcm, env.points.front().gain_db);
        return;
    }
    for (size_t i = 0; i < pcm.samples.size(); ++i) {
        double t = start_offset_s + static_cast<double>(i) / pcm.sample_rate;
        pcm.samples[i] *= static_cast<float>(db_to_linear(env.gain_db_at(t)));
    }
}

void fade_in(PcmBuffer& pcm, double seconds) {
    auto n = std::min(pcm.samples.size(), static_cast<size_t>(seconds * pcm.sample_rate));
    for (size_t i = 0; i < n; ++i) pcm.samples[i] *= static_cast<float>(i) / static_cast<float>(n);
}

void fade_out(PcmBuffer& pcm, double seconds) {
    auto n = std::min(pcm.samples.size(), static_cast<size_t>(seconds * pcm.sample_rate));
    size_t start = pcm.samples.size() - n;
    for (size_t i = 0; i < n; ++i)
        pcm.samples[start + i] *= static_cast<float>(n - i) / static_cast<float>(n);
}

void mix_into(PcmBuffer& bus, const PcmBuffer& track, double offset_s) {
    if (track.sample_rate != bus.sample_rate)
        fail(errc::invalid_argument, "mix_into: sample rate mismatch");
    auto start = static_cast<size_t>(std::llround(offset_s * bus.sample_rate));
    for (size_t i = 0; i < track.samples.size() && start + i < bus.samples.size(); ++i)
        bus.samples[start + i] += track.samples[i];
}

PcmBuffer loop_with_crossfade(const PcmBuffer& src, double target_s, double crossfade_s) {
    if (src.samples.empty()) fail(errc::invalid_argument, "loop_with_crossfade: empty source");
    const auto target = static_cast<size_t>(std::llround(target_s * src.sample_rate));
    PcmBuffer out;
    out.sample_rate = src.sample_rate;
    out.samples = src.samples;
    auto xfade = std::min(static_cast<size_t>(crossfade_s * src.sample_rate),
                          src.samples.size() / 2);
    while (out.samples.size() < target) {
        size_t joint = out.samples.size() - xfade;
        out.samples.resize(joint + src.samples.size());
        for (size_t i = 0; i < xfade; ++i) {
            // Equal-power: sums to unity energy across the joint.
            double u = static_cast<double>(i) / static_cast<double>(xfade);
            float a = static_cast<float>(std::cos(u * kPi / 2.0));
            float b = static_cast<float>(std::sin(u * kPi / 2.0));
            out.samples[joint + i] = out.samples[joint + i] * a + src.samples[i] * b;
        }
        for (size_t i = xfade; i < src.samples.size(); ++i)
            out.samples[joint + i] = src.samples[i];
    }
    out.samples.resize(target);
    return out;
}

PcmBuffer make_sine(double duration_s, double freq_hz, double amplitude, int sample_rate) {
    PcmBuffer out;
    out.sample_rate = sample_rate;
    out.samples.resize(static_cast<size_t>(std::llround(duration_s * sample_rate)));
    for (size_t i = 0; i < out.samples.size(); ++i)
        out.samples[i] = static_cast<float>(
            amplitude * std::sin(2.0 * kPi * freq_hz * static_cast<double>(i) / sample_rate));
    return out;
}

PcmBuffer make_noise(double duration_s, double amplitude, uint64_t seed, int sample_rate) {
    PcmBuffer out;
    out.sample_rate = sample_rate;
    out.samples.resize(static_cast<size_t>(std::llround(duration_s * sample_rate)));
    SplitMix64 rng(seed);
    for (float& v : out.samples)
        v = static_cast<float>(amplitude * (rng.next_unit() * 2.0 - 1.0));
    return out;
}

PcmBuffer make_silence(double duration_s, int sample_rate) {
    PcmBuffer out;
    out.sample_rate = sample_rate;
    out.samples.assign(static_cast<size_t>(std::llround(duration_s * sample_rate)), 0.0f);
    return out;
}

} // namespace trailforge
