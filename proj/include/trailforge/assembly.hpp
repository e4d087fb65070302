#pragma once

#include "trailforge/audio.hpp"
#include "trailforge/jsonio.hpp"
#include "trailforge/mediaio.hpp"
#include "trailforge/project.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace trailforge {

struct SequenceItem {
    enum class Kind { SC, QC };
    Kind kind;
    int index;  // into the respective clip list
};
using SequencePattern = std::vector<SequenceItem>;

// Interval strategy: QC j (1-based) lands after SC number
// floor(j * n_sc/(n_qc+1) + 0.5), clamped to [1, n_sc], collisions pushed
// right. QCs that overflow stack after the final SC.
SequencePattern plan_sequence(int n_sc, int n_qc);

struct TimestampEntry {
    std::string kind;  // "qc" | "voice"
    int index = 0;
    Interval interval;
};

struct TimestampLog {
    double trailer_duration_s = 0;
    std::vector<TimestampEntry> entries;  // sorted by start_s

    std::vector<Interval> intervals_of(const std::string& kind) const;
    std::vector<Interval> speech_intervals() const;  // qc + voice, sorted
    void sort_entries();
    json to_json() const;
    static TimestampLog from_json(const json& j);
};

struct AssembleResult {
    std::filesystem::path video;
    TimestampLog log;
};

// Concatenate per the pattern; QC slots get the audio fades. Clips must
// already share resolution and fps.
AssembleResult assemble_visual(const MediaEngine& engine, const SequencePattern& pattern,
                               const std::vector<std::filesystem::path>& standard_clips,
                               const std::vector<std::filesystem::path>& quote_clips,
                               double video_fade_s, double audio_fade_s,
                               const std::filesystem::path& out);

// clamp(round(duration/12), 2, 6)
int plan_voice_count(double trailer_duration_s);

struct VoiceTable {
    std::map<std::string, std::string> genre_to_voice;  // lowercase genre -> voice id
    std::string default_voice = "V3";

    static VoiceTable bundled();  // share/trailforge/voice_table.json
};

// Plurality vote across mapped genres; ties resolve to the voice of the
// earliest-listed genre among the tied voices; empty/unknown-only -> default.
std::string choose_voice(const std::vector<std::string>& genres, const VoiceTable& table);

struct PlacedLine {
    int line_index = 0;  // into the input duration list
    Interval interval;
};

// Greedy earliest-fit into the gaps between QC intervals, keeping
// clearance_s from QCs and other placements. Unplaceable lines are dropped
// with warnings.
std::vector<PlacedLine> place_voice_lines(const TimestampLog& log,
                                          const std::vector<double>& line_durations_s,
                                          double clearance_s = 0.5,
                                          const std::function<void(const std::string&)>& warn = {});

// target = mean(voice_rms) in the dB domain; gain = target - qc_rms,
// clamped to +/-12 dB.
double normalize_qc_gain(const std::vector<double>& voice_rms_dbfs, double qc_rms_dbfs);

struct DuckParams {
    double duck_db = -12.0;
    double ramp_s = 0.15;
};

// Unity outside; linear ramps of ramp_s into duck_db holds over merged
// speech intervals. Intervals closer than ramp_s merge; narrower gaps get a
// single interpolated crossing breakpoint.
GainEnvelope build_duck_envelope(const std::vector<Interval>& speech_intervals, double duck_db,
                                 double ramp_s, double trailer_duration_s);

// Per-segment gain program for the trailer's base audio (SC level outside,
// per-QC normalized level inside), with short ramps at the boundaries.
GainEnvelope build_segment_envelope(double duration_s, double base_db,
                                    const std::vector<std::pair<Interval, double>>& segments,
                                    double ramp_s = 0.01);

struct RenderInputs {
    std::filesystem::path visual;
    TimestampLog log;  // qc + voice entries, final
    std::vector<std::pair<std::filesystem::path, Interval>> voice_tracks;
    std::filesystem::path music;  // empty = missing
    std::vector<double> qc_gains_db;  // one per QC clip, normalized
};

// Final mix: base audio with the segment envelope, voice lines normalized
// to gain_voice_dbfs, music under the duck envelope, global 1 s / 2 s
// fades, -1 dB headroom limiter.
std::filesystem::path render_final(const MediaEngine& engine, const RenderInputs& inputs,
                                   const ProjectConfig& config,
                                   const std::filesystem::path& out, bool allow_missing_music);

} // namespace trailforge
