#include "trailforge/assembly.hpp"

#include "trailforge/errors.hpp"
#include "trailforge/log.hpp"
#include "trailforge/paths.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cmath>
#include <set>

namespace trailforge {

namespace fs = std::filesystem;

SequencePattern plan_sequence(int n_sc, int n_qc) {
    if (n_sc < 0 || n_qc < 0) fail(errc::invalid_argument, "clip counts must be >= 0");
    if (n_qc >= 1 && n_sc == 0)
        fail(errc::invalid_argument, "cannot interleave quote clips without standard clips");

    // Insertion position per QC: after the p-th SC (1-based), strictly
    // increasing, overflow stacking after the last SC.
    std::vector<int> positions(static_cast<size_t>(n_qc));
    const double k = n_qc > 0 ? static_cast<double>(n_sc) / (n_qc + 1) : 0.0;
    int prev = 0;
    for (int j = 1; j <= n_qc; ++j) {
        int p = static_cast<int>(std::floor(j * k + 0.5));
        p = std::clamp(p, 1, n_sc);
        if (p <= prev) p = prev + 1;  // collision pushes right
        positions[static_cast<size_t>(j - 1)] = p;
        prev = p;
    }

    SequencePattern pattern;
    pattern.reserve(static_cast<size_t>(n_sc + n_qc));
    size_t qi = 0;
    for (int s = 1; s <= n_sc; ++s) {
        pattern.push_back({SequenceItem::Kind::SC, s - 1});
        while (qi < positions.size() && positions[qi] == s) {
            pattern.push_back({SequenceItem::Kind::QC, static_cast<int>(qi)});
            ++qi;
        }
    }
    // Positions pushed beyond n_sc stack at the end.
    while (qi < positions.size()) {
        pattern.push_back({SequenceItem::Kind::QC, static_cast<int>(qi)});
        ++qi;
    }
    return pattern;
}

std::vector<Interval> TimestampLog::intervals_of(const std::string& kind) const {
    std::vector<Interval> out;
    for (const auto& e : entries)
        if (e.kind == kind) out.push_back(e.interval);
    return out;
}

std::vector<Interval> TimestampLog::speech_intervals() const {
    std::vector<Interval> out;
    for (const auto& e : entries) out.push_back(e.interval);
    std::sort(out.begin(), out.end(),
              [](const Interval& a, const Interval& b) { return a.start_s < b.start_s; });
    return out;
}

void TimestampLog::sort_entries() {
    std::stable_sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
        return a.interval.start_s < b.interval.start_s;
    });
}

json TimestampLog::to_json() const {
    json j;
    j["trailer_duration_s"] = trailer_duration_s;
    json arr = json::array();
    for (const auto& e : entries) {
        arr.push_back({{"kind", e.kind},
                       {"index", e.index},
                       {"start_s", e.interval.start_s},
                       {"end_s", e.interval.end_s}});
    }
    j["entries"] = arr;
    return j;
}

TimestampLog TimestampLog::from_json(const json& j) {
    TimestampLog log;
    log.trailer_duration_s = j.at("trailer_duration_s").get<double>();
    for (const auto& item : j.at("entries")) {
        TimestampEntry e;
        e.kind = item.at("kind").get<std::string>();
        e.index = item.at("index").get<int>();
        e.interval = Interval{item.at("start_s").get<double>(), item.at("end_s").get<double>()};
        log.entries.push_back(std::move(e));
    }
    return log;
}

AssembleResult assemble_visual(const MediaEngine& engine, const SequencePattern& pattern,
                               const std::vector<fs::path>& standard_clips,
                               const std::vector<fs::path>& quote_clips, double video_fade_s,
                               double audio_fade_s, const fs::path& out) {
    if (pattern.empty()) fail(errc::invalid_argument, "empty sequence pattern");

    std::vector<MediaEngine::ConcatItem> items;
    std::vector<double> durations;
    TimestampLog log;
    for (const SequenceItem& item : pattern) {
        const bool is_qc = item.kind == SequenceItem::Kind::QC;
        const auto& list = is_qc ? quote_clips : standard_clips;
        if (item.index < 0 || item.index >= static_cast<int>(list.size()))
            fail(errc::invalid_argument,
                 fmt::format("pattern references missing {} clip {}", is_qc ? "QC" : "SC",
                             item.index));
        items.push_back({list[static_cast<size_t>(item.index)], is_qc});
    }

    double cursor = 0;
    for (size_t i = 0; i < items.size(); ++i) {
        MediaInfo info = engine.probe(items[i].path);
        durations.push_back(info.duration_s);
        if (pattern[i].kind == SequenceItem::Kind::QC) {
            log.entries.push_back(
                {"qc", pattern[i].index, Interval{cursor, cursor + info.duration_s}});
        }
        cursor += info.duration_s;
    }
    log.trailer_duration_s = cursor;
    log.sort_entries();

    engine.concat_with_fades(items, video_fade_s, audio_fade_s, out);
    return AssembleResult{out, std::move(log)};
}

int plan_voice_count(double trailer_duration_s) {
    if (!(trailer_duration_s > 0)) fail(errc::invalid_argument, "duration must be positive");
    auto n = static_cast<int>(std::lround(trailer_duration_s / 12.0));
    return std::clamp(n, 2, 6);
}

VoiceTable VoiceTable::bundled() {
    json j = load_json(share_dir() / "voice_table.json");
    VoiceTable table;
    for (const auto& [genre, voice] : j.at("genres").items())
        table.genre_to_voice[genre] = voice.get<std::string>();
    if (j.contains("default")) table.default_voice = j.at("default").get<std::string>();
    return table;
}

std::string choose_voice(const std::vector<std::string>& genres, const VoiceTable& table) {
    auto lower = [](std::string s) {
        for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return s;
    };

    std::map<std::string, int> votes;       // voice -> count
    std::map<std::string, size_t> earliest; // voice -> first genre position
    for (size_t i = 0; i < genres.size(); ++i) {
        auto it = table.genre_to_voice.find(lower(genres[i]));
        if (it == table.genre_to_voice.end()) continue;  // unknown genres ignored
        votes[it->second]++;
        if (!earliest.count(it->second)) earliest[it->second] = i;
    }
    if (votes.empty()) return table.default_voice;

    int best = 0;
    for (const auto& [voice, count] : votes) best = std::max(best, count);
    std::string chosen;
    size_t chosen_pos = SIZE_MAX;
    for (const auto& [voice, count] : votes) {
        if (count != best) continue;
        if (earliest[voice] < chosen_pos) {
            chosen = voice;
            chosen_pos = earliest[voice];
        }
    }
    return chosen;
}

std::vector<PlacedLine> place_voice_lines(const TimestampLog& log,
                                          const std::vector<double>& line_durations_s,
                                          double clearance_s,
                                          const std::function<void(const std::string&)>& warn) {
    auto report = [&](const std::string& msg) {
        if (warn) warn(msg);
        else log::warn("{}", msg);
    };
    for (double d : line_durations_s)
        if (!(d > 0)) fail(errc::invalid_argument, "voice line durations must be positive");

    const double duration = log.trailer_duration_s;
    auto qcs = log.intervals_of("qc");
    std::sort(qcs.begin(), qcs.end(),
              [](const Interval& a, const Interval& b) { return a.start_s < b.start_s; });

    struct Gap {
        double lo, hi;       // placeable range, clearance already applied
    };
    std::vector<Gap> gaps;
    double cursor = 0;
    for (const Interval& qc : qcs) {
        if (qc.start_s > cursor) {
            gaps.push_back({cursor == 0 ? 0 : cursor + clearance_s, qc.start_s - clearance_s});
        }
        cursor = std::max(cursor, qc.end_s);
    }
    if (cursor < duration)
        gaps.push_back({cursor == 0 ? 0 : cursor + clearance_s, duration});

    std::vector<PlacedLine> placed;
    double next_free = 0;  // earliest start respecting the previous placement
    for (size_t i = 0; i < line_durations_s.size(); ++i) {
        const double d = line_durations_s[i];
        bool done = false;
        for (const Gap& gap : gaps) {
            double start = std::max(gap.lo, next_free);
            if (start + d <= gap.hi + 1e-9) {
                placed.push_back({static_cast<int>(i), Interval{start, start + d}});
                next_free = start + d + clearance_s;
                done = true;
                break;
            }
        }
        if (!done)
            report(fmt::format("voice line {} ({:.2f}s) does not fit any gap; dropped", i, d));
    }
    return placed;
}

double normalize_qc_gain(const std::vector<double>& voice_rms_dbfs, double qc_rms_dbfs) {
    if (voice_rms_dbfs.empty()) fail(errc::invalid_argument, "no voice RMS values");
    double target = 0;
    for (double v : voice_rms_dbfs) target += v;
    target /= static_cast<double>(voice_rms_dbfs.size());
    return std::clamp(target - qc_rms_dbfs, -12.0, 12.0);
}

GainEnvelope build_duck_envelope(const std::vector<Interval>& speech_intervals, double duck_db,
                                 double ramp_s, double trailer_duration_s) {
    if (!(trailer_duration_s > 0)) fail(errc::invalid_argument, "duration must be positive");
    if (duck_db > 0) fail(errc::invalid_argument, "duck_db must be <= 0");
    if (!(ramp_s > 0)) fail(errc::invalid_argument, "ramp_s must be > 0");

    std::vector<Interval> merged;
    {
        std::vector<Interval> sorted = speech_intervals;
        for (const auto& iv : sorted) {
            iv.validate();
            if (iv.end_s > trailer_duration_s + 1e-6)
                fail(errc::invalid_argument, "speech interval beyond trailer duration");
        }
        std::sort(sorted.begin(), sorted.end(),
                  [](const Interval& a, const Interval& b) { return a.start_s < b.start_s; });
        for (const Interval& iv : sorted) {
            if (!merged.empty() && iv.start_s - merged.back().end_s < ramp_s)
                merged.back().end_s = std::max(merged.back().end_s, iv.end_s);
            else
                merged.push_back(iv);
        }
    }
    if (merged.empty()) return GainEnvelope::flat(0.0);

    // Duck depth as a trapezoid per interval; the envelope is duck_db times
    // the pointwise max coverage. Knots: interval corners, domain edges, and
    // ramp crossings in gaps narrower than 2*ramp_s.
    auto coverage = [&](double t) {
        double cov = 0;
        for (const Interval& iv : merged) {
            double c;
            if (t < iv.start_s - ramp_s || t > iv.end_s + ramp_s) c = 0;
            else if (t < iv.start_s) c = (t - (iv.start_s - ramp_s)) / ramp_s;
            else if (t <= iv.end_s) c = 1;
            else c = ((iv.end_s + ramp_s) - t) / ramp_s;
            cov = std::max(cov, c);
        }
        return cov;
    };

    std::set<double> knots = {0.0, trailer_duration_s};
    for (const Interval& iv : merged) {
        for (double t : {iv.start_s - ramp_s, iv.start_s, iv.end_s, iv.end_s + ramp_s})
            if (t > 0 && t < trailer_duration_s) knots.insert(t);
    }
    for (size_t i = 1; i < merged.size(); ++i) {
        double gap = merged[i].start_s - merged[i - 1].end_s;
        if (gap < 2 * ramp_s) {
            double mid = (merged[i - 1].end_s + merged[i].start_s) / 2;
            if (mid > 0 && mid < trailer_duration_s) knots.insert(mid);
        }
    }

    GainEnvelope env;
    for (double t : knots) env.points.push_back({t, duck_db * coverage(t)});
    env.validate();
    return env;
}

GainEnvelope build_segment_envelope(double duration_s, double base_db,
                                    const std::vector<std::pair<Interval, double>>& segments,
                                    double ramp_s) {
    std::vector<std::pair<Interval, double>> sorted = segments;
    std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
        return a.first.start_s < b.first.start_s;
    });

    GainEnvelope env;
    auto push = [&](double t, double g) {
        t = std::clamp(t, 0.0, duration_s);
        if (!env.points.empty() && t <= env.points.back().time_s + 1e-9) return;
        env.points.push_back({t, g});
    };
    push(0.0, base_db);
    for (const auto& [iv, g] : sorted) {
        push(iv.start_s - ramp_s, base_db);
        push(iv.start_s, g);
        push(iv.end_s, g);
        push(iv.end_s + ramp_s, base_db);
    }
    push(duration_s, base_db);
    env.validate();
    return env;
}

fs::path render_final(const MediaEngine& engine, const RenderInputs& inputs,
                      const ProjectConfig& config, const fs::path& out,
                      bool allow_missing_music) {
    MediaInfo vinfo = engine.probe(inputs.visual);
    const double duration = vinfo.duration_s;
    fs::path workdir = out.parent_path().empty() ? "." : out.parent_path();
    ensure_dir(workdir);

    std::vector<MixTrack> tracks;

    // Base trailer audio: SC level outside QCs, normalized level inside.
    fs::path base_wav = workdir / ".render_base.wav";
    engine.extract_audio_wav(inputs.visual, base_wav);
    std::vector<std::pair<Interval, double>> qc_segments;
    auto qc_intervals = inputs.log.intervals_of("qc");
    for (size_t i = 0; i < qc_intervals.size(); ++i) {
        double gain = i < inputs.qc_gains_db.size() ? inputs.qc_gains_db[i] : 0.0;
        qc_segments.emplace_back(qc_intervals[i], gain);
    }
    tracks.push_back(MixTrack{base_wav, 0.0,
                              build_segment_envelope(duration, config.gain_sc_audio_db,
                                                     qc_segments)});

    // Voice lines at their placements, each normalized to the configured
    // absolute level.
    for (const auto& [wav, placement] : inputs.voice_tracks) {
        PcmBuffer pcm = read_wav(wav);
        double gain = config.gain_voice_dbfs - rms_dbfs(pcm.samples);
        tracks.push_back(MixTrack{wav, placement.start_s, GainEnvelope::flat(gain)});
    }

    // Music, covered to the trailer length and ducked under speech.
    fs::path covered;
    if (inputs.music.empty()) {
        if (!allow_missing_music)
            fail(errc::phase, "music track is missing (pass --allow-missing-music to proceed)");
        log::warn("rendering without music");
    } else {
        PcmBuffer music = engine.decode_audio(inputs.music);
        if (music.duration_s() < duration - 0.05) {
            log::info("looping music {:.1f}s -> {:.1f}s with 2s crossfade",
                      music.duration_s(), duration);
            music = loop_with_crossfade(music, duration, 2.0);
        } else if (music.duration_s() > duration) {
            music.samples.resize(static_cast<size_t>(duration * music.sample_rate));
        }
        covered = workdir / ".render_music.wav";
        write_wav(covered, music);

        GainEnvelope duck = build_duck_envelope(inputs.log.speech_intervals(), config.duck_db,
                                                0.15, duration);
        for (auto& p : duck.points) p.gain_db += config.gain_music_db;
        tracks.push_back(MixTrack{covered, 0.0, duck});
    }

    MixOptions opts;
    opts.fade_in_s = 1.0;
    opts.fade_out_s = 2.0;
    mix_and_mux(engine, inputs.visual, tracks, out, opts);

    fs::remove(base_wav);
    if (!covered.empty()) fs::remove(covered);

    MediaInfo final_info = engine.probe(out);
    if (std::abs(final_info.duration_s - duration) > 0.1)
        fail(errc::phase,
             fmt::format("final render duration {:.2f}s deviates from visual {:.2f}s",
                         final_info.duration_s, duration));
    return out;
}

} // namespace trailforge
