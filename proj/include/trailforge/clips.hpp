#pragma once

#include "trailforge/adapters.hpp"
#include "trailforge/mediaio.hpp"
#include "trailforge/project.hpp"
#include "trailforge/retrieval.hpp"
#include "trailforge/textproc.hpp"

#include <filesystem>
#include <vector>

namespace trailforge {

struct QuoteClip {
    AlignedQuote aligned;
    Interval source_interval;  // in the movie timeline
    std::filesystem::path file;
    std::filesystem::path raw_file;  // pre-blank cut kept for auditing
    std::vector<Interval> orphan_spans_blanked;  // clip-local time
    double duration_s = 0;
};

struct StandardClip {
    SubplotAssignment assignment;
    Interval source_interval;
    std::filesystem::path file;
    bool fallback = false;
    double duration_s = 0;
};

struct ClipBuildContext {
    const MediaEngine* engine = nullptr;
    const AdapterSet* adapters = nullptr;
    std::filesystem::path movie;
    std::filesystem::path clips_dir;  // qc_{n}.mp4 / sc_{n}.mp4
    std::filesystem::path cache_dir;  // raw cuts, full-movie audio, sidecars
    const ProjectConfig* config = nullptr;
    WarningSink warn;
    double orphan_max_s = 0.5;
};

// Full movie audio, transcribed once and cached as <stem>.audio.wav in the
// cache dir (the cue key the asr/vad adapters see).
std::filesystem::path ensure_movie_audio(const ClipBuildContext& ctx);

std::vector<TranscriptSegment> transcribe_movie(const ClipBuildContext& ctx);
std::vector<Interval> detect_movie_speech(const ClipBuildContext& ctx);

// Phase 3 cascade: parse, redact, filter/rank, LLM selection, alignment,
// VAD refinement, cut, orphan blanking.
std::vector<QuoteClip> build_quote_clips(const ClipBuildContext& ctx,
                                         const MovieMetadata& metadata);

// Phase 5: buffered-zone shot detection and bound rectification around each
// assigned anchor frame, aggressive re-check for orphan-short shots.
std::vector<StandardClip> build_standard_clips(const ClipBuildContext& ctx,
                                               const std::vector<SubplotAssignment>& assignments);

// clips_manifest.json bodies; paths are stored relative to `root`.
json quote_clips_to_json(const std::vector<QuoteClip>& clips, const std::filesystem::path& root);
json standard_clips_to_json(const std::vector<StandardClip>& clips,
                            const std::filesystem::path& root);

} // namespace trailforge
