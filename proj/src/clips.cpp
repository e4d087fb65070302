#include "trailforge/clips.hpp"

#include "trailforge/errors.hpp"
#include "trailforge/log.hpp"
#include "trailforge/paths.hpp"
#include "trailforge/shotdetect.hpp"

#include <fmt/core.h>

#include <algorithm>

namespace trailforge {

namespace fs = std::filesystem;

namespace {

void warn_via(const ClipBuildContext& ctx, const std::string& msg) {
    if (ctx.warn) ctx.warn(msg);
    else log::warn("{}", msg);
}

std::string rel_to(const fs::path& path, const fs::path& root) {
    std::error_code ec;
    fs::path rel = fs::relative(path, root, ec);
    return ec || rel.empty() ? path.string() : rel.string();
}

} // namespace

fs::path ensure_movie_audio(const ClipBuildContext& ctx) {
    ensure_dir(ctx.cache_dir);
    fs::path wav = ctx.cache_dir / (ctx.movie.stem().string() + ".audio.wav");
    if (!fs::exists(wav)) ctx.engine->extract_audio_wav(ctx.movie, wav);
    return wav;
}

std::vector<TranscriptSegment> transcribe_movie(const ClipBuildContext& ctx) {
    fs::path wav = ensure_movie_audio(ctx);
    json resp = ctx.adapters->get(AdapterKind::asr)
                    ->call("transcribe", json{{"audio_path", fs::absolute(wav).string()}});
    std::vector<TranscriptSegment> segments;
    for (const auto& s : resp.at("segments")) {
        segments.push_back(TranscriptSegment{
            Interval{s.at("start_s").get<double>(), s.at("end_s").get<double>()},
            s.at("text").get<std::string>()});
    }
    std::sort(segments.begin(), segments.end(), [](const auto& a, const auto& b) {
        return a.interval.start_s < b.interval.start_s;
    });
    return segments;
}

std::vector<Interval> detect_movie_speech(const ClipBuildContext& ctx) {
    fs::path wav = ensure_movie_audio(ctx);
    json resp = ctx.adapters->get(AdapterKind::vad)
                    ->call("detect_speech", json{{"audio_path", fs::absolute(wav).string()}});
    std::vector<Interval> speech;
    for (const auto& s : resp.at("speech"))
        speech.push_back(Interval{s.at("start_s").get<double>(), s.at("end_s").get<double>()});
    std::sort(speech.begin(), speech.end(),
              [](const Interval& a, const Interval& b) { return a.start_s < b.start_s; });
    return speech;
}

std::vector<QuoteClip> build_quote_clips(const ClipBuildContext& ctx,
                                         const MovieMetadata& metadata) {
    if (metadata.quote_blocks.empty()) {
        warn_via(ctx, "no quote blocks in metadata; skipping quote clips");
        return {};
    }
    ensure_dir(ctx.clips_dir);
    ensure_dir(ctx.cache_dir);

    // Parse and redact.
    RedactionLexicon lexicon = RedactionLexicon::bundled();
    std::vector<Quote> quotes;
    for (const auto& block : metadata.quote_blocks) {
        for (Quote& q : parse_quote_block(block)) {
            q.text = redact_text(q.text, lexicon);
            q.char_len = static_cast<int>(q.text.size());
            quotes.push_back(std::move(q));
        }
    }

    // Filter cascade and LLM selection.
    RuleBasedCompleteness completeness;
    LexiconSentiment sentiment;
    auto ranked = filter_and_rank_quotes(quotes, completeness, sentiment, {}, ctx.warn);
    if (ranked.empty()) {
        warn_via(ctx, "no quotes survived the filter cascade");
        return {};
    }

    std::vector<std::string> texts;
    texts.reserve(ranked.size());
    for (const Quote& q : ranked) texts.push_back(q.text);
    json resp = ctx.adapters->get(AdapterKind::llm)
                    ->call("llm/select_quotes",
                           json{{"quotes", texts}, {"n_target", ctx.config->n_qc_target}});
    std::vector<Quote> selected;
    for (const auto& text : resp.at("selected")) {
        auto it = std::find_if(ranked.begin(), ranked.end(),
                               [&](const Quote& q) { return q.text == text.get<std::string>(); });
        if (it == ranked.end()) {
            warn_via(ctx, fmt::format("llm selected an unknown quote: {}", text.dump()));
            continue;
        }
        selected.push_back(*it);
        if (selected.size() >= static_cast<size_t>(ctx.config->n_qc_target)) break;
    }

    // Transcript alignment and VAD refinement.
    auto transcript = transcribe_movie(ctx);
    auto speech = detect_movie_speech(ctx);

    std::vector<QuoteClip> clips;
    for (const Quote& quote : selected) {
        auto aligned = align_quote(quote, transcript);
        if (!aligned) {
            warn_via(ctx, fmt::format("quote not aligned to the transcript: {}", quote.text));
            continue;
        }
        auto refined = refine_with_vad(aligned->interval, speech);
        if (!refined) {
            warn_via(ctx,
                     fmt::format("quote interval rejected by VAD refinement: {}", quote.text));
            continue;
        }

        const auto index = static_cast<int>(clips.size());
        fs::path raw = ctx.cache_dir / fmt::format("qc_{}_raw.mp4", index);
        fs::path out = ctx.clips_dir / fmt::format("qc_{}.mp4", index);
        ctx.engine->cut_clip(ctx.movie, *refined, raw);

        auto shots = detect_shots(*ctx.engine, raw);
        auto orphans = find_orphan_spans(shots, ctx.orphan_max_s);
        if (orphans.empty()) {
            fs::copy_file(raw, out, fs::copy_options::overwrite_existing);
        } else {
            ctx.engine->blank_video_span(raw, orphans, out);
        }

        QuoteClip clip;
        clip.aligned = *aligned;
        clip.source_interval = *refined;
        clip.file = out;
        clip.raw_file = raw;
        clip.orphan_spans_blanked = orphans;
        clip.duration_s = ctx.engine->probe(out).duration_s;
        if (clip.duration_s > 12.0 + 0.1)
            fail(errc::internal,
                 fmt::format("quote clip {} exceeds the 12 s cap ({:.2f}s)", index,
                             clip.duration_s));
        clips.push_back(std::move(clip));
    }
    if (clips.empty()) warn_via(ctx, "zero quote clips produced");
    return clips;
}

std::vector<StandardClip> build_standard_clips(const ClipBuildContext& ctx,
                                               const std::vector<SubplotAssignment>& assignments) {
    if (assignments.empty()) fail(errc::invalid_argument, "no subplot assignments");
    ensure_dir(ctx.clips_dir);
    MediaInfo movie_info = ctx.engine->probe(ctx.movie);

    const double min_s = ctx.config->clip_len_min_s;
    const double max_s = ctx.config->clip_len_max_s;

    std::vector<StandardClip> clips;
    for (const SubplotAssignment& assignment : assignments) {
        const double anchor = assignment.frame.timestamp_s;
        Interval window{std::max(0.0, anchor - max_s),
                        std::min(movie_info.duration_s, anchor + max_s)};
        if (window.length() < min_s) {
            warn_via(ctx, fmt::format("anchor {:.2f}s too close to the movie edge; dropped",
                                      anchor));
            continue;
        }

        auto shots = detect_shots(*ctx.engine, ctx.movie, DetectorParams{}, window);
        auto bounds = rectify_clip_bounds(anchor, shots, min_s, max_s);
        if (!bounds) {
            warn_via(ctx, fmt::format("no viable bounds around anchor {:.2f}s; dropped", anchor));
            continue;
        }

        // Aggressive re-check: orphan-short shots inside the chosen interval
        // force a re-rectification against the finer boundary set.
        DetectorParams aggressive;
        aggressive.aggressive = true;
        auto fine_shots = detect_shots(*ctx.engine, ctx.movie, aggressive, bounds->interval);
        if (!find_orphan_spans(fine_shots, ctx.orphan_max_s).empty()) {
            auto refined = rectify_clip_bounds(anchor, fine_shots, min_s, max_s);
            if (refined) bounds = refined;
        }

        const auto index = static_cast<int>(clips.size());
        fs::path out = ctx.clips_dir / fmt::format("sc_{}.mp4", index);
        ctx.engine->cut_clip(ctx.movie, bounds->interval, out);

        StandardClip clip;
        clip.assignment = assignment;
        clip.source_interval = bounds->interval;
        clip.file = out;
        clip.fallback = bounds->fallback;
        clip.duration_s = ctx.engine->probe(out).duration_s;
        clips.push_back(std::move(clip));
    }
    return clips;
}

json quote_clips_to_json(const std::vector<QuoteClip>& clips, const fs::path& root) {
    json arr = json::array();
    for (size_t i = 0; i < clips.size(); ++i) {
        const QuoteClip& c = clips[i];
        json spans = json::array();
        for (const Interval& s : c.orphan_spans_blanked)
            spans.push_back({{"start_s", s.start_s}, {"end_s", s.end_s}});
        arr.push_back({{"index", i},
                       {"file", rel_to(c.file, root)},
                       {"raw_file", rel_to(c.raw_file, root)},
                       {"source_start_s", c.source_interval.start_s},
                       {"source_end_s", c.source_interval.end_s},
                       {"duration_s", c.duration_s},
                       {"speaker", c.aligned.quote.speaker ? json(*c.aligned.quote.speaker)
                                                           : json(nullptr)},
                       {"text", c.aligned.quote.text},
                       {"similarity", c.aligned.similarity},
                       {"blanked_spans", spans}});
    }
    return arr;
}

json standard_clips_to_json(const std::vector<StandardClip>& clips, const fs::path& root) {
    json arr = json::array();
    for (size_t i = 0; i < clips.size(); ++i) {
        const StandardClip& c = clips[i];
        arr.push_back({{"index", i},
                       {"file", rel_to(c.file, root)},
                       {"subplot_index", c.assignment.subplot_index},
                       {"anchor_ts_s", c.assignment.frame.timestamp_s},
                       {"source_start_s", c.source_interval.start_s},
                       {"source_end_s", c.source_interval.end_s},
                       {"duration_s", c.duration_s},
                       {"similarity", c.assignment.similarity},
                       {"fallback", c.fallback}});
    }
    return arr;
}

} // namespace trailforge
