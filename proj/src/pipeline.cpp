#include "trailforge/pipeline.hpp"

#include "trailforge/assembly.hpp"
#include "trailforge/clips.hpp"
#include "trailforge/errors.hpp"
#include "trailforge/hashing.hpp"
#include "trailforge/log.hpp"
#include "trailforge/mocks.hpp"
#include "trailforge/paths.hpp"
#include "trailforge/retrieval.hpp"
#include "trailforge/shotdetect.hpp"
#include "trailforge/textproc.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <thread>

namespace trailforge {

namespace fs = std::filesystem;

const char* phase_name(int phase) {
    switch (phase) {
        case 0: return "setup";
        case 1: return "frame extraction";
        case 2: return "plot processing";
        case 3: return "quote clips";
        case 4: return "image retrieval";
        case 5: return "standard clips";
        case 6: return "visual assembly";
        case 7: return "voice-over text";
        case 8: return "voice-over speech";
        case 9: return "voice-over assembly";
        case 10: return "music";
        case 11: return "final assembly";
        default: return "?";
    }
}

json PipelineState::to_json() const {
    json phases = json::object();
    for (int p : completed) {
        json entry;
        entry["completed"] = true;
        json d = json::object();
        auto it = digests.find(p);
        if (it != digests.end())
            for (const auto& [rel, sha] : it->second) d[rel] = sha;
        entry["digests"] = d;
        phases[std::to_string(p)] = entry;
    }
    return json{{"seed", seed}, {"phases", phases}};
}

PipelineState PipelineState::from_json(const json& j) {
    PipelineState state;
    state.seed = j.value("seed", 0LL);
    if (j.contains("phases")) {
        for (const auto& [key, entry] : j.at("phases").items()) {
            int phase = std::stoi(key);
            if (entry.value("completed", false)) state.completed.insert(phase);
            if (entry.contains("digests"))
                for (const auto& [rel, sha] : entry.at("digests").items())
                    state.digests[phase][rel] = sha.get<std::string>();
        }
    }
    return state;
}

Pipeline::Pipeline(const fs::path& config_path, const fs::path& adapters_manifest)
    : config_path_(fs::absolute(config_path)), adapters_manifest_(adapters_manifest) {
    config_ = load_config(config_path_);
    project_dir_ = config_path_.parent_path();

    movie_ = config_.movie_path;
    if (movie_.is_relative()) movie_ = project_dir_ / movie_;

    seed_ = config_.seed;
    parallelism_ = config_.parallelism > 0
                       ? config_.parallelism
                       : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));

    fs::path state_path = project_dir_ / "state.json";
    if (fs::exists(state_path)) state_ = PipelineState::from_json(load_json(state_path));
}

void Pipeline::warn(const std::string& msg) {
    warnings_.push_back(msg);
    log::warn("{}", msg);
}

void Pipeline::save_state() const {
    save_json(project_dir_ / "state.json", state_.to_json());
}

void Pipeline::mark_complete(int phase, const std::vector<fs::path>& artifacts) {
    auto& digests = state_.digests[phase];
    digests.clear();
    for (const fs::path& artifact : artifacts) {
        fs::path rel = fs::relative(artifact, project_dir_);
        digests[rel.string()] = sha256_file_hex(artifact);
    }
    state_.completed.insert(phase);
    state_.seed = seed_;
    save_state();
}

void Pipeline::validate_upstream(int from_phase) const {
    for (int p = kFirstPhase; p < from_phase; ++p) {
        if (!state_.completed.count(p))
            fail(errc::phase,
                 fmt::format("cannot resume from phase {}: phase {} ({}) never completed",
                             from_phase, p, phase_name(p)));
    }
    // A file rewritten by a later phase is validated against the latest
    // completed record (timestamps.json is owned by phase 6, then phase 9).
    std::map<std::string, std::pair<int, std::string>> latest;
    for (int p = kFirstPhase; p < from_phase; ++p) {
        auto it = state_.digests.find(p);
        if (it == state_.digests.end()) continue;
        for (const auto& [rel, sha] : it->second) latest[rel] = {p, sha};
    }
    for (const auto& [rel, rec] : latest) {
        const auto& [phase, sha] = rec;
        fs::path path = project_dir_ / rel;
        if (!fs::exists(path))
            fail(errc::phase, fmt::format("digest mismatch: {} (phase {} artifact) is missing",
                                          rel, phase));
        if (sha256_file_hex(path) != sha)
            fail(errc::phase,
                 fmt::format("digest mismatch: {} was modified after phase {} recorded it", rel,
                             phase));
    }
}

void Pipeline::connect_adapters() {
    if (adapters_) return;
    AdapterSetOptions opts;
    opts.seed = seed_;
    ensure_dir(project_dir_ / "logs");
    opts.transcript_path = project_dir_ / "logs" / "adapter_transcript.ndjson";
    adapters_ = AdapterSet::from_manifest(adapters_manifest_, opts);
}

RunSummary Pipeline::run(const RunOptions& opts) {
    if (opts.from_phase < kFirstPhase || opts.to_phase > kLastPhase ||
        opts.from_phase > opts.to_phase)
        fail(errc::config, fmt::format("invalid phase range [{}, {}]", opts.from_phase,
                                       opts.to_phase));
    if (opts.seed) seed_ = *opts.seed;
    allow_missing_music_ = opts.allow_missing_music;

    ensure_dir(project_dir_ / "logs");
    log::set_file((project_dir_ / "logs" / "run.log").string());

    if (opts.from_phase > kFirstPhase) {
        if (state_.seed != seed_ && !state_.completed.empty())
            warn(fmt::format("resume seed {} differs from recorded seed {}", seed_,
                             state_.seed));
        validate_upstream(opts.from_phase);
    }

    engine_ = MediaEngine::resolve(config_.media_engine);
    connect_adapters();

    using PhaseFn = void (Pipeline::*)();
    static constexpr PhaseFn phases[] = {
        &Pipeline::phase0_setup,          &Pipeline::phase1_frames,
        &Pipeline::phase2_subplots,       &Pipeline::phase3_quote_clips,
        &Pipeline::phase4_retrieval,      &Pipeline::phase5_standard_clips,
        &Pipeline::phase6_visual_assembly, &Pipeline::phase7_voice_text,
        &Pipeline::phase8_voice_speech,   &Pipeline::phase9_voice_assembly,
        &Pipeline::phase10_music,         &Pipeline::phase11_final,
    };

    for (int p = opts.from_phase; p <= opts.to_phase; ++p) {
        log::info("phase {} ({}) starting", p, phase_name(p));
        try {
            (this->*phases[p])();
        } catch (const Error& e) {
            log::close_file();
            throw PhaseError(p, e.code(),
                             fmt::format("phase {} ({}) failed: {}", p, phase_name(p), e.what()));
        }
        log::info("phase {} ({}) complete", p, phase_name(p));
    }

    RunSummary summary;
    summary.first_phase = opts.from_phase;
    summary.last_phase = opts.to_phase;
    summary.warnings = warnings_;
    if (fs::exists(project_dir_ / "trailer" / "final.mp4"))
        summary.trailer = project_dir_ / "trailer" / "final.mp4";
    json artifacts = json::object();
    for (int p : state_.completed) {
        json files = json::array();
        auto it = state_.digests.find(p);
        if (it != state_.digests.end())
            for (const auto& [rel, sha] : it->second) files.push_back(rel);
        artifacts[std::to_string(p)] = files;
    }
    summary.artifacts = artifacts;
    log::close_file();
    return summary;
}

// Phase 0: project layout, metadata ingestion, movie validation.
void Pipeline::phase0_setup() {
    for (const char* dir : {"frames", "subplots", "clips", "voice", "music", "assembly",
                            "trailer", "cache", "logs"})
        ensure_dir(project_dir_ / dir);

    MediaInfo info = engine_->probe(movie_);
    if (info.width <= 0) fail(errc::config, "movie has no video stream");
    if (!info.has_audio) warn("movie has no audio track; quote clips will be skipped");

    fs::path metadata_path = config_.metadata_path.empty()
                                 ? project_dir_ / "metadata.json"
                                 : (fs::path(config_.metadata_path).is_relative()
                                        ? project_dir_ / config_.metadata_path
                                        : fs::path(config_.metadata_path));
    MovieMetadata metadata = ingest_metadata(metadata_path);

    json echo;
    echo["title"] = metadata.title;
    echo["synopsis"] = metadata.synopsis;
    echo["quotes"] = metadata.quote_blocks;
    echo["genres"] = metadata.genres;
    echo["directors"] = metadata.directors;
    echo["release_date"] = metadata.release_date;
    echo["color_info"] = metadata.color_info ? json(*metadata.color_info) : json(nullptr);
    echo["movie"] = {{"duration_s", info.duration_s},
                     {"fps", info.fps},
                     {"width", info.width},
                     {"height", info.height},
                     {"has_audio", info.has_audio}};
    save_json(abs("metadata_ingested.json"), echo);
    mark_complete(0, {abs("metadata_ingested.json")});
}

// Phase 1: timestamp plan + JPEG extraction.
void Pipeline::phase1_frames() {
    json meta = load_json(abs("metadata_ingested.json"));
    const double duration = meta.at("movie").at("duration_s").get<double>();

    auto stamps = plan_frame_timestamps(duration, config_.head_trim_frac, config_.tail_trim_frac);
    if (stamps.empty()) warn("frame plan is empty (movie shorter than one 9 s slot)");

    auto records = engine_->extract_frames(movie_, stamps, project_dir_ / "frames", parallelism_);

    json arr = json::array();
    for (const FrameRecord& r : records) {
        arr.push_back({{"index", r.index},
                       {"timestamp_s", r.timestamp_s},
                       {"image", fs::relative(r.image_path, project_dir_).string()}});
    }
    save_json(abs("frames/frames.json"),
              json{{"movie_duration_s", duration}, {"frames", arr}});
    mark_complete(1, {abs("frames/frames.json")});
}

// Phase 2: redact the synopsis and split it into subplots via the LLM.
void Pipeline::phase2_subplots() {
    json meta = load_json(abs("metadata_ingested.json"));
    RedactionLexicon lexicon = RedactionLexicon::bundled();
    std::string redacted = redact_text(meta.at("synopsis").get<std::string>(), lexicon);

    json resp = adapters_->get(AdapterKind::llm)
                    ->call("llm/split_synopsis",
                           json{{"synopsis", redacted}, {"n_target", config_.n_sc_target}});
    auto subplots = resp.at("subplots").get<std::vector<std::string>>();
    if (static_cast<int>(subplots.size()) < config_.n_sc_target)
        warn(fmt::format("llm produced {} subplots (target {})", subplots.size(),
                         config_.n_sc_target));

    json arr = json::array();
    for (size_t i = 0; i < subplots.size(); ++i) {
        fs::path dir = project_dir_ / "subplots" / std::to_string(i);
        ensure_dir(dir);
        write_text_file(dir / "subplot.txt", subplots[i] + "\n");
        arr.push_back({{"index", i}, {"text", subplots[i]}});
    }
    save_json(abs("subplots/subplots.json"), json{{"subplots", arr}});
    mark_complete(2, {abs("subplots/subplots.json")});
}

namespace {

ClipBuildContext make_clip_context(const MediaEngine& engine, const AdapterSet& adapters,
                                   const fs::path& movie, const fs::path& project_dir,
                                   const ProjectConfig& config, const WarningSink& warn) {
    ClipBuildContext ctx;
    ctx.engine = &engine;
    ctx.adapters = &adapters;
    ctx.movie = movie;
    ctx.clips_dir = project_dir / "clips";
    ctx.cache_dir = project_dir / "cache";
    ctx.config = &config;
    ctx.warn = warn;
    return ctx;
}

} // namespace

// Phase 3: the QC cascade.
void Pipeline::phase3_quote_clips() {
    json meta = load_json(abs("metadata_ingested.json"));
    MovieMetadata metadata;
    metadata.title = meta.at("title").get<std::string>();
    metadata.synopsis = meta.at("synopsis").get<std::string>();
    metadata.quote_blocks = meta.at("quotes").get<std::vector<std::string>>();
    metadata.genres = meta.at("genres").get<std::vector<std::string>>();
    metadata.directors = meta.at("directors").get<std::vector<std::string>>();
    metadata.release_date = meta.at("release_date").get<std::string>();

    auto ctx = make_clip_context(*engine_, *adapters_, movie_, project_dir_, config_,
                                 [this](const std::string& m) { warn(m); });
    auto clips = build_quote_clips(ctx, metadata);

    save_json(abs("clips/p3_quote_clips.json"),
              json{{"quote_clips", quote_clips_to_json(clips, project_dir_)}});
    mark_complete(3, {abs("clips/p3_quote_clips.json")});
}

// Phase 4: keywords, embeddings, constrained frame selection.
void Pipeline::phase4_retrieval() {
    json frames_doc = load_json(abs("frames/frames.json"));
    json subplots_doc = load_json(abs("subplots/subplots.json"));
    const double duration = frames_doc.at("movie_duration_s").get<double>();

    auto llm = adapters_->get(AdapterKind::llm);
    auto text_embed = adapters_->get(AdapterKind::text_embed);
    auto image_embed = adapters_->get(AdapterKind::image_embed);
    auto ocr = adapters_->get(AdapterKind::ocr);

    std::vector<EmbeddedQuery> queries;
    for (const auto& sub : subplots_doc.at("subplots")) {
        SubplotQuery q;
        q.subplot_index = sub.at("index").get<int>();
        q.text = sub.at("text").get<std::string>();
        json kw = llm->call("llm/keywords", json{{"subplot", q.text}});
        q.keywords = kw.at("keywords").get<std::vector<std::string>>();
        if (q.keywords.empty())
            warn(fmt::format("no keywords for subplot {}; falling back to its text",
                             q.subplot_index));
        save_json(project_dir_ / "subplots" / std::to_string(q.subplot_index) / "keywords.json",
                  json{{"keywords", q.keywords}});

        json emb = text_embed->call("embed_text", json{{"text", q.query_text()}});
        EmbeddedQuery eq;
        eq.query = std::move(q);
        eq.embedding = normalize_embedding(emb.at("embedding").get<std::vector<float>>());
        queries.push_back(std::move(eq));
    }

    std::vector<FrameRecord> frames;
    for (const auto& f : frames_doc.at("frames")) {
        FrameRecord r;
        r.index = f.at("index").get<int>();
        r.timestamp_s = f.at("timestamp_s").get<double>();
        r.image_path = (project_dir_ / f.at("image").get<std::string>()).string();
        json emb = image_embed->call("embed_image", json{{"image_path", r.image_path}});
        r.embedding = normalize_embedding(emb.at("embedding").get<std::vector<float>>());
        frames.push_back(std::move(r));
    }

    SelectionConstraints constraints = make_constraints(duration);
    TextProbe probe = [&](const FrameRecord& frame) {
        json resp = ocr->call("detect_text", json{{"image_path", frame.image_path}});
        std::vector<OcrRegion> regions;
        for (const auto& r : resp.at("regions"))
            regions.push_back(OcrRegion{r.at("confidence").get<double>(),
                                        r.at("area_frac").get<double>()});
        return regions_block_frame(regions, constraints);
    };

    auto assignments = select_frames(queries, frames, constraints, duration, probe,
                                     [this](const std::string& m) { warn(m); });

    json arr = json::array();
    for (const SubplotAssignment& a : assignments) {
        json rejected = json::array();
        for (const RejectedFrame& r : a.rejected)
            rejected.push_back({{"frame_index", r.frame_index},
                                {"similarity", r.similarity},
                                {"reason", r.reason}});
        json entry = {{"subplot_index", a.subplot_index},
                      {"frame_index", a.frame.index},
                      {"timestamp_s", a.frame.timestamp_s},
                      {"image", fs::relative(a.frame.image_path, project_dir_).string()},
                      {"similarity", a.similarity},
                      {"rejected", rejected}};
        save_json(project_dir_ / "subplots" / std::to_string(a.subplot_index) / "frame.json",
                  entry);
        arr.push_back(entry);
    }
    save_json(abs("subplots/assignments.json"),
              json{{"movie_duration_s", duration},
                   {"min_sep_s", constraints.min_sep_s},
                   {"assignments", arr}});
    mark_complete(4, {abs("subplots/assignments.json")});
}

// Phase 5: standard clips; writes the combined clips manifest.
void Pipeline::phase5_standard_clips() {
    json doc = load_json(abs("subplots/assignments.json"));
    std::vector<SubplotAssignment> assignments;
    for (const auto& a : doc.at("assignments")) {
        SubplotAssignment sa;
        sa.subplot_index = a.at("subplot_index").get<int>();
        sa.frame.index = a.at("frame_index").get<int>();
        sa.frame.timestamp_s = a.at("timestamp_s").get<double>();
        sa.frame.image_path = (project_dir_ / a.at("image").get<std::string>()).string();
        sa.similarity = a.at("similarity").get<double>();
        assignments.push_back(std::move(sa));
    }
    if (assignments.empty()) fail(errc::phase, "no subplot assignments to build clips from");

    auto ctx = make_clip_context(*engine_, *adapters_, movie_, project_dir_, config_,
                                 [this](const std::string& m) { warn(m); });
    auto clips = build_standard_clips(ctx, assignments);
    if (clips.empty()) fail(errc::phase, "no standard clips survived");

    json manifest;
    manifest["quote_clips"] = load_json(abs("clips/p3_quote_clips.json")).at("quote_clips");
    manifest["standard_clips"] = standard_clips_to_json(clips, project_dir_);
    save_json(abs("clips/clips_manifest.json"), manifest);
    mark_complete(5, {abs("clips/clips_manifest.json")});
}

// Phase 6: vocal separation, sequencing, concat, timestamp log.
void Pipeline::phase6_visual_assembly() {
    json manifest = load_json(abs("clips/clips_manifest.json"));

    struct ScEntry {
        fs::path file;
        double source_start;
    };
    std::vector<ScEntry> scs;
    for (const auto& sc : manifest.at("standard_clips"))
        scs.push_back({project_dir_ / sc.at("file").get<std::string>(),
                       sc.at("source_start_s").get<double>()});
    std::sort(scs.begin(), scs.end(),
              [](const ScEntry& a, const ScEntry& b) { return a.source_start < b.source_start; });

    std::vector<fs::path> sc_files;
    for (const auto& e : scs) sc_files.push_back(e.file);

    // QC audio: vocal separation, then remux.
    std::vector<fs::path> qc_files;
    auto separator = adapters_->get(AdapterKind::vocal_separate);
    int qi = 0;
    for (const auto& qc : manifest.at("quote_clips")) {
        fs::path file = project_dir_ / qc.at("file").get<std::string>();
        fs::path audio = project_dir_ / "cache" / fmt::format("qc_{}_audio.wav", qi);
        fs::path separated = project_dir_ / "cache" / fmt::format("qc_{}_vocals.wav", qi);
        fs::path remuxed = project_dir_ / "cache" / fmt::format("qc_{}_sep.mp4", qi);
        engine_->extract_audio_wav(file, audio);
        separator->call("separate", json{{"audio_path", fs::absolute(audio).string()},
                                         {"output_path", fs::absolute(separated).string()}});
        engine_->replace_audio(file, separated, remuxed);
        qc_files.push_back(remuxed);
        ++qi;
    }

    if (sc_files.empty()) fail(errc::phase, "no standard clips to assemble");

    // Normalize any stragglers to the first clip's geometry.
    MediaInfo ref = engine_->probe(sc_files.front());
    auto normalize_if_needed = [&](std::vector<fs::path>& files, const char* tag) {
        for (size_t i = 0; i < files.size(); ++i) {
            MediaInfo info = engine_->probe(files[i]);
            if (info.width != ref.width || info.height != ref.height ||
                std::abs(info.fps - ref.fps) > 0.01) {
                fs::path norm =
                    project_dir_ / "cache" / fmt::format("norm_{}_{}.mp4", tag, i);
                engine_->normalize_clip(files[i], norm, ref.width, ref.height, ref.fps);
                files[i] = norm;
            }
        }
    };
    normalize_if_needed(sc_files, "sc");
    normalize_if_needed(qc_files, "qc");

    auto pattern = plan_sequence(static_cast<int>(sc_files.size()),
                                 static_cast<int>(qc_files.size()));
    auto result = assemble_visual(*engine_, pattern, sc_files, qc_files,
                                  /*video_fade_s=*/0.0, /*audio_fade_s=*/0.08,
                                  project_dir_ / "assembly" / "visual.mp4");

    json pattern_json = json::array();
    for (const SequenceItem& item : pattern)
        pattern_json.push_back(json{{"kind", item.kind == SequenceItem::Kind::QC ? "qc" : "sc"},
                                    {"index", item.index}});
    save_json(abs("assembly/pattern.json"), json{{"pattern", pattern_json}});
    save_json(abs("assembly/timestamps.json"), result.log.to_json());
    mark_complete(6, {abs("assembly/timestamps.json"), abs("assembly/pattern.json")});
}

// Phase 7: voice-over script.
void Pipeline::phase7_voice_text() {
    json meta = load_json(abs("metadata_ingested.json"));
    TimestampLog log = TimestampLog::from_json(load_json(abs("assembly/timestamps.json")));
    int n = plan_voice_count(log.trailer_duration_s);

    RedactionLexicon lexicon = RedactionLexicon::bundled();
    json resp = adapters_->get(AdapterKind::llm)
                    ->call("llm/voiceover",
                           json{{"title", meta.at("title")},
                                {"synopsis",
                                 redact_text(meta.at("synopsis").get<std::string>(), lexicon)},
                                {"directors", meta.at("directors")},
                                {"release_date", meta.at("release_date")},
                                {"n_phrases", n}});
    auto phrases = resp.at("phrases").get<std::vector<std::string>>();
    if (static_cast<int>(phrases.size()) > n) phrases.resize(static_cast<size_t>(n));

    save_json(abs("voice/phrases.json"), json{{"count", phrases.size()}, {"phrases", phrases}});
    mark_complete(7, {abs("voice/phrases.json")});
}

// Phase 8: voice selection + synthesis.
void Pipeline::phase8_voice_speech() {
    json meta = load_json(abs("metadata_ingested.json"));
    json phrases_doc = load_json(abs("voice/phrases.json"));

    std::string voice =
        choose_voice(meta.at("genres").get<std::vector<std::string>>(), VoiceTable::bundled());

    auto tts = adapters_->get(AdapterKind::tts);
    json lines = json::array();
    int i = 0;
    for (const auto& phrase : phrases_doc.at("phrases")) {
        fs::path out = project_dir_ / "voice" / fmt::format("voice_{:02}.wav", i);
        json resp = tts->call("synthesize", json{{"text", phrase},
                                                 {"voice_id", voice},
                                                 {"output_path", fs::absolute(out).string()}});
        lines.push_back({{"index", i},
                         {"text", phrase},
                         {"file", fs::relative(out, project_dir_).string()},
                         {"duration_s", resp.at("duration_s").get<double>()}});
        ++i;
    }
    save_json(abs("voice/voice.json"), json{{"voice_id", voice}, {"lines", lines}});
    mark_complete(8, {abs("voice/voice.json")});
}

// Phase 9: placement, loudness normalization, final timestamp log.
void Pipeline::phase9_voice_assembly() {
    TimestampLog log = TimestampLog::from_json(load_json(abs("assembly/timestamps.json")));
    // Re-run from the phase-6 log even when phase 9 executed before.
    log.entries.erase(std::remove_if(log.entries.begin(), log.entries.end(),
                                     [](const TimestampEntry& e) { return e.kind == "voice"; }),
                      log.entries.end());

    json voice_doc = load_json(abs("voice/voice.json"));
    std::vector<double> durations;
    std::vector<fs::path> files;
    for (const auto& line : voice_doc.at("lines")) {
        durations.push_back(line.at("duration_s").get<double>());
        files.push_back(project_dir_ / line.at("file").get<std::string>());
    }

    auto placements = place_voice_lines(log, durations, 0.5,
                                        [this](const std::string& m) { warn(m); });

    // Voice levels as they will sound in the trailer, i.e. at the configured
    // absolute target.
    std::vector<double> voice_rms(placements.size(), config_.gain_voice_dbfs);

    json manifest = load_json(abs("clips/clips_manifest.json"));
    json qc_gains = json::array();
    int qi = 0;
    for (const auto& qc : manifest.at("quote_clips")) {
        (void)qc;
        fs::path sep = project_dir_ / "cache" / fmt::format("qc_{}_sep.mp4", qi);
        double gain = 0.0;
        if (!voice_rms.empty() && fs::exists(sep)) {
            double qc_rms = measure_rms(*engine_, sep);
            gain = normalize_qc_gain(voice_rms, qc_rms);
        }
        qc_gains.push_back(gain);
        ++qi;
    }

    json placed = json::array();
    for (const PlacedLine& p : placements) {
        log.entries.push_back({"voice", p.line_index,
                               Interval{p.interval.start_s, p.interval.end_s}});
        placed.push_back({{"line_index", p.line_index},
                          {"file", fs::relative(files[static_cast<size_t>(p.line_index)],
                                                project_dir_)
                                       .string()},
                          {"start_s", p.interval.start_s},
                          {"end_s", p.interval.end_s}});
    }
    log.sort_entries();

    save_json(abs("voice/placements.json"),
              json{{"clearance_s", 0.5}, {"placements", placed}, {"qc_gains_db", qc_gains}});
    save_json(abs("assembly/timestamps.json"), log.to_json());
    mark_complete(9, {abs("voice/placements.json"), abs("assembly/timestamps.json")});
}

// Phase 10: music brief + generation (looping happens at render time).
void Pipeline::phase10_music() {
    json meta = load_json(abs("metadata_ingested.json"));
    TimestampLog log = TimestampLog::from_json(load_json(abs("assembly/timestamps.json")));

    RedactionLexicon lexicon = RedactionLexicon::bundled();
    json brief = adapters_->get(AdapterKind::llm)
                     ->call("llm/music_brief",
                            json{{"title", meta.at("title")},
                                 {"synopsis",
                                  redact_text(meta.at("synopsis").get<std::string>(), lexicon)},
                                 {"genres", meta.at("genres")}});
    write_text_file(abs("music/brief.txt"), brief.at("brief").get<std::string>() + "\n");

    auto music = adapters_->get(AdapterKind::music);
    double want = log.trailer_duration_s;
    if (music->capabilities().max_music_s > 0)
        want = std::min(want, music->capabilities().max_music_s);
    fs::path out = project_dir_ / "music" / "music.wav";
    json resp = music->call("generate", json{{"brief", brief.at("brief")},
                                             {"duration_s", want},
                                             {"output_path", fs::absolute(out).string()}});

    save_json(abs("music/music.json"),
              json{{"file", "music/music.wav"},
                   {"duration_s", resp.at("duration_s").get<double>()},
                   {"requested_s", want},
                   {"trailer_duration_s", log.trailer_duration_s}});
    mark_complete(10, {abs("music/music.json"), abs("music/brief.txt")});
}

// Phase 11: ducked mix + fades + final mux.
void Pipeline::phase11_final() {
    TimestampLog log = TimestampLog::from_json(load_json(abs("assembly/timestamps.json")));
    json placements_doc = load_json(abs("voice/placements.json"));

    RenderInputs inputs;
    inputs.visual = project_dir_ / "assembly" / "visual.mp4";
    inputs.log = log;
    for (const auto& p : placements_doc.at("placements")) {
        inputs.voice_tracks.emplace_back(
            project_dir_ / p.at("file").get<std::string>(),
            Interval{p.at("start_s").get<double>(), p.at("end_s").get<double>()});
    }
    for (const auto& g : placements_doc.at("qc_gains_db"))
        inputs.qc_gains_db.push_back(g.get<double>());

    fs::path music = project_dir_ / "music" / "music.wav";
    if (fs::exists(music)) inputs.music = music;

    fs::path out = project_dir_ / "trailer" / "final.mp4";
    render_final(*engine_, inputs, config_, out, allow_missing_music_);

    MediaInfo info = engine_->probe(out);
    save_json(abs("trailer/report.json"),
              json{{"trailer", "trailer/final.mp4"},
                   {"duration_s", info.duration_s},
                   {"visual_duration_s", log.trailer_duration_s},
                   {"entries", log.entries.size()},
                   {"warnings", warnings_}});
    mark_complete(11, {abs("trailer/report.json")});
}

} // namespace trailforge
