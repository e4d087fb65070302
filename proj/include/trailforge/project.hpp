#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace trailforge {

struct ProjectConfig {
    std::string movie_path;
    std::string project_name;
    std::string external_movie_id;

    int n_sc_target = 8;
    int n_qc_target = 3;
    double clip_len_min_s = 3.0;
    double clip_len_max_s = 8.0;
    double head_trim_frac = 0.04;
    double tail_trim_frac = 0.10;

    double gain_voice_dbfs = -16.0;  // absolute target level for voice lines
    double gain_sc_audio_db = -6.0;  // relative gain on SC diegetic audio
    double gain_music_db = 0.0;      // relative gain on the music bed
    double duck_db = -12.0;          // music attenuation under speech, <= 0

    long long seed = 0;

    // Plumbing knobs (documented extensions, all optional in the file).
    std::string media_engine;     // empty: $TRAILFORGE_MEDIA_ENGINE / PATH
    std::string metadata_path;    // default: metadata.json beside the config
    int parallelism = 0;          // 0: hardware concurrency

    void validate() const;  // throws errc::config naming the offending field
};

ProjectConfig load_config(const std::filesystem::path& path);
void save_config(const ProjectConfig& config, const std::filesystem::path& path);

struct MovieMetadata {
    std::string title;
    std::string synopsis;
    std::vector<std::string> quote_blocks;
    std::vector<std::string> genres;  // order preserved, used for tie-breaks
    std::vector<std::string> directors;
    std::string release_date;  // ISO-8601, may be empty
    std::optional<std::string> color_info;
};

MovieMetadata ingest_metadata(const std::filesystem::path& path);

struct RedactionLexicon {
    std::set<std::string> terms;  // lowercase
    std::string replacement = "REDACTED";

    static RedactionLexicon load(const std::filesystem::path& path);
    static RedactionLexicon bundled();  // share/trailforge/redaction_lexicon.txt
    void validate() const;
};

// Case-insensitive whole-word replacement; everything outside matches stays
// byte-identical. Word characters are ASCII alphanumerics and underscore.
std::string redact_text(const std::string& text, const RedactionLexicon& lexicon);

} // namespace trailforge
