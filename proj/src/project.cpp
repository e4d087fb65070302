#include "trailforge/project.hpp"

#include "trailforge/errors.hpp"
#include "trailforge/jsonio.hpp"
#include "trailforge/paths.hpp"

#include <fmt/core.h>

#include <cctype>
#include <cmath>
#include <fstream>

namespace trailforge {

namespace fs = std::filesystem;

namespace {

bool is_word_char(unsigned char c) { return std::isalnum(c) || c == '_'; }

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

template <typename T>
void read_field(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        fail(errc::config, fmt::format("config field '{}' has the wrong type", key));
    }
}

} // namespace

void ProjectConfig::validate() const {
    auto finite = [](double v) { return std::isfinite(v); };
    if (movie_path.empty()) fail(errc::config, "movie_path is required");
    if (project_name.empty()) fail(errc::config, "project_name is required");
    if (n_sc_target < 0) fail(errc::config, "n_sc_target must be >= 0");
    if (n_qc_target < 0) fail(errc::config, "n_qc_target must be >= 0");
    if (!(clip_len_min_s > 0)) fail(errc::config, "clip_len_min_s must be > 0");
    if (!(clip_len_min_s < clip_len_max_s))
        fail(errc::config, "clip_len_min_s must be < clip_len_max_s");
    if (head_trim_frac + tail_trim_frac >= 1)
        fail(errc::config, "trim fractions exceed timeline");
    if (head_trim_frac < 0 || head_trim_frac > 0.3)
        fail(errc::config, "head_trim_frac must lie in [0, 0.3]");
    if (tail_trim_frac < 0 || tail_trim_frac > 0.3)
        fail(errc::config, "tail_trim_frac must lie in [0, 0.3]");
    if (!finite(gain_voice_dbfs)) fail(errc::config, "gain_voice_dbfs must be finite");
    if (!finite(gain_sc_audio_db)) fail(errc::config, "gain_sc_audio_db must be finite");
    if (!finite(gain_music_db)) fail(errc::config, "gain_music_db must be finite");
    if (!finite(duck_db) || duck_db > 0) fail(errc::config, "duck_db must be finite and <= 0");
    if (parallelism < 0) fail(errc::config, "parallelism must be >= 0");
}

ProjectConfig load_config(const fs::path& path) {
    json j = load_json(path);
    ProjectConfig c;
    read_field(j, "movie_path", c.movie_path);
    read_field(j, "project_name", c.project_name);
    read_field(j, "external_movie_id", c.external_movie_id);
    read_field(j, "n_sc_target", c.n_sc_target);
    read_field(j, "n_qc_target", c.n_qc_target);
    read_field(j, "clip_len_min_s", c.clip_len_min_s);
    read_field(j, "clip_len_max_s", c.clip_len_max_s);
    read_field(j, "head_trim_frac", c.head_trim_frac);
    read_field(j, "tail_trim_frac", c.tail_trim_frac);
    read_field(j, "gain_voice_dbfs", c.gain_voice_dbfs);
    read_field(j, "gain_sc_audio_db", c.gain_sc_audio_db);
    read_field(j, "gain_music_db", c.gain_music_db);
    read_field(j, "duck_db", c.duck_db);
    read_field(j, "seed", c.seed);
    read_field(j, "media_engine", c.media_engine);
    read_field(j, "metadata_path", c.metadata_path);
    read_field(j, "parallelism", c.parallelism);
    c.validate();
    return c;
}

void save_config(const ProjectConfig& c, const fs::path& path) {
    c.validate();
    json j;
    j["movie_path"] = c.movie_path;
    j["project_name"] = c.project_name;
    j["external_movie_id"] = c.external_movie_id;
    j["n_sc_target"] = c.n_sc_target;
    j["n_qc_target"] = c.n_qc_target;
    j["clip_len_min_s"] = c.clip_len_min_s;
    j["clip_len_max_s"] = c.clip_len_max_s;
    j["head_trim_frac"] = c.head_trim_frac;
    j["tail_trim_frac"] = c.tail_trim_frac;
    j["gain_voice_dbfs"] = c.gain_voice_dbfs;
    j["gain_sc_audio_db"] = c.gain_sc_audio_db;
    j["gain_music_db"] = c.gain_music_db;
    j["duck_db"] = c.duck_db;
    j["seed"] = c.seed;
    j["media_engine"] = c.media_engine;
    j["metadata_path"] = c.metadata_path;
    j["parallelism"] = c.parallelism;
    save_json(path, j);
}

MovieMetadata ingest_metadata(const fs::path& path) {
    json j = load_json(path);
    MovieMetadata m;
    if (j.contains("title")) m.title = j.at("title").get<std::string>();
    if (j.contains("synopsis")) m.synopsis = j.at("synopsis").get<std::string>();

    std::string trimmed = m.synopsis;
    trimmed.erase(0, trimmed.find_first_not_of(" \t\r\n"));
    if (trimmed.empty())
        fail(errc::config, fmt::format("{}: metadata synopsis is missing or empty", path.string()));
    if (m.title.empty())
        fail(errc::config, fmt::format("{}: metadata title is missing", path.string()));

    if (j.contains("quotes"))
        for (const auto& q : j.at("quotes")) m.quote_blocks.push_back(q.get<std::string>());
    if (j.contains("genres"))
        for (const auto& g : j.at("genres")) m.genres.push_back(g.get<std::string>());
    if (j.contains("directors"))
        for (const auto& d : j.at("directors")) m.directors.push_back(d.get<std::string>());
    if (j.contains("release_date") && !j.at("release_date").is_null())
        m.release_date = j.at("release_date").get<std::string>();
    if (j.contains("color_info") && !j.at("color_info").is_null())
        m.color_info = j.at("color_info").get<std::string>();
    return m;
}

RedactionLexicon RedactionLexicon::load(const fs::path& path) {
    std::ifstream in(path);
    if (!in) fail(errc::io, fmt::format("cannot open lexicon {}", path.string()));
    RedactionLexicon lex;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty() || line[0] == '#') continue;
        lex.terms.insert(lower(line));
    }
    lex.validate();
    return lex;
}

RedactionLexicon RedactionLexicon::bundled() {
    return load(share_dir() / "redaction_lexicon.txt");
}

void RedactionLexicon::validate() const {
    if (terms.empty()) fail(errc::config, "redaction lexicon has no terms");
    if (replacement.empty()) fail(errc::config, "redaction replacement is empty");
}

std::string redact_text(const std::string& text, const RedactionLexicon& lexicon) {
    lexicon.validate();
    std::string out;
    out.reserve(text.size());
    size_t i = 0;
    while (i < text.size()) {
        if (!is_word_char(static_cast<unsigned char>(text[i]))) {
            out.push_back(text[i++]);
            continue;
        }
        size_t j = i;
        while (j < text.size() && is_word_char(static_cast<unsigned char>(text[j]))) ++j;
        std::string word = text.substr(i, j - i);
        if (lexicon.terms.count(lower(word))) out += lexicon.replacement;
        else out += word;
        i = j;
    }
    return out;
}

} // namespace trailforge
