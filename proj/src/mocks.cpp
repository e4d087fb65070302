#include "trailforge/mocks.hpp"

#include "trailforge/audio.hpp"
#include "trailforge/errors.hpp"
#include "trailforge/hashing.hpp"
#include "trailforge/jsonio.hpp"
#include "trailforge/paths.hpp"

#include <fmt/core.h>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>

namespace trailforge {

namespace fs = std::filesystem;

namespace {

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::vector<std::string> split_sentences(const std::string& text) {
    std::vector<std::string> sentences;
    std::string cur;
    for (char c : text) {
        cur.push_back(c);
        if (c == '.' || c == '!' || c == '?') {
            while (!cur.empty() && std::isspace(static_cast<unsigned char>(cur.front())))
                cur.erase(cur.begin());
            if (!cur.empty()) sentences.push_back(cur);
            cur.clear();
        }
    }
    while (!cur.empty() && std::isspace(static_cast<unsigned char>(cur.front())))
        cur.erase(cur.begin());
    while (!cur.empty() && std::isspace(static_cast<unsigned char>(cur.back()))) cur.pop_back();
    if (!cur.empty()) sentences.push_back(cur);
    return sentences;
}

const std::set<std::string>& stopwords() {
    static const std::set<std::string> words = {
        "a",    "an",   "and",  "are", "as",   "at",   "be",   "but", "by",   "for", "from",
        "has",  "he",   "her",  "his", "in",   "is",   "it",   "its", "of",   "on",  "or",
        "she",  "that", "the",  "their", "them", "there", "they", "this", "to", "was",
        "were", "when", "where", "which", "while", "with", "who", "will"};
    return words;
}

std::vector<std::string> extract_keywords(const std::string& text, size_t cap = 5) {
    std::vector<std::string> keywords;
    std::set<std::string> seen;
    std::string cur;
    auto flush = [&] {
        if (cur.size() >= 3 && !stopwords().count(cur) && seen.insert(cur).second &&
            keywords.size() < cap)
            keywords.push_back(cur);
        cur.clear();
    };
    for (char c : text) {
        if (std::isalnum(static_cast<unsigned char>(c)))
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        else
            flush();
    }
    flush();
    return keywords;
}

std::string substitute(std::string tmpl, const std::map<std::string, std::string>& vars) {
    for (const auto& [key, value] : vars) {
        std::string token = "{" + key + "}";
        size_t pos;
        while ((pos = tmpl.find(token)) != std::string::npos)
            tmpl.replace(pos, token.size(), value);
    }
    return tmpl;
}

json load_cue_sheet(const MockOptions& opts, const std::string& audio_path,
                    const char* suffix) {
    if (opts.fixtures_dir.empty())
        fail(errc::adapter, "mock asr/vad needs a fixtures_dir with cue sheets");
    fs::path cue = opts.fixtures_dir / (fs::path(audio_path).filename().string() + suffix);
    if (!fs::exists(cue))
        fail(errc::adapter, fmt::format("no cue sheet {} for {}", cue.string(), audio_path));
    return load_json(cue);
}

const json& mock_templates() {
    static const json templates = load_json(share_dir() / "mock_templates.json");
    return templates;
}

} // namespace

std::vector<float> mock_embed_vector(uint64_t seed, std::string_view content, int dim) {
    SplitMix64 rng(seed ^ fnv1a64(content));
    std::vector<float> v(static_cast<size_t>(dim));
    for (float& x : v) x = static_cast<float>(rng.next_unit() * 2.0 - 1.0);
    double norm = 0;
    for (float x : v) norm += static_cast<double>(x) * x;
    norm = std::sqrt(norm);
    for (float& x : v) x = static_cast<float>(x / norm);
    return v;
}

Capabilities mock_capabilities(AdapterKind kind) {
    Capabilities caps;
    caps.max_concurrency = 1;
    switch (kind) {
        case AdapterKind::text_embed:
        case AdapterKind::image_embed:
            caps.embedding_dim = kMockEmbeddingDim;
            break;
        case AdapterKind::music:
            caps.max_music_s = kMockMaxMusicS;
            break;
        case AdapterKind::tts:
            caps.voices = {"V1", "V2", "V3", "V4", "V5"};
            break;
        default:
            break;
    }
    return caps;
}

json mock_handle(AdapterKind kind, const std::string& task, const json& payload,
                 const MockOptions& opts) {
    const auto seed = static_cast<uint64_t>(opts.seed);
    switch (kind) {
        case AdapterKind::llm: {
            if (task == "llm/split_synopsis") {
                auto sentences = split_sentences(payload.at("synopsis").get<std::string>());
                int n = std::max(1, std::min<int>(payload.at("n_target").get<int>(),
                                                  static_cast<int>(sentences.size())));
                std::vector<std::string> subplots(static_cast<size_t>(n));
                // Contiguous balanced grouping keeps narrative order.
                size_t per = sentences.size() / static_cast<size_t>(n);
                size_t extra = sentences.size() % static_cast<size_t>(n);
                size_t idx = 0;
                for (int g = 0; g < n; ++g) {
                    size_t take = per + (static_cast<size_t>(g) < extra ? 1 : 0);
                    std::string joined;
                    for (size_t k = 0; k < take; ++k) {
                        if (!joined.empty()) joined += " ";
                        joined += sentences[idx++];
                    }
                    subplots[static_cast<size_t>(g)] = joined;
                }
                return json{{"subplots", subplots}};
            }
            if (task == "llm/select_quotes") {
                auto quotes = payload.at("quotes").get<std::vector<std::string>>();
                auto n = static_cast<size_t>(payload.at("n_target").get<int>());
                if (quotes.size() > n) quotes.resize(n);
                return json{{"selected", quotes}};
            }
            if (task == "llm/keywords") {
                return json{{"keywords",
                             extract_keywords(payload.at("subplot").get<std::string>())}};
            }
            if (task == "llm/voiceover") {
                const auto& templates = mock_templates().at("voiceover");
                auto n = static_cast<size_t>(payload.at("n_phrases").get<int>());
                std::string director = "the director";
                if (!payload.at("directors").empty())
                    director = payload.at("directors")[0].get<std::string>();
                std::string release = payload.at("release_date").get<std::string>();
                std::map<std::string, std::string> vars = {
                    {"title", payload.at("title").get<std::string>()},
                    {"director", director},
                    {"year", release.size() >= 4 ? release.substr(0, 4) : "soon"},
                };
                std::vector<std::string> phrases;
                for (size_t i = 0; i < n; ++i) {
                    const auto& tmpl = templates[i % templates.size()];
                    phrases.push_back(substitute(tmpl.get<std::string>(), vars));
                }
                return json{{"phrases", phrases}};
            }
            if (task == "llm/music_brief") {
                std::string genres;
                for (const auto& g : payload.at("genres"))
                    genres += (genres.empty() ? "" : ", ") + g.get<std::string>();
                if (genres.empty()) genres = "drama";
                std::map<std::string, std::string> vars = {
                    {"title", payload.at("title").get<std::string>()}, {"genres", genres}};
                return json{{"brief", substitute(
                                          mock_templates().at("music_brief").get<std::string>(),
                                          vars)}};
            }
            fail(errc::adapter, fmt::format("mock llm does not know task {}", task));
        }
        case AdapterKind::text_embed:
            return json{{"embedding", mock_embed_vector(seed, payload.at("text").get<std::string>(),
                                                        kMockEmbeddingDim)}};
        case AdapterKind::image_embed: {
            std::string path = payload.at("image_path").get<std::string>();
            std::ifstream in(path, std::ios::binary);
            if (!in) fail(errc::adapter, fmt::format("mock image-embed: cannot open {}", path));
            std::string bytes((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());
            return json{{"embedding", mock_embed_vector(seed, bytes, kMockEmbeddingDim)}};
        }
        case AdapterKind::asr: {
            json cue = load_cue_sheet(opts, payload.at("audio_path").get<std::string>(),
                                      ".asr.json");
            return json{{"segments", cue.at("segments")}};
        }
        case AdapterKind::vad: {
            json cue = load_cue_sheet(opts, payload.at("audio_path").get<std::string>(),
                                      ".vad.json");
            return json{{"speech", cue.at("speech")}};
        }
        case AdapterKind::tts: {
            std::string text = payload.at("text").get<std::string>();
            std::string out = payload.at("output_path").get<std::string>();
            double duration = kMockTtsSecondsPerChar * static_cast<double>(text.size());
            write_wav(out, make_sine(duration, kMockTtsFreqHz, 0.25));
            return json{{"audio_path", out}, {"duration_s", duration}};
        }
        case AdapterKind::music: {
            double requested = payload.at("duration_s").get<double>();
            double duration = std::min(requested, kMockMaxMusicS);
            std::string out = payload.at("output_path").get<std::string>();
            uint64_t noise_seed = seed ^ fnv1a64(payload.at("brief").get<std::string>());
            write_wav(out, make_noise(duration, 0.1, noise_seed));
            return json{{"audio_path", out}, {"duration_s", duration}};
        }
        case AdapterKind::vocal_separate: {
            std::string in = payload.at("audio_path").get<std::string>();
            std::string out = payload.at("output_path").get<std::string>();
            write_wav(out, read_wav(in));  // identity pass-through
            return json{{"audio_path", out}};
        }
        case AdapterKind::ocr: {
            std::string name = fs::path(payload.at("image_path").get<std::string>())
                                   .filename()
                                   .string();
            json regions = json::array();
            if (lower(name).find("_text") != std::string::npos) {
                regions.push_back(
                    {{"text", "SAMPLE"}, {"confidence", 0.99}, {"area_frac", 0.01}});
            }
            return json{{"regions", regions}};
        }
    }
    fail(errc::adapter, fmt::format("mock cannot handle task {}", task));
}

} // namespace trailforge
