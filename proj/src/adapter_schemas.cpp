#include "trailforge/adapters.hpp"

#include "trailforge/errors.hpp"

#include <fmt/core.h>

namespace trailforge {

namespace {

[[noreturn]] void bad(const std::string& task, const std::string& field, const std::string& why) {
    fail(errc::schema, fmt::format("task {}: field '{}' {}", task, field, why));
}

void want_string(const json& j, const std::string& task, const std::string& field) {
    if (!j.contains(field)) bad(task, field, "is missing");
    if (!j.at(field).is_string()) bad(task, field, "must be a string");
}

void want_int(const json& j, const std::string& task, const std::string& field, int min = 0) {
    if (!j.contains(field)) bad(task, field, "is missing");
    if (!j.at(field).is_number_integer()) bad(task, field, "must be an integer");
    if (j.at(field).get<int>() < min) bad(task, field, fmt::format("must be >= {}", min));
}

void want_number(const json& j, const std::string& task, const std::string& field) {
    if (!j.contains(field)) bad(task, field, "is missing");
    if (!j.at(field).is_number()) bad(task, field, "must be a number");
}

void want_string_array(const json& j, const std::string& task, const std::string& field,
                       size_t min_size = 0) {
    if (!j.contains(field)) bad(task, field, "is missing");
    if (!j.at(field).is_array()) bad(task, field, "must be an array");
    if (j.at(field).size() < min_size)
        bad(task, field, fmt::format("must have at least {} entries", min_size));
    for (const auto& item : j.at(field))
        if (!item.is_string()) bad(task, field, "must contain only strings");
}

void want_number_array(const json& j, const std::string& task, const std::string& field,
                       size_t exact_size = 0) {
    if (!j.contains(field)) bad(task, field, "is missing");
    if (!j.at(field).is_array()) bad(task, field, "must be an array");
    if (exact_size > 0 && j.at(field).size() != exact_size)
        bad(task, field, fmt::format("must have exactly {} entries", exact_size));
    for (const auto& item : j.at(field))
        if (!item.is_number()) bad(task, field, "must contain only numbers");
}

void want_interval_array(const json& j, const std::string& task, const std::string& field,
                         bool with_text) {
    if (!j.contains(field)) bad(task, field, "is missing");
    if (!j.at(field).is_array()) bad(task, field, "must be an array");
    for (const auto& item : j.at(field)) {
        if (!item.is_object()) bad(task, field, "entries must be objects");
        if (!item.contains("start_s") || !item.at("start_s").is_number())
            bad(task, field + ".start_s", "must be a number");
        if (!item.contains("end_s") || !item.at("end_s").is_number())
            bad(task, field + ".end_s", "must be a number");
        if (with_text && (!item.contains("text") || !item.at("text").is_string()))
            bad(task, field + ".text", "must be a string");
    }
}

} // namespace

void validate_request(AdapterKind kind, const std::string& task, const json& payload) {
    if (!payload.is_object()) bad(task, "(payload)", "must be an object");
    switch (kind) {
        case AdapterKind::llm:
            if (task == "llm/split_synopsis") {
                want_string(payload, task, "synopsis");
                want_int(payload, task, "n_target", 1);
            } else if (task == "llm/select_quotes") {
                want_string_array(payload, task, "quotes", 1);
                want_int(payload, task, "n_target", 1);
            } else if (task == "llm/keywords") {
                want_string(payload, task, "subplot");
            } else if (task == "llm/voiceover") {
                want_string(payload, task, "title");
                want_string(payload, task, "synopsis");
                want_string_array(payload, task, "directors");
                want_string(payload, task, "release_date");
                want_int(payload, task, "n_phrases", 1);
            } else if (task == "llm/music_brief") {
                want_string(payload, task, "title");
                want_string(payload, task, "synopsis");
                want_string_array(payload, task, "genres");
            } else {
                bad(task, "(task)", "is not an llm task");
            }
            break;
        case AdapterKind::text_embed:
            if (task != "embed_text") bad(task, "(task)", "is not a text-embed task");
            want_string(payload, task, "text");
            break;
        case AdapterKind::image_embed:
            if (task != "embed_image") bad(task, "(task)", "is not an image-embed task");
            want_string(payload, task, "image_path");
            break;
        case AdapterKind::asr:
            if (task != "transcribe") bad(task, "(task)", "is not an asr task");
            want_string(payload, task, "audio_path");
            break;
        case AdapterKind::vad:
            if (task != "detect_speech") bad(task, "(task)", "is not a vad task");
            want_string(payload, task, "audio_path");
            break;
        case AdapterKind::tts:
            if (task != "synthesize") bad(task, "(task)", "is not a tts task");
            want_string(payload, task, "text");
            want_string(payload, task, "voice_id");
            want_string(payload, task, "output_path");
            break;
        case AdapterKind::music:
            if (task != "generate") bad(task, "(task)", "is not a music task");
            want_string(payload, task, "brief");
            want_number(payload, task, "duration_s");
            want_string(payload, task, "output_path");
            break;
        case AdapterKind::vocal_separate:
            if (task != "separate") bad(task, "(task)", "is not a vocal-separate task");
            want_string(payload, task, "audio_path");
            want_string(payload, task, "output_path");
            break;
        case AdapterKind::ocr:
            if (task != "detect_text") bad(task, "(task)", "is not an ocr task");
            want_string(payload, task, "image_path");
            break;
    }
}

void validate_response(AdapterKind kind, const std::string& task, const json& payload,
                       const Capabilities& caps) {
    if (!payload.is_object()) bad(task, "(payload)", "must be an object");
    switch (kind) {
        case AdapterKind::llm:
            if (task == "llm/split_synopsis") want_string_array(payload, task, "subplots", 1);
            else if (task == "llm/select_quotes") want_string_array(payload, task, "selected");
            else if (task == "llm/keywords") want_string_array(payload, task, "keywords");
            else if (task == "llm/voiceover") want_string_array(payload, task, "phrases", 1);
            else if (task == "llm/music_brief") want_string(payload, task, "brief");
            break;
        case AdapterKind::text_embed:
        case AdapterKind::image_embed:
            want_number_array(payload, task, "embedding",
                              caps.embedding_dim > 0 ? static_cast<size_t>(caps.embedding_dim)
                                                     : 0);
            break;
        case AdapterKind::asr:
            want_interval_array(payload, task, "segments", /*with_text=*/true);
            break;
        case AdapterKind::vad:
            want_interval_array(payload, task, "speech", /*with_text=*/false);
            break;
        case AdapterKind::tts:
            want_string(payload, task, "audio_path");
            want_number(payload, task, "duration_s");
            break;
        case AdapterKind::music:
            want_string(payload, task, "audio_path");
            want_number(payload, task, "duration_s");
            break;
        case AdapterKind::vocal_separate:
            want_string(payload, task, "audio_path");
            break;
        case AdapterKind::ocr:
            if (!payload.contains("regions") || !payload.at("regions").is_array())
                bad(task, "regions", "must be an array");
            for (const auto& r : payload.at("regions")) {
                if (!r.is_object()) bad(task, "regions", "entries must be objects");
                if (!r.contains("confidence") || !r.at("confidence").is_number())
                    bad(task, "regions.confidence", "must be a number");
                if (!r.contains("area_frac") || !r.at("area_frac").is_number())
                    bad(task, "regions.area_frac", "must be a number");
            }
            break;
    }
}

} // namespace trailforge
