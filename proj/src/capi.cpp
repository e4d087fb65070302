#include "trailforge.h"

#include "trailforge/errors.hpp"
#include "trailforge/evalkit.hpp"
#include "trailforge/jsonio.hpp"
#include "trailforge/mediaio.hpp"
#include "trailforge/pipeline.hpp"

#include <cstring>
#include <string>

namespace {

using namespace trailforge;

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(malloc(s.size() + 1));
    if (out) memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

tf_status status_of(const Error& e) {
    switch (e.code()) {
        case errc::config: return TF_ERR_CONFIG;
        case errc::adapter:
        case errc::schema: return TF_ERR_ADAPTER;
        case errc::phase: return TF_ERR_PHASE;
        default: return TF_ERR;
    }
}

} // namespace

struct tf_pipeline {
    std::string config_path;
    std::string adapters_path;
    trailforge::RunOptions options;
    std::string last_error;
    int failed_phase = -1;
    trailforge::json summary;
    bool ran = false;
};

extern "C" {

const char* tf_version(void) { return "0.1.0"; }

void tf_string_free(char* s) { free(s); }

tf_status tf_probe_media(const char* media_path, char** json_out) {
    if (json_out) *json_out = nullptr;
    if (!media_path) return TF_ERR_CONFIG;
    try {
        MediaEngine engine = MediaEngine::resolve();
        MediaInfo info = engine.probe(media_path);
        json j;
        j["duration_s"] = info.duration_s;
        j["fps"] = info.fps;
        j["width"] = info.width;
        j["height"] = info.height;
        j["has_audio"] = info.has_audio;
        j["sample_rate_hz"] = info.sample_rate_hz ? json(*info.sample_rate_hz) : json(nullptr);
        if (json_out) *json_out = dup_string(j.dump(2));
        return TF_OK;
    } catch (const Error& e) {
        if (json_out) *json_out = dup_string(e.what());
        return status_of(e);
    } catch (const std::exception& e) {
        if (json_out) *json_out = dup_string(e.what());
        return TF_ERR;
    }
}

tf_status tf_eval_ratings(const char* csv_path, char** text_out, char** json_out) {
    if (text_out) *text_out = nullptr;
    if (json_out) *json_out = nullptr;
    if (!csv_path) return TF_ERR_CONFIG;
    try {
        auto records = load_ratings_csv(csv_path);
        EvalReport report = aggregate(records);
        if (text_out) *text_out = dup_string(report.render_text());
        if (json_out) *json_out = dup_string(report.to_json().dump(2));
        return TF_OK;
    } catch (const Error& e) {
        if (text_out) *text_out = dup_string(e.what());
        return status_of(e);
    } catch (const std::exception& e) {
        if (text_out) *text_out = dup_string(e.what());
        return TF_ERR;
    }
}

tf_pipeline* tf_pipeline_new(const char* config_path, const char* adapters_manifest_path,
                             char** err_out) {
    if (err_out) *err_out = nullptr;
    if (!config_path || !adapters_manifest_path) {
        if (err_out) *err_out = dup_string("config and adapters paths are required");
        return nullptr;
    }
    // Config validity is checked on run(); here we only stage the paths so
    // the handle can report structured errors.
    auto* p = new tf_pipeline;
    p->config_path = config_path;
    p->adapters_path = adapters_manifest_path;
    return p;
}

void tf_pipeline_free(tf_pipeline* p) { delete p; }

tf_status tf_pipeline_set_phase_range(tf_pipeline* p, int from_phase, int to_phase) {
    if (!p) return TF_ERR_CONFIG;
    if (from_phase < trailforge::kFirstPhase || to_phase > trailforge::kLastPhase ||
        from_phase > to_phase) {
        p->last_error = "invalid phase range";
        return TF_ERR_CONFIG;
    }
    p->options.from_phase = from_phase;
    p->options.to_phase = to_phase;
    return TF_OK;
}

tf_status tf_pipeline_set_seed(tf_pipeline* p, long long seed) {
    if (!p) return TF_ERR_CONFIG;
    p->options.seed = seed;
    return TF_OK;
}

tf_status tf_pipeline_set_flag(tf_pipeline* p, const char* name, int value) {
    if (!p || !name) return TF_ERR_CONFIG;
    if (strcmp(name, "allow_missing_music") == 0) {
        p->options.allow_missing_music = value != 0;
        return TF_OK;
    }
    p->last_error = std::string("unknown flag: ") + name;
    return TF_ERR_CONFIG;
}

tf_status tf_pipeline_run(tf_pipeline* p) {
    if (!p) return TF_ERR_CONFIG;
    p->failed_phase = -1;
    p->last_error.clear();
    try {
        Pipeline pipeline(p->config_path, p->adapters_path);
        RunSummary summary = pipeline.run(p->options);
        json j;
        j["first_phase"] = summary.first_phase;
        j["last_phase"] = summary.last_phase;
        j["trailer"] = summary.trailer.empty() ? json(nullptr) : json(summary.trailer.string());
        j["artifacts"] = summary.artifacts;
        j["warnings"] = summary.warnings;
        p->summary = j;
        p->ran = true;
        return TF_OK;
    } catch (const PhaseError& e) {
        p->last_error = e.what();
        p->failed_phase = e.phase();
        return TF_ERR_PHASE;
    } catch (const Error& e) {
        p->last_error = e.what();
        return status_of(e);
    } catch (const std::exception& e) {
        p->last_error = e.what();
        return TF_ERR;
    }
}

const char* tf_pipeline_last_error(const tf_pipeline* p) {
    return p ? p->last_error.c_str() : "";
}

int tf_pipeline_failed_phase(const tf_pipeline* p) { return p ? p->failed_phase : -1; }

tf_status tf_pipeline_summary_json(const tf_pipeline* p, char** json_out) {
    if (json_out) *json_out = nullptr;
    if (!p || !p->ran) return TF_ERR;
    if (json_out) *json_out = dup_string(p->summary.dump(2));
    return TF_OK;
}

} // extern "C"
