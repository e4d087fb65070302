// trailforge CLI: thin shell over the C API in trailforge.h.

#include <trailforge.h>

#include <CLI11.hpp>

#include <cstdio>
#include <memory>
#include <string>

namespace {

struct StringGuard {
    char* s = nullptr;
    ~StringGuard() { tf_string_free(s); }
};

int run_cmd(const std::string& config, const std::string& adapters, int from_phase, int to_phase,
            long long seed, bool seed_set, bool allow_missing_music) {
    char* err = nullptr;
    tf_pipeline* p = tf_pipeline_new(config.c_str(), adapters.c_str(), &err);
    if (!p) {
        fprintf(stderr, "error: %s\n", err ? err : "cannot create pipeline");
        tf_string_free(err);
        return TF_ERR_CONFIG;
    }
    std::unique_ptr<tf_pipeline, decltype(&tf_pipeline_free)> guard(p, tf_pipeline_free);

    if (tf_pipeline_set_phase_range(p, from_phase, to_phase) != TF_OK) {
        fprintf(stderr, "error: %s\n", tf_pipeline_last_error(p));
        return TF_ERR_CONFIG;
    }
    if (seed_set) tf_pipeline_set_seed(p, seed);
    if (allow_missing_music) tf_pipeline_set_flag(p, "allow_missing_music", 1);

    tf_status status = tf_pipeline_run(p);
    if (status != TF_OK) {
        fprintf(stderr, "error: %s\n", tf_pipeline_last_error(p));
        int phase = tf_pipeline_failed_phase(p);
        if (phase >= 0) fprintf(stderr, "failed phase: %d\n", phase);
        return status;
    }

    StringGuard summary;
    if (tf_pipeline_summary_json(p, &summary.s) == TF_OK && summary.s)
        printf("%s\n", summary.s);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"trailforge - automated movie trailer pipeline"};
    app.require_subcommand(1);

    // run
    auto* run = app.add_subcommand("run", "Run the pipeline (phases 0-11)");
    std::string config_path, adapters_path;
    int from_phase = 0, to_phase = 11;
    long long seed = 0;
    bool allow_missing_music = false;
    run->add_option("--config", config_path, "Project config JSON")->required();
    run->add_option("--adapters", adapters_path, "Adapters manifest JSON")->required();
    run->add_option("--from-phase", from_phase, "First phase to execute (0-11)");
    run->add_option("--to-phase", to_phase, "Last phase to execute (0-11)");
    auto* seed_opt = run->add_option("--seed", seed, "Override the config seed");
    run->add_flag("--allow-missing-music", allow_missing_music,
                  "Render without music if the music phase produced nothing");

    // eval
    auto* eval = app.add_subcommand("eval", "Aggregate a ratings CSV");
    std::string ratings_path, eval_json_out;
    eval->add_option("--ratings", ratings_path, "CSV: participant,movie,method,...")->required();
    eval->add_option("--json", eval_json_out, "Also write the JSON report to this path");

    // probe
    auto* probe = app.add_subcommand("probe", "Print media info as JSON");
    std::string media_path;
    probe->add_option("media", media_path, "Media file")->required();

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) {
        return run_cmd(config_path, adapters_path, from_phase, to_phase, seed,
                       seed_opt->count() > 0, allow_missing_music);
    }
    if (eval->parsed()) {
        StringGuard text, json;
        tf_status status = tf_eval_ratings(ratings_path.c_str(), &text.s, &json.s);
        if (status != TF_OK) {
            fprintf(stderr, "error: %s\n", text.s ? text.s : "eval failed");
            return status;
        }
        printf("%s", text.s);
        if (!eval_json_out.empty() && json.s) {
            FILE* f = fopen(eval_json_out.c_str(), "w");
            if (!f) {
                fprintf(stderr, "error: cannot write %s\n", eval_json_out.c_str());
                return TF_ERR;
            }
            fprintf(f, "%s\n", json.s);
            fclose(f);
        }
        return 0;
    }
    if (probe->parsed()) {
        StringGuard json;
        tf_status status = tf_probe_media(media_path.c_str(), &json.s);
        if (status != TF_OK) {
            fprintf(stderr, "error: %s\n", json.s ? json.s : "probe failed");
            return status;
        }
        printf("%s\n", json.s);
        return 0;
    }
    return 0;
}
