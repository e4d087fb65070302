/* trailforge.h — public C API of the trailforge engine.
 *
 * The library is C++ inside; this surface is plain C: opaque handles,
 * integer status codes, and caller-freed strings. Status codes match the
 * CLI exit codes so bindings can pass them straight through.
 */
#ifndef TRAILFORGE_H
#define TRAILFORGE_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#define TF_API __attribute__((visibility("default")))

typedef enum tf_status {
    TF_OK = 0,
    TF_ERR = 1,          /* unclassified failure */
    TF_ERR_CONFIG = 2,   /* bad config / invariant violation */
    TF_ERR_ADAPTER = 3,  /* adapter unreachable or misbehaving */
    TF_ERR_PHASE = 4,    /* a pipeline phase failed (see tf_pipeline_failed_phase) */
} tf_status;

TF_API const char* tf_version(void);

/* All char** outputs are heap strings owned by the caller. */
TF_API void tf_string_free(char* s);

/* Probe a media file via the configured engine ($TRAILFORGE_MEDIA_ENGINE or
 * ffmpeg on PATH). On success *json_out holds a MediaInfo JSON document. On
 * failure *json_out (when non-NULL) holds the error message. */
TF_API tf_status tf_probe_media(const char* media_path, char** json_out);

/* Aggregate a ratings CSV. *text_out gets the mean/median/best tables,
 * *json_out the structured report; either may be NULL. */
TF_API tf_status tf_eval_ratings(const char* csv_path, char** text_out, char** json_out);

/* ---- pipeline ---- */

typedef struct tf_pipeline tf_pipeline;

/* Loads the config and prepares the project rooted at the config file's
 * directory. Returns NULL on error; *err_out (when non-NULL) carries the
 * message. */
TF_API tf_pipeline* tf_pipeline_new(const char* config_path, const char* adapters_manifest_path,
                                    char** err_out);
TF_API void tf_pipeline_free(tf_pipeline* p);

TF_API tf_status tf_pipeline_set_phase_range(tf_pipeline* p, int from_phase, int to_phase);
TF_API tf_status tf_pipeline_set_seed(tf_pipeline* p, long long seed);
/* flags: "allow_missing_music" */
TF_API tf_status tf_pipeline_set_flag(tf_pipeline* p, const char* name, int value);

TF_API tf_status tf_pipeline_run(tf_pipeline* p);

/* Message of the last failed tf_pipeline_* call on this handle. Owned by
 * the handle; valid until the next call or free. */
TF_API const char* tf_pipeline_last_error(const tf_pipeline* p);
/* Phase id of the last TF_ERR_PHASE failure, -1 otherwise. */
TF_API int tf_pipeline_failed_phase(const tf_pipeline* p);

/* After a successful run: JSON summary (phases, artifacts, trailer path,
 * warnings). */
TF_API tf_status tf_pipeline_summary_json(const tf_pipeline* p, char** json_out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* TRAILFORGE_H */
