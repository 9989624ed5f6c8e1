#ifndef IDSYNTH_H
#define IDSYNTH_H

/* C interface to the synthetic identity-document toolkit. All functions
 * return ids_status (IDS_OK on success) unless noted; on failure the
 * thread-local message from ids_last_error() describes what went wrong.
 * Objects are opaque handles freed with their matching _free function. */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define IDS_API __declspec(dllexport)
#else
#define IDS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ids_status {
    IDS_OK = 0,
    IDS_ERR_INVALID_ARGUMENT = 1,
    IDS_ERR_IO = 2,
    IDS_ERR_BAD_INPUT = 3,
    IDS_ERR_INTERNAL = 4
} ids_status;

IDS_API const char* ids_version(void);

/* Message for the most recent failure on this thread; empty string if none. */
IDS_API const char* ids_last_error(void);

/* ---- template packs ---------------------------------------------------- */

typedef struct ids_pack ids_pack;

IDS_API ids_status ids_pack_load(const char* dir, ids_pack** out);
IDS_API void ids_pack_free(ids_pack* pack);
IDS_API const char* ids_pack_id(const ids_pack* pack);
IDS_API int ids_pack_field_count(const ids_pack* pack);
IDS_API const char* ids_pack_field_name(const ids_pack* pack, int index);

/* ---- portrait pools ---------------------------------------------------- */

typedef struct ids_portraits ids_portraits;

IDS_API ids_status ids_portraits_load(const char* dir, ids_portraits** out);
IDS_API void ids_portraits_free(ids_portraits* pool);
IDS_API int ids_portraits_total(const ids_portraits* pool);
IDS_API int ids_portraits_qualified(const ids_portraits* pool);
/* Counts by rejection reason: age, emotion, pose, multiple reasons. */
IDS_API ids_status ids_portraits_rejections(const ids_portraits* pool, int counts[4]);

/* ---- dataset generation ------------------------------------------------ */

typedef struct ids_job ids_job;

IDS_API ids_status ids_job_new(ids_job** out);
IDS_API void ids_job_free(ids_job* job);
IDS_API ids_status ids_job_set_pack(ids_job* job, const char* pack_dir);
IDS_API ids_status ids_job_set_portraits(ids_job* job, const char* portrait_dir);
IDS_API ids_status ids_job_set_out(ids_job* job, const char* out_dir);
IDS_API ids_status ids_job_set_seed(ids_job* job, uint64_t seed);
IDS_API ids_status ids_job_set_count(ids_job* job, int count);
IDS_API ids_status ids_job_set_threads(ids_job* job, int threads);
IDS_API ids_status ids_job_set_now(ids_job* job, const char* yyyy_mm_dd);
IDS_API ids_status ids_job_set_provider(ids_job* job, const char* provider);
IDS_API ids_status ids_job_set_pool_cache(ids_job* job, const char* dir);
IDS_API ids_status ids_job_set_params(ids_job* job, const char* params_json_path);
/* Comma-separated subset of:
 * face_morph,portrait_substitution,text_replacement,mixed,inpaint_rewrite,
 * crop_replace; empty string selects all six. */
IDS_API ids_status ids_job_set_fraud_types(ids_job* job, const char* csv);
/* "masking", "pixeldp", or "masking,pixeldp". */
IDS_API ids_status ids_job_set_privacy(ids_job* job, const char* csv);
IDS_API ids_status ids_job_set_epsilon(ids_job* job, double epsilon);
IDS_API ids_status ids_job_set_delta(ids_job* job, double delta);

IDS_API ids_status ids_job_run_generate(ids_job* job);
IDS_API ids_status ids_job_run_fraud(ids_job* job);
IDS_API ids_status ids_job_run_privacy(ids_job* job);

/* ---- overlay tuning ---------------------------------------------------- */

IDS_API ids_status ids_tune(const char* pack_dir, const char* portrait_dir,
                            const char* out_dir, uint64_t seed, int budget,
                            int threads);

/* ---- audits ------------------------------------------------------------ */

/* Writes <out_path> JSON report for the dataset under <dataset_dir>. */
IDS_API ids_status ids_audit(const char* dataset_dir, const char* out_path);

/* ---- scene composition ------------------------------------------------- */

IDS_API ids_status ids_compose(const char* card_png, const char* scene_png,
                               const char* scene_json, const char* out_png,
                               int pyramid_levels);

/* ---- bundled demo assets ---------------------------------------------- */

IDS_API ids_status ids_demo_pack(const char* out_dir, uint64_t seed);
IDS_API ids_status ids_demo_portraits(const char* out_dir, uint64_t seed, int count);
IDS_API ids_status ids_demo_scene(const char* out_dir, uint64_t seed);

#ifdef __cplusplus
}
#endif

#endif /* IDSYNTH_H */
