#ifndef UQX_H
#define UQX_H

/*
 * C interface for the lesion uncertainty explanation library.
 *
 * All functions returning uqx_status report failures through the return
 * code and leave a human-readable message in uqx_last_error() (thread
 * local). Strings handed out through char** parameters are owned by the
 * caller and must be released with uqx_string_free().
 */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum uqx_status {
    UQX_OK = 0,
    UQX_ERROR_INPUT = 2,
    UQX_ERROR_NUMERIC = 3,
    UQX_ERROR_INTERNAL = 4
} uqx_status;

const char* uqx_version(void);

/* Message from the most recent failing call on this thread. */
const char* uqx_last_error(void);

void uqx_string_free(char* s);

/* ---- volumes ------------------------------------------------------- */

typedef struct uqx_volume_st uqx_volume_t;

/* Accepts .nii files or raw bundle bases (<base>.json + <base>.raw). */
uqx_status uqx_volume_open(const char* path, uqx_volume_t** out);
uqx_status uqx_volume_dims(const uqx_volume_t* vol, int64_t* nx, int64_t* ny, int64_t* nz);
uqx_status uqx_volume_spacing(const uqx_volume_t* vol, double* sx, double* sy, double* sz);
uqx_status uqx_volume_save(const uqx_volume_t* vol, const char* bundle_base);
void uqx_volume_free(uqx_volume_t* vol);

/* ---- feature tables ------------------------------------------------ */

typedef struct uqx_table_st uqx_table_t;

uqx_status uqx_table_read_csv(const char* path, uqx_table_t** out);
uqx_status uqx_table_write_csv(const uqx_table_t* table, const char* path);
uqx_status uqx_table_shape(const uqx_table_t* table, int64_t* n_rows, int64_t* n_cols);

/* kNN imputation, low-variance column removal, per-column z-scoring. */
uqx_status uqx_table_preprocess(const uqx_table_t* table, int impute_k,
                                double variance_threshold, uqx_table_t** out);
void uqx_table_free(uqx_table_t* table);

/* ---- reports (JSON / CSV text) -------------------------------------- */

/* Segmentation quality of a binary prediction against ground truth:
 * overlap scores, lesion detection counts and per-lesion adjusted IoU. */
uqx_status uqx_metrics_report(const char* pred_path, const char* gt_path, double r,
                              char** out_json);

/* Per-lesion uncertainty table (lesion_id,voxels,lsu) for an ensemble of
 * probability volumes thresholded at tau. */
uqx_status uqx_lsu_table(const char* const* member_paths, size_t n_members, double tau,
                         char** out_csv);

/* Full feature table for every predicted lesion in a cohort manifest. */
uqx_status uqx_extract_features(const char* manifest_path, double tau, int threads,
                                char** out_csv);

/* Fits the latent novelty model on the train table and appends the two
 * novelty columns to the target table. q = 0 picks the latent dimension
 * from the explained-variance fraction. */
uqx_status uqx_novelty_augment(const char* train_csv, const char* target_csv,
                               double variance_explained, int q, char** out_csv);

/* Cross-validated importance report for one feature table. config_path may
 * be NULL for defaults (elastic net, uncertainty weights, seeds 0..9). */
uqx_status uqx_fit_report(const char* table_csv, const char* config_path, char** out_json);

/* ---- cohort synthesis and pipeline ---------------------------------- */

/* Generates a synthetic cohort described by a spec JSON into out_dir.
 * seed_override, when non-NULL, replaces the seed from the spec. */
uqx_status uqx_generate_cohort(const char* spec_json_path, const char* out_dir, int threads,
                               const int64_t* seed_override);

/* Runs the full explanation pipeline for a run config. transfer_only skips
 * the per-role importance artifacts. out_empty (optional) is set to 1 when
 * some role produced no lesions and fitting was skipped. */
uqx_status uqx_run_pipeline(const char* config_path, int transfer_only, int* out_empty);

#ifdef __cplusplus
}
#endif

#endif /* UQX_H */
