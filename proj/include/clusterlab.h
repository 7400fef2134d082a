#ifndef CLUSTERLAB_H
#define CLUSTERLAB_H

/* C interface to the clustering laboratory: dataset handling, mixture
 * fitting (EM and its randomized/emulated variants), benchmarking and the
 * runtime cost report. All functions return clab_status; on failure a
 * thread-local message is available via clab_last_error(). Strings returned
 * through out-parameters are heap-allocated JSON documents; release them
 * with clab_string_free(). */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum clab_status {
  CLAB_OK = 0,
  CLAB_ERROR_CONFIG = 2,  /* invalid configuration or malformed input */
  CLAB_ERROR_NUMERIC = 3  /* numeric failure during computation */
} clab_status;

typedef struct clab_dataset clab_dataset;

const char* clab_version(void);

/* Message for the last failure on this thread; empty string if none. The
 * pointer stays valid until the next failing call on the same thread. */
const char* clab_last_error(void);

void clab_string_free(char* s);

/* example: 1 or 2 (the two built-in synthetic mixtures). */
clab_status clab_dataset_generate(int example, int n, uint64_t seed,
                                  clab_dataset** out);
clab_status clab_dataset_load_csv(const char* path, clab_dataset** out);
clab_status clab_dataset_save_csv(const clab_dataset* data, const char* path);
int clab_dataset_size(const clab_dataset* data);
int clab_dataset_dim(const clab_dataset* data);
int clab_dataset_has_labels(const clab_dataset* data);
void clab_dataset_free(clab_dataset* data);

/* algorithm: "em", "delta-em", "kmeans", "delta-kmeans" or "qem-emulation".
 * config_json: algorithm configuration object (may be "{}" for defaults).
 * On success *result_json holds the fit result document. */
clab_status clab_fit(const clab_dataset* data, const char* algorithm,
                     const char* config_json, char** result_json);

/* Multi-trial benchmark. data may be NULL, in which case the dataset named
 * by the config's "example" field is generated internally. */
clab_status clab_bench_run(const clab_dataset* data, const char* config_json,
                           char** result_json);

/* Benchmark repeated across delta values; emits a (delta, best success
 * rate) table. data may be NULL as for clab_bench_run. */
clab_status clab_sweep_run(const clab_dataset* data, const char* config_json,
                           const double* deltas, int n_deltas, char** result_json);

/* Runtime cost report for the emulated algorithm on this dataset. */
clab_status clab_cost_report(const clab_dataset* data, int k, double delta,
                             char** report_json);

/* Validates a mixture-parameter JSON document; *violations_json receives an
 * array of human-readable violations (empty array when valid). */
clab_status clab_params_validate(const char* params_json, char** violations_json);

/* Scatter plot of a 2-D dataset with optional fitted mixture ellipses. */
clab_status clab_scatter_svg(const clab_dataset* data, const char* params_json,
                             const char* path);

#ifdef __cplusplus
}
#endif

#endif /* CLUSTERLAB_H */
