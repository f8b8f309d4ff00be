#ifndef DSAEEM_H
#define DSAEEM_H

#include <stddef.h>

#if defined(_WIN32)
#define DSAEEM_API __declspec(dllexport)
#else
#define DSAEEM_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes double as CLI exit codes. */
typedef enum {
    DSAEEM_OK = 0,
    DSAEEM_ERR_CONFIG = 1,
    DSAEEM_ERR_DATA = 2,
    DSAEEM_ERR_NUMERICAL = 3
} dsaeem_status;

typedef struct dsaeem_config dsaeem_config;
typedef struct dsaeem_model dsaeem_model;

/* Called once per progress line; may be NULL. */
typedef void (*dsaeem_log_fn)(const char* line, void* user);

DSAEEM_API const char* dsaeem_version(void);

/* Message for the last failure on the calling thread; "" when none. */
DSAEEM_API const char* dsaeem_last_error(void);

DSAEEM_API dsaeem_status dsaeem_config_load(const char* path, dsaeem_config** out);
DSAEEM_API void dsaeem_config_free(dsaeem_config* cfg);
DSAEEM_API dsaeem_status dsaeem_config_set_output_dir(dsaeem_config* cfg, const char* dir);
DSAEEM_API dsaeem_status dsaeem_config_set_threads(dsaeem_config* cfg, int threads);
/* Writes the resolved config (every default spelled out) as JSON. */
DSAEEM_API dsaeem_status dsaeem_config_echo(const dsaeem_config* cfg, const char* path);

/* Parses and checks a config file without running anything. */
DSAEEM_API dsaeem_status dsaeem_validate_config(const char* path);

/* Full pipeline; mean_accuracy may be NULL. */
DSAEEM_API dsaeem_status dsaeem_run(const dsaeem_config* cfg, dsaeem_log_fn log, void* user,
                                    double* mean_accuracy);

/* Comma-separated baseline names (svm_raw, l1_only, wlpdp_only, fssae_only)
   or "all"; the full pipeline always runs alongside them. */
DSAEEM_API dsaeem_status dsaeem_baseline(const dsaeem_config* cfg, const char* baselines,
                                         dsaeem_log_fn log, void* user);

/* Axis spec such as "rho=0.02,0.06,0.1" or "lambda=1e-5,1e-4;beta=1,2". */
DSAEEM_API dsaeem_status dsaeem_sweep(const dsaeem_config* cfg, const char* axes,
                                      dsaeem_log_fn log, void* user);

DSAEEM_API dsaeem_status dsaeem_model_load(const char* path, dsaeem_model** out);
DSAEEM_API void dsaeem_model_free(dsaeem_model* model);
DSAEEM_API size_t dsaeem_model_input_dim(const dsaeem_model* model);

/* Row-major raw features, n x m; labels receives n class indices. */
DSAEEM_API dsaeem_status dsaeem_predict(const dsaeem_model* model, const double* rows, size_t n,
                                        size_t m, int* labels);

/* Scores a CSV laid out like the training data (label column optional) and
   writes row,predicted[,actual]. accuracy may be NULL; it is set to -1 when
   the input has no labels. */
DSAEEM_API dsaeem_status dsaeem_predict_csv(const dsaeem_model* model, const char* csv_in,
                                            const char* csv_out, double* accuracy);

#ifdef __cplusplus
}
#endif

#endif
