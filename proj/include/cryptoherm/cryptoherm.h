#ifndef CRYPTOHERM_H
#define CRYPTOHERM_H

/* C interface of the cryptoherm shared library. Every function that can fail
 * returns a chq_status; the message of the last failure on the calling thread
 * is available from chq_last_error(). Handles are opaque and owned by the
 * caller once returned. */

#include <stddef.h>

#if defined(_WIN32)
#define CHQ_API __declspec(dllexport)
#else
#define CHQ_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum chq_status {
  CHQ_OK = 0,
  CHQ_INVALID_ARGUMENT = 1,
  CHQ_NON_CONVERGENCE = 2,
  CHQ_DEFECTIVE_MATRIX = 3,
  CHQ_SINGULAR_WEIGHT = 4,
  CHQ_NOT_HERMITIAN = 5,
  CHQ_NOT_POSITIVE_DEFINITE = 6,
  CHQ_COMPLEX_SPECTRUM = 7,
  CHQ_HERMITIZATION_FAILED = 8,
  CHQ_CERTIFICATION_FAILED = 9,
  CHQ_ILL_CONDITIONED_OMEGA = 10,
  CHQ_WINDOW_VIOLATION = 11,
  CHQ_STEP_SIZE_UNDERFLOW = 12,
  CHQ_GRID_MISMATCH = 13,
  CHQ_DEGENERATE_PATH = 14,
  CHQ_GRID_TOO_COARSE = 15,
  CHQ_SINGULAR_T_MAP = 16,
  CHQ_CENTER_OUT_OF_RANGE = 17,
  CHQ_BAND_EDGE = 18,
  CHQ_SUPPORT_TOUCHES_LEAD = 19,
  CHQ_CONFIG_ERROR = 20,
  CHQ_IO_ERROR = 21,
  CHQ_INTERNAL = 99
} chq_status;

typedef enum chq_format { CHQ_FORMAT_CONFIG = -1, CHQ_FORMAT_CSV = 0, CHQ_FORMAT_JSON = 1 } chq_format;

typedef struct chq_matrix chq_matrix;
typedef struct chq_experiment chq_experiment;
typedef struct chq_result chq_result;

CHQ_API const char* chq_version(void);
CHQ_API const char* chq_status_name(int status);
/* Message of the last failed call on this thread ("" if none). */
CHQ_API const char* chq_last_error(void);

/* Dense complex matrices, zero-initialized. */
CHQ_API int chq_matrix_create(size_t rows, size_t cols, chq_matrix** out);
CHQ_API void chq_matrix_destroy(chq_matrix* m);
CHQ_API size_t chq_matrix_rows(const chq_matrix* m);
CHQ_API size_t chq_matrix_cols(const chq_matrix* m);
CHQ_API int chq_matrix_set(chq_matrix* m, size_t row, size_t col, double re, double im);
CHQ_API int chq_matrix_get(const chq_matrix* m, size_t row, size_t col, double* re, double* im);

/* Eigenvalues sorted by (Re, Im); re/im must hold rows(m) entries. */
CHQ_API int chq_eig(const chq_matrix* m, double tol, double* re, double* im);

/* Metric Theta = sum kappa_n l_n l_n^+ (kappa may be NULL for all ones).
 * residual (nullable) receives the quasi-Hermiticity residual. */
CHQ_API int chq_build_metric(const chq_matrix* h, const double* kappa, size_t kappa_len, double tol,
                             chq_matrix** theta, double* residual);

/* Omega H Omega^-1 with Omega the principal root of theta. */
CHQ_API int chq_hermitize(const chq_matrix* h, const chq_matrix* theta, double tol, chq_matrix** out);

/* Experiment configs (YAML). */
CHQ_API int chq_experiment_load(const char* path, chq_experiment** out);
CHQ_API int chq_experiment_parse(const char* text, chq_experiment** out);
CHQ_API void chq_experiment_destroy(chq_experiment* e);
CHQ_API const char* chq_experiment_id(const chq_experiment* e);
CHQ_API int chq_experiment_run(const chq_experiment* e, chq_result** out);

CHQ_API void chq_result_destroy(chq_result* r);
/* 1 when every certificate passed, 0 otherwise. */
CHQ_API int chq_result_passed(const chq_result* r);
CHQ_API size_t chq_result_certificate_count(const chq_result* r);
/* Borrowed pointers stay valid while r lives. Any output may be NULL. */
CHQ_API int chq_result_certificate(const chq_result* r, size_t index, const char** name, double* value,
                                   const char** relation, double* tolerance, int* passed);
/* Writes the result below out_dir; format CHQ_FORMAT_CONFIG uses the
 * config's own choice. */
CHQ_API int chq_result_write(const chq_result* r, const char* out_dir, int format);

CHQ_API size_t chq_model_count(void);
CHQ_API const char* chq_model_label(size_t index);
CHQ_API const char* chq_model_description(size_t index);

#ifdef __cplusplus
}
#endif

#endif
