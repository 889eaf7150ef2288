#ifndef EVATRAP_EVATRAP_H
#define EVATRAP_EVATRAP_H

/* C interface to the trap engine. Every call returns a status code; on
 * failure evatrap_last_error() holds a message for the calling thread.
 * Strings handed out through char** must be released with
 * evatrap_free_string. */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define EVATRAP_API __declspec(dllexport)
#else
#define EVATRAP_API __attribute__((visibility("default")))
#endif

typedef enum evatrap_status {
    EVATRAP_OK = 0,
    EVATRAP_ERR_INVALID_ARGUMENT = 1,
    EVATRAP_ERR_CONFIG = 2,
    EVATRAP_ERR_PHYSICS = 3,
    EVATRAP_ERR_IO = 4,
    EVATRAP_ERR_NOT_FOUND = 5,
    EVATRAP_ERR_INTERNAL = 6
} evatrap_status;

/* A loaded config: fields solved or read, polarizabilities and C3 done. */
typedef struct evatrap_model evatrap_model;
/* Potentials (and optionally eigenvectors) at one power setting. Refers to
 * its model, so free it before the model. */
typedef struct evatrap_result evatrap_result;

EVATRAP_API const char* evatrap_version(void);
EVATRAP_API const char* evatrap_last_error(void);
EVATRAP_API const char* evatrap_status_name(evatrap_status status);
EVATRAP_API void evatrap_free_string(char* s);

/* data_dir may be NULL (environment / built-in default). */
EVATRAP_API evatrap_status evatrap_model_load(const char* config_path, const char* data_dir, evatrap_model** out);
/* base_dir resolves relative paths inside the document; may be NULL. */
EVATRAP_API evatrap_status evatrap_model_parse(const char* config_json, const char* base_dir, const char* data_dir,
                                               evatrap_model** out);
EVATRAP_API void evatrap_model_free(evatrap_model* model);

/* JSON: hash, grid axes (m), levels, sliders (name, default_W, max_W),
 * mask, warnings. */
EVATRAP_API evatrap_status evatrap_model_info(const evatrap_model* model, char** json_out);
EVATRAP_API size_t evatrap_model_slider_count(const evatrap_model* model);

/* slider_W: one power per slider in evatrap_model_info order, or NULL with
 * count 0 for the configured powers. threads 0 means all cores. */
EVATRAP_API evatrap_status evatrap_model_compute(const evatrap_model* model, const double* slider_W, size_t count,
                                                 unsigned threads, int eigenvectors, evatrap_result** out);
EVATRAP_API void evatrap_result_free(evatrap_result* result);

EVATRAP_API size_t evatrap_result_point_count(const evatrap_result* result);
/* Trap properties of every sheet of every level (the CLI summary). */
EVATRAP_API evatrap_status evatrap_result_summary(const evatrap_result* result, char** json_out);
/* One sheet in mK, NaN where masked. n must equal the point count. */
EVATRAP_API evatrap_status evatrap_result_sheet(const evatrap_result* result, size_t level, int sheet,
                                                double* out_mK, size_t n);
EVATRAP_API evatrap_status evatrap_result_mask(const evatrap_result* result, unsigned char* out, size_t n);
/* JSON: degenerate flag and (m_F, weight) pairs. Uses stored eigenvectors
 * when computed, else recomputes the point from the model. */
EVATRAP_API evatrap_status evatrap_result_decomposition(const evatrap_result* result, size_t level, size_t point,
                                                        int sheet, char** json_out);
/* Summary, base64 float64-LE sheets in mK, base64 mask, and the
 * decomposition of each sheet at its own minimum. */
EVATRAP_API evatrap_status evatrap_result_payload(const evatrap_result* result, char** json_out);

/* One-shot commands. options_json may be NULL; see the README for keys. */
EVATRAP_API evatrap_status evatrap_simulate(const char* config_path, const char* options_json, char** report_json);
EVATRAP_API evatrap_status evatrap_scan(const char* config_path, const char* spec_path, const char* options_json,
                                        char** report_json);
EVATRAP_API evatrap_status evatrap_solve_nanofiber(const char* params_json, const char* out_dir, char** report_json);
EVATRAP_API evatrap_status evatrap_inspect_field(const char* dir, char** report_json);

#ifdef __cplusplus
}
#endif

#endif
