/* C interface to the position-dependent mass and velocity Dirac solver. */
#ifndef PDMDIRAC_H
#define PDMDIRAC_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

#if defined(_WIN32)
#define PDD_API __declspec(dllexport)
#else
#define PDD_API __attribute__((visibility("default")))
#endif

typedef enum pdd_status {
    PDD_OK = 0,
    PDD_ERR_INVALID_PARAMETER = 1,
    PDD_ERR_DOMAIN = 2,
    PDD_ERR_QUADRATURE = 3,
    PDD_ERR_ZETA_CROSSING = 4,
    PDD_ERR_APPROXIMATION_INVALID = 5,
    PDD_ERR_INSUFFICIENT_RESOLUTION = 6,
    PDD_ERR_NON_CONVERGENCE = 7,
    PDD_ERR_IMAGINARY_ENERGY = 8,
    PDD_ERR_SUB_GAP = 9,
    PDD_ERR_NON_NORMALIZABLE = 10,
    PDD_ERR_SINGULAR_NODE = 11,
    PDD_ERR_CONFIG = 12,
    PDD_ERR_IO = 13,
    PDD_ERR_INTERNAL = 99
} pdd_status;

typedef struct pdd_model pdd_model;
typedef struct pdd_spectrum pdd_spectrum;

/* Text of the last error raised on the calling thread ("" if none). */
PDD_API const char* pdd_last_error(void);
PDD_API const char* pdd_status_name(pdd_status status);

/* Builtin model by name (CoshSquare, Rational, PoschlTeller, LinearSingular,
   ConstantRest) with `count` key/value parameters. */
PDD_API pdd_status pdd_model_create(const char* name, const char* const* keys, const double* values, size_t count,
                                    pdd_model** out);
PDD_API void pdd_model_destroy(pdd_model* model);

/* Sets *is_constant and, when it is, *A = m v^2. */
PDD_API pdd_status pdd_model_constant_u(const pdd_model* model, double tol, int* is_constant, double* A);

/* Lowest `states` levels. mode is "auto", "exact", "approximate" or
   "constant-u"; intervals is the q-grid size (>= 64). */
PDD_API pdd_status pdd_solve(const pdd_model* model, const char* mode, size_t intervals, int states,
                             pdd_spectrum** out);
PDD_API size_t pdd_spectrum_size(const pdd_spectrum* spectrum);
PDD_API pdd_status pdd_spectrum_state(const pdd_spectrum* spectrum, size_t k, double* lambda, double* e_plus,
                                      double* e_minus, int* nodes, double* error_estimate);
PDD_API void pdd_spectrum_destroy(pdd_spectrum* spectrum);

/* Closed-form level n. as_published_s selects the printed Poschl-Teller
   exponent. *verified is 0 for formulas flagged as published only. */
PDD_API pdd_status pdd_analytic_energy(const char* model, int n, const char* const* keys, const double* values,
                                       size_t count, int as_published_s, double* e_plus, int* verified);

PDD_API double pdd_hermite(int n, double y);
PDD_API pdd_status pdd_hyp2f1_polynomial(int n, double b, double c, double z, double* out);

/* Runs a runner command (solve, scan, bic, report) on a config file.
   out_dir and mode may be NULL; states <= 0 keeps the config value.
   Returns the process exit status (0, 2, 3 or 4). */
PDD_API int pdd_runner_execute(const char* command, const char* config_path, const char* out_dir, int strict,
                               const char* mode, int states);

/* Accepted config keys, one per line. */
PDD_API const char* pdd_config_help(void);

#ifdef __cplusplus
}
#endif

#endif
