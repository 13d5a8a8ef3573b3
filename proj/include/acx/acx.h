/* C interface to the accuracy extrapolation library.
 *
 * Objects are opaque handles created by acx_*_create / acx_*_read_csv /
 * computing functions and released with the matching acx_*_free. Every
 * fallible call returns an acx_status; on failure acx_last_error() holds a
 * message for the calling thread until its next failing call. */
#ifndef ACX_ACX_H
#define ACX_ACX_H

#include <stddef.h>
#include <stdint.h>

#if defined(ACX_BUILDING_LIBRARY)
#define ACX_API __attribute__((visibility("default")))
#else
#define ACX_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum acx_status {
    ACX_OK = 0,
    ACX_E_INVALID_ARGUMENT,
    ACX_E_PARSE,
    ACX_E_IO,
    ACX_E_TIE,
    ACX_E_MISSING_CLASS,
    ACX_E_RANGE,
    ACX_E_DOMAIN,
    ACX_E_CONVERGENCE,
    ACX_E_MAX_ITERATIONS,
    ACX_E_INFEASIBLE_START,
    ACX_E_TOLERANCE,
    ACX_E_NO_BRACKET,
    ACX_E_SINGULAR,
    ACX_E_NO_RECORDS,
    ACX_E_INTERNAL
} acx_status;

typedef enum acx_tie_policy { ACX_TIE_STRICT = 0, ACX_TIE_HALF = 1, ACX_TIE_RANDOM = 2 } acx_tie_policy;

/* Bit flags; combine to select several estimators. */
typedef enum acx_estimator {
    ACX_EST_UN = 1,
    ACX_EST_EXP = 2,
    ACX_EST_CONS = 4,
    ACX_EST_HD = 8,
    ACX_EST_ALL = 15
} acx_estimator;

ACX_API const char* acx_status_name(acx_status status);
ACX_API const char* acx_last_error(void);

/* Parses "un,exp,cons,hd" style lists into a bit mask. */
ACX_API acx_status acx_parse_estimators(const char* list, unsigned* mask);

/* Score matrices ---------------------------------------------------------- */

typedef struct acx_score_matrix acx_score_matrix;

/* scores: rows x k, row-major; labels: 1-based. */
ACX_API acx_status acx_score_matrix_create(const double* scores, const int* labels, size_t rows, size_t k,
                                           acx_score_matrix** out);
ACX_API acx_status acx_score_matrix_read_csv(const char* path, acx_score_matrix** out);
ACX_API acx_status acx_score_matrix_write_csv(const acx_score_matrix* s, const char* path);
ACX_API size_t acx_score_matrix_rows(const acx_score_matrix* s);
ACX_API size_t acx_score_matrix_k(const acx_score_matrix* s);
ACX_API acx_status acx_empirical_accuracy(const acx_score_matrix* s, acx_tie_policy policy, uint64_t seed,
                                          double* out);
ACX_API void acx_score_matrix_free(acx_score_matrix* s);

/* Win counts -------------------------------------------------------------- */

typedef struct acx_win_counts acx_win_counts;

ACX_API acx_status acx_win_counts_from_scores(const acx_score_matrix* s, acx_tie_policy policy, uint64_t seed,
                                              acx_win_counts** out);
/* n observations: classes[i] (1-based) and win count v[i]; repeats are numbered in order of appearance. */
ACX_API acx_status acx_win_counts_create(const int* classes, const int* v, size_t n, size_t k, acx_win_counts** out);
ACX_API acx_status acx_win_counts_read_csv(const char* path, acx_win_counts** out);
ACX_API acx_status acx_win_counts_write_csv(const acx_win_counts* w, const char* path);
ACX_API size_t acx_win_counts_k(const acx_win_counts* w);
ACX_API size_t acx_win_counts_total(const acx_win_counts* w);
/* Writes t_max - 1 values, p_2..p_t_max. */
ACX_API acx_status acx_unbiased_moments(const acx_win_counts* w, int t_max, double* out);
ACX_API void acx_win_counts_free(acx_win_counts* w);

/* Extrapolation ----------------------------------------------------------- */

typedef struct acx_extrapolation_options {
    int target_K;         /* 0: the source k */
    int t_min;            /* curve range; defaults 2 .. target_K */
    int t_max;            /* 0: target_K */
    unsigned estimators;  /* acx_estimator mask */
    size_t grid_size;     /* CONS grid */
    double anchor_tolerance;
    int cons_max_iterations;
    double kappa_lo;
    double kappa_hi;
    int kappa_n;
    int quadrature_order;
} acx_extrapolation_options;

ACX_API void acx_extrapolation_options_init(acx_extrapolation_options* options);

typedef struct acx_extrapolation acx_extrapolation;

/* Returns ACX_OK when the estimators ran, even if some of them failed; query
 * acx_extrapolation_status for each. */
ACX_API acx_status acx_extrapolate(const acx_win_counts* w, const acx_extrapolation_options* options,
                                   acx_extrapolation** out);
/* status receives the estimator's own outcome. ACX_E_INVALID_ARGUMENT if it was not run. */
ACX_API acx_status acx_extrapolation_status(const acx_extrapolation* e, acx_estimator estimator, acx_status* status);
/* Failure message of an estimator, or "" when it succeeded or was not run. */
ACX_API const char* acx_extrapolation_message(const acx_extrapolation* e, acx_estimator estimator);
ACX_API acx_status acx_extrapolation_value(const acx_extrapolation* e, acx_estimator estimator, int t, double* out);
ACX_API acx_status acx_extrapolation_write_json(const acx_extrapolation* e, const char* path);
ACX_API acx_status acx_extrapolation_write_curve_csv(const acx_extrapolation* e, const char* path);
ACX_API void acx_extrapolation_free(acx_extrapolation* e);

ACX_API acx_status acx_pi_bar(int t, double c, double* out);
ACX_API acx_status acx_pi_bar_inverse(int t, double p, double* out);
ACX_API acx_status acx_hd_extrapolate(double p_k, int k, int K, double* out);

/* Simulation -------------------------------------------------------------- */

typedef struct acx_simulation_config {
    int p;
    double tau;
    const char* covariance;   /* "identity", "diagonal:lo:hi", "spd:seed" */
    int r;
    int m;
    int K;
    uint64_t seed;
    int replicates;
    const int* k_list;        /* NULL: {min(10, K)} */
    size_t k_list_length;
    const char* classifiers;  /* "qda,gnb,nc" subset */
    double rho;               /* negative: classifier default */
    unsigned estimators;      /* acx_estimator mask; ACX_EST_UN is ignored */
    size_t grid_size;
    double kappa_lo;
    double kappa_hi;
    int kappa_n;
    int quadrature_order;
} acx_simulation_config;

ACX_API void acx_simulation_config_init(acx_simulation_config* config);

typedef struct acx_replication acx_replication;

/* Invalid configurations fail with every problem listed in acx_last_error(). */
ACX_API acx_status acx_simulate(const acx_simulation_config* config, acx_replication** out);
ACX_API size_t acx_replication_record_count(const acx_replication* rep);
ACX_API size_t acx_replication_classifier_count(const acx_replication* rep);
ACX_API const char* acx_replication_classifier_name(const acx_replication* rep, size_t index);
ACX_API acx_status acx_replication_write_csv(const acx_replication* rep, const char* path);
ACX_API acx_status acx_replication_write_config(const acx_replication* rep, const char* path);
/* Win counts behind the records of (classifier, replicate, k); replicate is 1-based. */
ACX_API acx_status acx_replication_win_counts(const acx_replication* rep, size_t classifier_index, int replicate,
                                              int k, acx_win_counts** out);
ACX_API void acx_replication_free(acx_replication* rep);

/* Reports ----------------------------------------------------------------- */

/* Reads a replication CSV; writes the SVG plot and the summary CSV (either path may be NULL). */
ACX_API acx_status acx_report(const char* replication_csv, const char* svg_path, const char* summary_csv_path);

#ifdef __cplusplus
}
#endif

#endif /* ACX_ACX_H */
