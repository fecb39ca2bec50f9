/*
 * ptproc: expectations of statistics of locally stable point processes.
 *
 * C interface over the C++ core. All objects are opaque handles created by a
 * *_create function and released by the matching *_destroy. Every fallible
 * call returns a ptproc_status; on failure a message for the calling thread is
 * available from ptproc_last_error() until the next failing call.
 */
#ifndef PTPROC_PTPROC_H
#define PTPROC_PTPROC_H

#include <stddef.h>
#include <stdint.h>

#if defined(PTPROC_BUILDING_LIBRARY)
#define PTPROC_API __attribute__((visibility("default")))
#else
#define PTPROC_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ptproc_status {
  PTPROC_OK = 0,
  PTPROC_ERR_INVALID_ARGUMENT = 1,
  PTPROC_ERR_HORIZON_EXCEEDED = 2,
  PTPROC_ERR_TAIL_BOUND = 3,
  PTPROC_ERR_INTERNAL = 4
} ptproc_status;

typedef enum ptproc_engine {
  PTPROC_ENGINE_AIS = 0,
  PTPROC_ENGINE_MH = 1,
  PTPROC_ENGINE_CFTP = 2
} ptproc_engine;

typedef enum ptproc_stop_reason {
  PTPROC_STOP_CONVERGED = 0,
  PTPROC_STOP_MAX_STEPS = 1
} ptproc_stop_reason;

typedef struct ptproc_model ptproc_model;
typedef struct ptproc_statistic ptproc_statistic;
typedef struct ptproc_pattern ptproc_pattern;
typedef struct ptproc_mh_chain ptproc_mh_chain;

PTPROC_API const char* ptproc_version(void);
PTPROC_API const char* ptproc_last_error(void);
PTPROC_API const char* ptproc_status_name(ptproc_status status);

/* ---- patterns ---------------------------------------------------------- */

PTPROC_API ptproc_status ptproc_pattern_create(size_t dim, const double* lower, const double* upper,
                                               ptproc_pattern** out);
PTPROC_API void ptproc_pattern_destroy(ptproc_pattern* pattern);
/* Fails if the point lies outside the pattern's window. */
PTPROC_API ptproc_status ptproc_pattern_add_point(ptproc_pattern* pattern, const double* coords);
PTPROC_API size_t ptproc_pattern_size(const ptproc_pattern* pattern);
PTPROC_API size_t ptproc_pattern_dim(const ptproc_pattern* pattern);
/* Row-major coordinates, size() * dim() values; valid until the pattern changes. */
PTPROC_API const double* ptproc_pattern_coords(const ptproc_pattern* pattern);

/* ---- models and statistics --------------------------------------------- */

PTPROC_API ptproc_status ptproc_model_strauss_create(size_t dim, const double* lower, const double* upper,
                                                     double beta, double gamma, double r, ptproc_model** out);
/* exp(-alpha * xi_2^2) trend on coordinate index 1; needs dim >= 2. */
PTPROC_API ptproc_status ptproc_model_inhom_strauss_create(size_t dim, const double* lower, const double* upper,
                                                           double beta, double gamma, double r, double alpha,
                                                           ptproc_model** out);
PTPROC_API void ptproc_model_destroy(ptproc_model* model);
PTPROC_API ptproc_status ptproc_model_log_h(const ptproc_model* model, const ptproc_pattern* x, double* out);
PTPROC_API ptproc_status ptproc_model_log_papangelou(const ptproc_model* model, const ptproc_pattern* x,
                                                     const double* xi, double* out);
/* c* = integral of the stability envelope over the window. */
PTPROC_API double ptproc_model_phi_integral(const ptproc_model* model);

PTPROC_API ptproc_status ptproc_statistic_papangelou_origin_create(const ptproc_model* model,
                                                                   ptproc_statistic** out);
PTPROC_API ptproc_status ptproc_statistic_boundary_count_create(double band, ptproc_statistic** out);
PTPROC_API ptproc_status ptproc_statistic_point_count_create(ptproc_statistic** out);
PTPROC_API void ptproc_statistic_destroy(ptproc_statistic* statistic);
PTPROC_API ptproc_status ptproc_statistic_evaluate(const ptproc_statistic* statistic, const ptproc_pattern* x,
                                                   double* out);

/* ---- engine configuration ---------------------------------------------- */

typedef struct ptproc_ais_config {
  double rho0; /* <= 0: c* / (3|S|) */
  double m_rho;
  double M_rho;
  uint64_t n1;
  uint64_t n_t;
  double eta1; /* ignored by ptproc_estimate, which uses target_rel_se^2 */
  double eta2;
  uint64_t max_steps;
  uint64_t min_steps;
} ptproc_ais_config;

typedef struct ptproc_mh_config {
  double p_birth;
  uint64_t burn_in;
  uint64_t thin;
  double initial_rho; /* <= 0: c* / (3|S|) */
} ptproc_mh_config;

typedef struct ptproc_cftp_config {
  uint32_t t_max;
  double initial_horizon;
} ptproc_cftp_config;

typedef struct ptproc_engine_config {
  ptproc_ais_config ais;
  ptproc_mh_config mh;
  ptproc_cftp_config cftp;
  uint64_t seed;
  uint32_t threads;
  uint64_t min_samples;
  uint64_t max_samples;
} ptproc_engine_config;

PTPROC_API void ptproc_engine_config_default(ptproc_engine_config* cfg);
/* eta1 = (epsilon / z_{alpha/2})^2 */
PTPROC_API ptproc_status ptproc_eta1_from_confidence(double epsilon, double alpha, double* out);

typedef struct ptproc_report {
  double mu_hat;
  double se;
  double rho_final; /* NaN unless has_rho_final */
  int has_rho_final;
  uint64_t steps;
  uint64_t n_total;
  double wall_seconds;
  double time_variance;
  ptproc_stop_reason stop_reason;
} ptproc_report;

typedef struct ptproc_ais_trace_record {
  uint64_t t;
  double rho_hat;
  double mu_hat;
  double sigma2_hat;
  uint64_t n_total;
} ptproc_ais_trace_record;

typedef void (*ptproc_ais_trace_fn)(const ptproc_ais_trace_record* record, void* user);

/* ---- estimation -------------------------------------------------------- */

PTPROC_API ptproc_status ptproc_estimate(ptproc_engine engine, const ptproc_model* model,
                                         const ptproc_statistic* statistic, double target_rel_se,
                                         const ptproc_engine_config* cfg, ptproc_ais_trace_fn trace,
                                         void* trace_user, ptproc_report* out);

typedef struct ptproc_replication_summary {
  uint64_t replications;
  double reference;
  double mean;
  double empirical_variance;
  double mean_reported_variance;
  double coverage;
} ptproc_replication_summary;

PTPROC_API ptproc_status ptproc_replicate(ptproc_engine engine, const ptproc_model* model,
                                          const ptproc_statistic* statistic, uint64_t budget,
                                          uint64_t replications, double reference_mu,
                                          const ptproc_engine_config* cfg, ptproc_replication_summary* out);

typedef struct ptproc_oracle_spec {
  uint32_t n_max;
  uint64_t mc_points;
  uint64_t seed;
  uint32_t batches;
  double tail_tolerance;
  uint32_t threads;
} ptproc_oracle_spec;

typedef struct ptproc_oracle_result {
  double mu;
  double tail_bound;
  double mc_se;
} ptproc_oracle_result;

PTPROC_API void ptproc_oracle_spec_default(ptproc_oracle_spec* spec);
/* On PTPROC_ERR_TAIL_BOUND, out->tail_bound still holds the violating bound. */
PTPROC_API ptproc_status ptproc_oracle(const ptproc_model* model, const ptproc_statistic* statistic,
                                       const ptproc_oracle_spec* spec, ptproc_oracle_result* out);

typedef struct ptproc_benchmark_case {
  const ptproc_model* model;
  const ptproc_statistic* statistic;
  double beta;
  double gamma;
} ptproc_benchmark_case;

typedef struct ptproc_benchmark_row {
  ptproc_engine engine;
  size_t case_index;
  double beta;
  double gamma;
  double mu_hat;
  double se;
  double wall_seconds;
  uint64_t n_samples;
  double time_variance;
  double tv_ratio_vs_ais;
} ptproc_benchmark_row;

/* CSV header line for benchmark rows (no trailing newline). */
PTPROC_API const char* ptproc_benchmark_csv_header(void);

/* rows_out must hold n_cases * n_engines rows. */
PTPROC_API ptproc_status ptproc_benchmark(const ptproc_benchmark_case* cases, size_t n_cases,
                                          const ptproc_engine* engines, size_t n_engines, double target_rel_se,
                                          const ptproc_engine_config* cfg, ptproc_benchmark_row* rows_out);

/* ---- raw sampling ------------------------------------------------------ */

/* Draw `index` of the homogeneous Poisson substream family for `seed`. */
PTPROC_API ptproc_status ptproc_sample_poisson(size_t dim, const double* lower, const double* upper, double rho,
                                               uint64_t seed, uint64_t index, ptproc_pattern** out);
/* Draw `index` of the substream family used by CFTP estimation. */
PTPROC_API ptproc_status ptproc_sample_cftp(const ptproc_model* model, const ptproc_cftp_config* cfg,
                                            uint64_t seed, uint64_t index, ptproc_pattern** out);

PTPROC_API ptproc_status ptproc_mh_chain_create(const ptproc_model* model, const ptproc_mh_config* cfg,
                                                uint64_t seed, ptproc_mh_chain** out);
PTPROC_API void ptproc_mh_chain_destroy(ptproc_mh_chain* chain);
/* Advances `steps` birth-death proposals. */
PTPROC_API ptproc_status ptproc_mh_chain_advance(ptproc_mh_chain* chain, uint64_t steps);
PTPROC_API size_t ptproc_mh_chain_count(const ptproc_mh_chain* chain);
PTPROC_API uint64_t ptproc_mh_chain_steps(const ptproc_mh_chain* chain);
/* Copy of the current state. */
PTPROC_API ptproc_status ptproc_mh_chain_pattern(const ptproc_mh_chain* chain, ptproc_pattern** out);

#ifdef __cplusplus
}
#endif

#endif /* PTPROC_PTPROC_H */
