/*
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/*
 * somsync — non-data-aided timing-offset estimation for ZP-OFDM, C API.
 *
 * The library simulates a zero-padded OFDM link over a doubly-selective
 * Rayleigh MIMO channel and estimates the integer timing offset from
 * second-order moments of the received samples (unweighted and
 * variance-weighted searches, plus a sliding-window energy baseline).
 *
 * All functions return SOMSYNC_OK on success; on failure they return an
 * error code and leave a human-readable message retrievable (per thread)
 * via somsync_last_error(). Handles are opaque and must be released with
 * the matching *_destroy call.
 */

#ifndef SOMSYNC_H
#define SOMSYNC_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SOMSYNC_API __declspec(dllexport)
#else
#define SOMSYNC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum somsync_status {
    SOMSYNC_OK = 0,
    SOMSYNC_ERR_RANGE = 1,             /* a count or power is out of range */
    SOMSYNC_ERR_ISI_VIOLATION = 2,     /* n_z < n_h */
    SOMSYNC_ERR_OFFSET_RANGE = 3,      /* offset outside the search set D */
    SOMSYNC_ERR_DIMENSION_MISMATCH = 4,
    SOMSYNC_ERR_EMPTY_WINDOW = 5,      /* no complete period for any index */
    SOMSYNC_ERR_DEGENERATE_WEIGHT = 6, /* all variance weights are zero */
    SOMSYNC_ERR_WINDOW_TOO_LONG = 7,   /* TM window exceeds half the stream */
    SOMSYNC_ERR_UNSUPPORTED_ORDER = 8, /* unsupported QAM order */
    SOMSYNC_ERR_PARSE = 9,             /* config or file format error */
    SOMSYNC_ERR_IO = 10,
    SOMSYNC_ERR_INVALID_ARGUMENT = 11,
    SOMSYNC_ERR_INTERNAL = 12
} somsync_status;

typedef enum somsync_estimator {
    SOMSYNC_ESTIMATOR_SOM = 0,  /* unweighted moment search */
    SOMSYNC_ESTIMATOR_WSOM = 1, /* inverse-variance weighted moment search */
    SOMSYNC_ESTIMATOR_TM = 2    /* sliding-window energy-jump baseline */
} somsync_estimator;

typedef enum somsync_variance_mode {
    SOMSYNC_VARIANCE_PAPER_FORMULA = 0,
    SOMSYNC_VARIANCE_ORACLE_CORRECTED = 1 /* default; oracle-validated */
} somsync_variance_mode;

typedef struct somsync_config somsync_config;
typedef struct somsync_table somsync_table;
typedef struct somsync_stream somsync_stream;

/* Library version string, e.g. "0.1.0". */
SOMSYNC_API const char* somsync_version(void);

/* Message for the most recent failing call on this thread; never NULL. */
SOMSYNC_API const char* somsync_last_error(void);

/* ---- configuration ----------------------------------------------------- */

/* Built-in defaults (128/12 blocks, 10 exponential taps, 15 dB, 128-QAM). */
SOMSYNC_API somsync_status somsync_config_create(somsync_config** out);

/* JSON config (strict schema: unknown keys are rejected). */
SOMSYNC_API somsync_status somsync_config_load(const char* path, somsync_config** out);
SOMSYNC_API somsync_status somsync_config_parse(const char* json_text, somsync_config** out);

/* Applies one "key=value" override; value parsed as JSON when possible. */
SOMSYNC_API somsync_status somsync_config_set(somsync_config* config, const char* assignment);

/* Full invariant check (block geometry, powers, search-set bounds, PDP). */
SOMSYNC_API somsync_status somsync_config_validate(const somsync_config* config);

/* Scalar accessors for derived and materialized values. Supported keys:
 * n_x, n_z, n_s, n_h, m_t, m_r, N, L, d_min, d_max (integers) and
 * sigma_x2, sigma_n2, f_D, f_sa, ebn0_db, p_h (doubles). */
SOMSYNC_API somsync_status somsync_config_get_int(const somsync_config* config, const char* key,
                                                  int64_t* out);
SOMSYNC_API somsync_status somsync_config_get_double(const somsync_config* config, const char* key,
                                                     double* out);

/* Canonical JSON for the materialized document; caller frees with
 * somsync_string_free. */
SOMSYNC_API somsync_status somsync_config_dump(const somsync_config* config, char** out);

SOMSYNC_API void somsync_config_destroy(somsync_config* config);
SOMSYNC_API void somsync_string_free(char* text);

/* ---- moment tables ------------------------------------------------------ */

SOMSYNC_API somsync_status somsync_table_create(const somsync_config* config, int variance_mode,
                                                somsync_table** out);
SOMSYNC_API somsync_status somsync_table_period(const somsync_table* table, uint32_t* n_s);

/* Copies one period into caller buffers (any pointer may be NULL to skip).
 * Buffers must hold at least n_s doubles. */
SOMSYNC_API somsync_status somsync_table_values(const somsync_table* table, double* m0,
                                                double* f_paper, double* f_oracle,
                                                double* f_noise_paper, double* f_noise_oracle);

/* CSV export: columns k,m0,f_paper,f_oracle; nonzero empirical_trials adds
 * emp_m0 and emp_var columns from a Monte Carlo run with the given seed. */
SOMSYNC_API somsync_status somsync_table_export_csv(const somsync_table* table, const char* path,
                                                    uint64_t empirical_trials, uint64_t seed);

SOMSYNC_API void somsync_table_destroy(somsync_table* table);

/* ---- streams ------------------------------------------------------------ */

/* Full transmit/channel/offset/noise pipeline at the configured operating
 * point; the observation keeps exactly N * n_s samples per receive antenna. */
SOMSYNC_API somsync_status somsync_stream_simulate(const somsync_config* config, int32_t true_d,
                                                   uint64_t seed, somsync_stream** out);

/* Little-endian binary dump (header: L, m_r, seed, d; interleaved re/im
 * doubles per antenna). */
SOMSYNC_API somsync_status somsync_stream_save(const somsync_stream* stream, const char* path);
SOMSYNC_API somsync_status somsync_stream_load(const char* path, somsync_stream** out);

SOMSYNC_API somsync_status somsync_stream_info(const somsync_stream* stream, uint64_t* length,
                                               uint32_t* antennas, int32_t* true_d,
                                               uint64_t* seed);

/* Copies antenna j (0-based) as interleaved re/im doubles; the buffer must
 * hold 2 * length values. */
SOMSYNC_API somsync_status somsync_stream_samples(const somsync_stream* stream, uint32_t antenna,
                                                  double* interleaved);

SOMSYNC_API void somsync_stream_destroy(somsync_stream* stream);

/* ---- estimation ---------------------------------------------------------- */

/* Runs one estimator over the stream. table may be NULL for the TM baseline.
 * If curve_d/curve_cost are non-NULL they receive the per-candidate cost
 * curve (curve_capacity entries available; *curve_len gets the count, which
 * equals d_max - d_min + 1). */
SOMSYNC_API somsync_status somsync_estimate(const somsync_stream* stream,
                                            const somsync_config* config,
                                            const somsync_table* table, int estimator,
                                            int32_t* d_hat, double* cost_min, int32_t* curve_d,
                                            double* curve_cost, size_t curve_capacity,
                                            size_t* curve_len);

/* Monte Carlo ground truth for index k: mean and variance of |y[k]|^2 over
 * fresh signal/channel/noise draws. */
SOMSYNC_API somsync_status somsync_oracle(const somsync_config* config, uint32_t k, uint64_t trials,
                                          uint64_t seed, double* mean, double* variance);

/* ---- experiments --------------------------------------------------------- */

/* Runs the experiment named in the config (snr|doppler|blocks|taps|pdp|pmf|
 * mse) and writes the results CSV plus a JSON manifest. manifest_path may be
 * NULL to skip the manifest. threads = 0 uses all hardware threads. */
SOMSYNC_API somsync_status somsync_experiment_run(const somsync_config* config,
                                                  const char* csv_path, const char* manifest_path,
                                                  uint32_t threads);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* SOMSYNC_H */
