#ifndef DPPMB_H
#define DPPMB_H

/* dppmb -- diverse mini-batch selection via determinantal point processes.
 *
 * C interface to the shared library. All objects are opaque handles that
 * must be released with their matching *_free function. Functions return
 * DPPMB_OK on success; on failure they return a nonzero status and leave a
 * human-readable message in dppmb_last_error() (thread-local).
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DPPMB_API __declspec(dllexport)
#else
#define DPPMB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef int32_t dppmb_status;

enum {
  DPPMB_OK = 0,
  DPPMB_EINVAL = 1,   /* invalid argument or config value */
  DPPMB_ENUMERIC = 2, /* numerical failure (non-PSD kernel, no convergence) */
  DPPMB_EIO = 3,      /* file system failure */
  DPPMB_EPARSE = 4    /* malformed input file */
};

DPPMB_API const char* dppmb_version(void);

/* Message describing the last failing call on the calling thread; empty
 * string if no call has failed yet. */
DPPMB_API const char* dppmb_last_error(void);

/* ---- kernel matrices -------------------------------------------------- */

typedef struct dppmb_kernel dppmb_kernel;

DPPMB_API dppmb_status dppmb_kernel_from_dense(int32_t n, const double* rowmajor,
                                               dppmb_kernel** out);

/* Kernel dump format: first line N, then N whitespace-separated rows of N
 * reals. The matrix must be exactly symmetric. */
DPPMB_API dppmb_status dppmb_kernel_read(const char* path, dppmb_kernel** out);

/* Tanimoto similarity kernel over an external fingerprint file; one record
 * per line: `<id> <bit-index> ...`, bit indices in [0, 2048), `#` starts a
 * comment line. */
DPPMB_API dppmb_status dppmb_kernel_from_fingerprints(const char* path,
                                                      dppmb_kernel** out);

DPPMB_API int32_t dppmb_kernel_dim(const dppmb_kernel* k);
DPPMB_API void dppmb_kernel_free(dppmb_kernel* k);

/* ---- exact k-DPP sampling --------------------------------------------- */

typedef struct dppmb_sampler dppmb_sampler;

/* Eigendecomposes kernel + 1e-8*I and prepares the size-k sampler. */
DPPMB_API dppmb_status dppmb_sampler_new(const dppmb_kernel* kernel, int32_t k,
                                         dppmb_sampler** out);

/* Writes k ascending zero-based indices into out_indices. Identical
 * (seed, stream) pairs yield identical subsets on every platform. */
DPPMB_API dppmb_status dppmb_sampler_draw(const dppmb_sampler* s, uint64_t seed,
                                          uint64_t stream, int32_t* out_indices);

DPPMB_API int32_t dppmb_sampler_k(const dppmb_sampler* s);
DPPMB_API void dppmb_sampler_free(dppmb_sampler* s);

/* ---- experiment runs --------------------------------------------------- */

typedef struct dppmb_config dppmb_config;

DPPMB_API dppmb_status dppmb_config_new(dppmb_config** out);

/* Merge `key = value` lines from a config file; `#` starts a comment.
 * Unknown keys are rejected. */
DPPMB_API dppmb_status dppmb_config_load(dppmb_config* c, const char* path);

DPPMB_API dppmb_status dppmb_config_set(dppmb_config* c, const char* key,
                                        const char* value);

/* Apply a named settings bundle. "desk" sets B=160, k=16, G=300,
 * horizon=48, alpha=0.06. */
DPPMB_API dppmb_status dppmb_config_profile(dppmb_config* c, const char* name);

DPPMB_API void dppmb_config_free(dppmb_config* c);

/* Runs the generative loop and writes config.cfg, oracle.spec, steps.csv,
 * metrics.csv, memory.csv and policy.bin into the configured out_dir. */
DPPMB_API dppmb_status dppmb_run(const dppmb_config* c);

/* ---- offline analysis -------------------------------------------------- */

/* Recomputes diversity metrics from a memory.csv dump. oracle_file may be
 * NULL to use the built-in oracle; reseeds > 1 averages the picker value
 * over consecutive seeds. */
DPPMB_API dppmb_status dppmb_metrics_compute(const char* memory_csv,
                                             const char* out_csv,
                                             double threshold_d, int32_t every,
                                             uint64_t seed, int32_t reseeds,
                                             const char* oracle_file);

/* Trains the smoothed context-window prior from the oracle's synthetic
 * corpus and writes it as a policy file. */
DPPMB_API dppmb_status dppmb_make_prior(const char* out_path, double smoothing,
                                        const char* oracle_file);

#ifdef __cplusplus
}
#endif

#endif /* DPPMB_H */
