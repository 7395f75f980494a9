#ifndef IETLAB_H
#define IETLAB_H

/*
 * C interface to the interval-exchange laboratory.
 *
 * All functions are synchronous and thread-compatible (no shared mutable
 * state besides a thread-local error message).  Functions that can fail
 * either return NULL (constructors) or a nonzero status; the text for the
 * most recent failure on this thread is available via ietlab_last_error().
 *
 * Status values follow the CLI exit-code taxonomy:
 *   0 ok, 2 usage/io, 3 precision or singular abort, 4 verification/internal.
 *
 * Strings returned through char** or char* are heap-allocated; release
 * them with ietlab_free_string().  Real numbers cross the boundary as
 * hex-float strings ("0x1.9e377ap-1"), which round-trip exactly.
 */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

const char* ietlab_version(void);
const char* ietlab_last_error(void);
void ietlab_free_string(char* s);

/* ------------------------------------------------------------------ IET */

typedef struct ietlab_iet ietlab_iet;

/* perm is 1-based ("2 1", "5 4 3 2 1"); lengths are sampled from the seed */
ietlab_iet* ietlab_iet_sample(const char* perm, uint64_t seed, long precision_bits);
ietlab_iet* ietlab_iet_from_json(const char* json);
char* ietlab_iet_to_json(const ietlab_iet* iet);
/* y = T^iterations(x); negative iteration counts walk the inverse */
int ietlab_iet_evaluate_hex(const ietlab_iet* iet, const char* x_hex, long iterations,
                            char** out_hex);
void ietlab_iet_free(ietlab_iet* iet);

/* ----------------------------------------------------------- renormalize */

typedef struct ietlab_path ietlab_path;

ietlab_path* ietlab_path_new(const ietlab_iet* iet, long zorich_steps);
long ietlab_path_length(const ietlab_path* path);
/* determinant of the cocycle block Z^(m,n); 0 with last_error set on failure */
int ietlab_path_det(const ietlab_path* path, long m, long n);
void ietlab_path_free(ietlab_path* path);

/* ------------------------------------------------------------------ roof */

typedef struct ietlab_roof ietlab_roof;

ietlab_roof* ietlab_roof_single_pair(double cplus, double cminus, long precision_bits);
ietlab_roof* ietlab_roof_from_toml(const char* text, long precision_bits);
/* normalized roof value at x (hex-float in, hex-float out) */
int ietlab_roof_value_hex(const ietlab_roof* roof, const char* x_hex, char** out_hex);
void ietlab_roof_free(ietlab_roof* roof);

/* -------------------------------------------------------------- commands */

/* sample command payload: the IET JSON (stdout contract of the CLI) */
int ietlab_cmd_sample(const char* perm, uint64_t seed, long precision_bits, char** out_json);

/* config-driven commands: induct, towers, rigidity, flow, correlate, report.
   outdir/format may be NULL (resolution: flag, IETLAB_OUT, config, default).
   On return *out_message holds a result or error line and *out_files holds
   the newline-joined list of written files (manifest last, may be empty).
   The return value is the CLI exit code. */
int ietlab_cmd_run(const char* command, const char* config_path, const char* outdir,
                   const char* format, int threads, char** out_message, char** out_files);

/* variant taking the config text directly instead of a path */
int ietlab_cmd_run_text(const char* command, const char* config_text, const char* outdir,
                        const char* format, int threads, char** out_message, char** out_files);

/* re-run the command recorded in a manifest and compare output hashes */
int ietlab_cmd_replay(const char* manifest_path, char** out_message, char** out_files);

#ifdef __cplusplus
}
#endif

#endif /* IETLAB_H */
