#ifndef TRACKTOPO_H
#define TRACKTOPO_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Class codes used by the k-NN functions.
#define TT_CLASS_CONFUSER 0

#define TT_CLASS_TARGET 1

// Result of every fallible call.
typedef enum {
  TT_STATUS_OK = 0,
  // A required pointer argument was `NULL`.
  TT_STATUS_NULL_POINTER = 1,
  // An argument is out of range or inconsistent with another.
  TT_STATUS_INVALID_ARGUMENT = 2,
  // A caller-provided buffer is too small; the required size is reported.
  TT_STATUS_BUFFER_TOO_SMALL = 3,
  // Experiment configuration rejected.
  TT_STATUS_CONFIG = 4,
  // Experiment input missing or malformed.
  TT_STATUS_INPUT = 5,
  // An internal invariant failed.
  TT_STATUS_INTERNAL = 6,
  // A panic was caught at the boundary.
  TT_STATUS_PANIC = 7,
} TtStatus;

// Trained k-NN classifier handle.
typedef struct TtClassifier TtClassifier;

// Persistence diagram handle.
typedef struct TtDiagram TtDiagram;

// Finished experiment handle, holding the manifest and artifacts.
typedef struct TtExperiment TtExperiment;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or `NULL` after a
// success. Valid until the next `tt_*` call on the same thread.
const char *tt_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *tt_version(void);

// Dimension-0 Vietoris-Rips diagram of `n` points in `dim` dimensions.
//
// # Safety
// `coords` must hold `n * dim` doubles; `out` must be writable.
TtStatus tt_h0_from_points(const double *coords, size_t n, size_t dim, TtDiagram **out);

// Number of pairs, including the essential one.
//
// # Safety
// `diagram` must be a live handle or `NULL` (returns 0).
size_t tt_diagram_len(const TtDiagram *diagram);

// Copy the pairs into `births` and `deaths` (each of capacity `cap`).
// Essential pairs have death `+inf`. `*written` receives the pair count;
// with `cap` too small nothing is copied and `TT_STATUS_BUFFER_TOO_SMALL`
// is returned.
//
// # Safety
// Buffers must hold `cap` doubles; `written` must be writable.
TtStatus tt_diagram_pairs(const TtDiagram *diagram,
                          double *births,
                          double *deaths,
                          size_t cap,
                          size_t *written);

// # Safety
// `diagram` must come from this library and not be freed twice.
void tt_diagram_free(TtDiagram *diagram);

// Delay-embed `series` with dimension `dim` and delay `tau`. Writes the
// `points * dim` coordinates row-major into `out` when `out_cap` suffices;
// `*points` always receives the point count `n - (dim - 1) * tau`.
//
// # Safety
// `series` must hold `n` doubles, `out` `out_cap` doubles.
TtStatus tt_delay_embed(const double *series,
                        size_t n,
                        size_t dim,
                        size_t tau,
                        double *out,
                        size_t out_cap,
                        size_t *points);

// Normalize an `n`-point sub-track (`xy` row-major, per-axis min/max) and
// project it with weights `(vx, vy)`, both in `(0, 1]`, into `out[0..n]`.
//
// # Safety
// `xy` must hold `2 * n` doubles and `out` `n` doubles.
TtStatus tt_normalize_project(const double *xy, size_t n, double vx, double vy, double *out);

// Persistence vector of a dimension-0 diagram on `[0, p_max]` with
// `resolution` bins. `sigma <= 0` selects the default `p_max / 20`.
//
// # Safety
// `out` must hold `resolution` doubles.
TtStatus tt_diagram_to_vector(const TtDiagram *diagram,
                              size_t resolution,
                              double p_max,
                              double sigma,
                              double *out);

// Train a k-NN classifier on `rows x width` features (row-major) with
// per-row class codes `TT_CLASS_CONFUSER` / `TT_CLASS_TARGET`.
//
// # Safety
// `features` must hold `rows * width` doubles and `classes` `rows` ints.
TtStatus tt_knn_new(const double *features,
                    const int32_t *classes,
                    size_t rows,
                    size_t width,
                    size_t k,
                    TtClassifier **out);

// Predict the class code of one `width`-long query.
//
// # Safety
// `query` must hold `width` doubles; `class_out` must be writable.
TtStatus tt_knn_predict(const TtClassifier *classifier,
                        const double *query,
                        size_t width,
                        int32_t *class_out);

// # Safety
// `classifier` must come from this library and not be freed twice.
void tt_knn_free(TtClassifier *classifier);

// Run an experiment from a JSON config (`NULL` for the default config,
// which runs the built-in synthetic scene). `jobs == 0` uses all cores.
//
// # Safety
// `config_json` must be `NULL` or a NUL-terminated UTF-8 string.
TtStatus tt_experiment_run(const char *config_json, size_t jobs, TtExperiment **out);

// Run manifest as JSON, owned by the handle.
//
// # Safety
// `experiment` must be a live handle or `NULL` (returns `NULL`).
const char *tt_experiment_manifest_json(const TtExperiment *experiment);

// Write all run artifacts (manifest, confusion matrices, vectors,
// diagrams) into `out_dir`.
//
// # Safety
// `out_dir` must be a NUL-terminated UTF-8 path.
TtStatus tt_experiment_write(const TtExperiment *experiment, const char *out_dir);

// # Safety
// `experiment` must come from this library and not be freed twice.
void tt_experiment_free(TtExperiment *experiment);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TRACKTOPO_H */
