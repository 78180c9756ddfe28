#ifndef TRIDECOMP_H
#define TRIDECOMP_H

/* Generated by cbindgen from the tridecomp-ffi crate; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status code returned by every fallible entry point.
typedef enum {
  // Success.
  TD_OK = 0,
  // A required pointer argument was null.
  TD_NULL_ARGUMENT = 1,
  // The input file could not be read.
  TD_IO_ERROR = 2,
  // The input file is not a valid edge list.
  TD_PARSE_ERROR = 3,
  // A parameter is outside its documented range.
  TD_BAD_PARAMETER = 4,
  // The weighting is undefined on this graph: some clique prefix has no
  // extension to delegate through.
  TD_DELEGATION_UNDEFINED = 5,
  // The deficiency is outside the open interval (0, 1/4).
  TD_OFF_DOMAIN = 6,
  // An internal invariant failed; the operation was abandoned safely.
  TD_INTERNAL_ERROR = 7,
} td_status;

// Opaque graph handle. Create with [`td_graph_from_file`] or
// [`td_graph_complete`]; release with [`td_graph_free`]. Handles are not
// synchronized: share one across threads only for the read-only calls.
typedef struct td_graph td_graph;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Loads a graph from an edge-list file (`n <count>` header, one `u v`
// pair per line) and stores a new handle in `*out`.
//
// # Safety
//
// `path` must point to a NUL-terminated UTF-8 string and `out` to a
// writable pointer slot. On any status other than `TD_OK`, `*out` is left
// untouched. The returned handle must be released with [`td_graph_free`].
td_status td_graph_from_file(const char *path, td_graph **out);

// Stores a new handle to the complete graph on `n` vertices in `*out`.
//
// # Safety
//
// `out` must point to a writable pointer slot. On any status other than
// `TD_OK`, `*out` is left untouched. The returned handle must be released
// with [`td_graph_free`].
td_status td_graph_complete(uintptr_t n, td_graph **out);

// Releases a handle. Passing null is a no-op.
//
// # Safety
//
// `g` must be null or a handle returned by this library that has not been
// freed already; the handle is invalid afterwards.
void td_graph_free(td_graph *g);

// Number of vertices, or 0 when `g` is null.
//
// # Safety
//
// `g` must be null or a live handle returned by this library.
uintptr_t td_graph_n(const td_graph *g);

// Minimum degree, or 0 when `g` is null.
//
// # Safety
//
// `g` must be null or a live handle returned by this library.
uintptr_t td_graph_min_degree(const td_graph *g);

// Computes the triangle weighting and stores the smallest weight in
// `*out_min`; NaN when the graph has no triangles.
//
// # Safety
//
// `g` must be a live handle returned by this library and `out_min` a
// writable double slot. On any status other than `TD_OK`, `*out_min` is
// left untouched.
td_status td_decompose_min_weight(const td_graph *g, double *out_min);

// Computes the weighting and stores 1 in `*out_ok` when it is a valid
// fractional triangle decomposition within `tol`: every edge lies in a
// triangle, every covered edge's weights sum to 1 within `tol`, and no
// weight is below `-tol`. Stores 0 otherwise.
//
// # Safety
//
// `g` must be a live handle returned by this library and `out_ok` a
// writable int slot. On any status other than `TD_OK`, `*out_ok` is left
// untouched.
td_status td_verify(const td_graph *g, double tol, int32_t *out_ok);

// The critical degree deficiency `(7 - sqrt 21)/14`: below it the
// weighting is certified nonnegative in the limit, above it the certified
// bound fails.
double td_threshold(void);

// Certifies the terminal optimum at deficiency `d`, storing 1 in
// `*out_le1` when the bound is at most one with every supporting
// validation holding, 0 otherwise.
//
// # Safety
//
// `out_le1` must point to a writable int slot. On any status other than
// `TD_OK`, `*out_le1` is left untouched.
td_status td_certify(double d, int32_t *out_le1);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* TRIDECOMP_H */
