//! C ABI over the triangle decomposition library.
//!
//! Graphs travel across the boundary as opaque handles created and freed
//! here. Every fallible entry point is null-safe, never unwinds, and
//! reports through [`td_status`]; results come back through out-pointers.
//! The matching header `include/tridecomp.h` is regenerated on every
//! build.

use std::ffi::CStr;
use std::os::raw::c_char;
use std::panic::{catch_unwind, AssertUnwindSafe};

use tridecomp::decomp::{decompose, DecompError};
use tridecomp::graph::{gen_complete, Graph, GraphError};
use tridecomp::program::search::{certify, solve_threshold, Verdict};
use tridecomp::program::ProgramError;

/// Status code returned by every fallible entry point.
#[repr(C)]
#[allow(non_camel_case_types)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum td_status {
    /// Success.
    TD_OK = 0,
    /// A required pointer argument was null.
    TD_NULL_ARGUMENT = 1,
    /// The input file could not be read.
    TD_IO_ERROR = 2,
    /// The input file is not a valid edge list.
    TD_PARSE_ERROR = 3,
    /// A parameter is outside its documented range.
    TD_BAD_PARAMETER = 4,
    /// The weighting is undefined on this graph: some clique prefix has no
    /// extension to delegate through.
    TD_DELEGATION_UNDEFINED = 5,
    /// The deficiency is outside the open interval (0, 1/4).
    TD_OFF_DOMAIN = 6,
    /// An internal invariant failed; the operation was abandoned safely.
    TD_INTERNAL_ERROR = 7,
}

/// Opaque graph handle. Create with [`td_graph_from_file`] or
/// [`td_graph_complete`]; release with [`td_graph_free`]. Handles are not
/// synchronized: share one across threads only for the read-only calls.
#[allow(non_camel_case_types)]
pub struct td_graph {
    inner: Graph,
}

fn graph_status(e: &GraphError) -> td_status {
    match e {
        GraphError::Io(_) => td_status::TD_IO_ERROR,
        GraphError::Parse { .. } | GraphError::LoopEdge { .. } => td_status::TD_PARSE_ERROR,
        GraphError::EmptyGraph
        | GraphError::BadParameter(_)
        | GraphError::GenerationTimeout { .. } => td_status::TD_BAD_PARAMETER,
    }
}

fn decomp_status(e: &DecompError) -> td_status {
    match e {
        DecompError::DelegationUndefined { .. } => td_status::TD_DELEGATION_UNDEFINED,
        _ => td_status::TD_INTERNAL_ERROR,
    }
}

/// Runs `f`, converting any panic into [`td_status::TD_INTERNAL_ERROR`]
/// rather than unwinding across the C boundary.
fn guarded(f: impl FnOnce() -> td_status) -> td_status {
    catch_unwind(AssertUnwindSafe(f)).unwrap_or(td_status::TD_INTERNAL_ERROR)
}

/// Loads a graph from an edge-list file (`n <count>` header, one `u v`
/// pair per line) and stores a new handle in `*out`.
///
/// # Safety
///
/// `path` must point to a NUL-terminated UTF-8 string and `out` to a
/// writable pointer slot. On any status other than `TD_OK`, `*out` is left
/// untouched. The returned handle must be released with [`td_graph_free`].
#[no_mangle]
pub unsafe extern "C" fn td_graph_from_file(
    path: *const c_char,
    out: *mut *mut td_graph,
) -> td_status {
    if path.is_null() || out.is_null() {
        return td_status::TD_NULL_ARGUMENT;
    }
    let Ok(path) = CStr::from_ptr(path).to_str() else {
        return td_status::TD_BAD_PARAMETER;
    };
    guarded(|| match Graph::load_edge_list(std::path::Path::new(path)) {
        Ok(g) => {
            *out = Box::into_raw(Box::new(td_graph { inner: g }));
            td_status::TD_OK
        }
        Err(e) => graph_status(&e),
    })
}

/// Stores a new handle to the complete graph on `n` vertices in `*out`.
///
/// # Safety
///
/// `out` must point to a writable pointer slot. On any status other than
/// `TD_OK`, `*out` is left untouched. The returned handle must be released
/// with [`td_graph_free`].
#[no_mangle]
pub unsafe extern "C" fn td_graph_complete(n: usize, out: *mut *mut td_graph) -> td_status {
    if out.is_null() {
        return td_status::TD_NULL_ARGUMENT;
    }
    guarded(|| match gen_complete(n) {
        Ok(g) => {
            *out = Box::into_raw(Box::new(td_graph { inner: g }));
            td_status::TD_OK
        }
        Err(e) => graph_status(&e),
    })
}

/// Releases a handle. Passing null is a no-op.
///
/// # Safety
///
/// `g` must be null or a handle returned by this library that has not been
/// freed already; the handle is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn td_graph_free(g: *mut td_graph) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Number of vertices, or 0 when `g` is null.
///
/// # Safety
///
/// `g` must be null or a live handle returned by this library.
#[no_mangle]
pub unsafe extern "C" fn td_graph_n(g: *const td_graph) -> usize {
    g.as_ref().map_or(0, |g| g.inner.n())
}

/// Minimum degree, or 0 when `g` is null.
///
/// # Safety
///
/// `g` must be null or a live handle returned by this library.
#[no_mangle]
pub unsafe extern "C" fn td_graph_min_degree(g: *const td_graph) -> usize {
    g.as_ref().map_or(0, |g| g.inner.min_degree())
}

/// Computes the triangle weighting and stores the smallest weight in
/// `*out_min`; NaN when the graph has no triangles.
///
/// # Safety
///
/// `g` must be a live handle returned by this library and `out_min` a
/// writable double slot. On any status other than `TD_OK`, `*out_min` is
/// left untouched.
#[no_mangle]
pub unsafe extern "C" fn td_decompose_min_weight(
    g: *const td_graph,
    out_min: *mut f64,
) -> td_status {
    let (Some(g), false) = (g.as_ref(), out_min.is_null()) else {
        return td_status::TD_NULL_ARGUMENT;
    };
    guarded(|| match decompose::<f64>(&g.inner) {
        Ok(rep) => {
            *out_min = rep.min_weight.map_or(f64::NAN, |(_, w)| w);
            td_status::TD_OK
        }
        Err(e) => decomp_status(&e),
    })
}

/// Computes the weighting and stores 1 in `*out_ok` when it is a valid
/// fractional triangle decomposition within `tol`: every edge lies in a
/// triangle, every covered edge's weights sum to 1 within `tol`, and no
/// weight is below `-tol`. Stores 0 otherwise.
///
/// # Safety
///
/// `g` must be a live handle returned by this library and `out_ok` a
/// writable int slot. On any status other than `TD_OK`, `*out_ok` is left
/// untouched.
#[no_mangle]
pub unsafe extern "C" fn td_verify(g: *const td_graph, tol: f64, out_ok: *mut i32) -> td_status {
    let (Some(g), false) = (g.as_ref(), out_ok.is_null()) else {
        return td_status::TD_NULL_ARGUMENT;
    };
    if tol.is_nan() || tol < 0.0 {
        return td_status::TD_BAD_PARAMETER;
    }
    guarded(|| match decompose::<f64>(&g.inner) {
        Ok(rep) => {
            let sums_ok = rep.edge_sums.iter().all(|(_, s)| (s - 1.0).abs() <= tol);
            let covered = rep.uncoverable_edges.is_empty();
            let nonneg = rep.min_weight.as_ref().is_none_or(|(_, w)| *w >= -tol);
            *out_ok = i32::from(sums_ok && covered && nonneg);
            td_status::TD_OK
        }
        Err(e) => decomp_status(&e),
    })
}

/// The critical degree deficiency `(7 - sqrt 21)/14`: below it the
/// weighting is certified nonnegative in the limit, above it the certified
/// bound fails.
#[no_mangle]
pub extern "C" fn td_threshold() -> f64 {
    solve_threshold()
}

/// Certifies the terminal optimum at deficiency `d`, storing 1 in
/// `*out_le1` when the bound is at most one with every supporting
/// validation holding, 0 otherwise.
///
/// # Safety
///
/// `out_le1` must point to a writable int slot. On any status other than
/// `TD_OK`, `*out_le1` is left untouched.
#[no_mangle]
pub unsafe extern "C" fn td_certify(d: f64, out_le1: *mut i32) -> td_status {
    if out_le1.is_null() {
        return td_status::TD_NULL_ARGUMENT;
    }
    guarded(|| match certify(d) {
        Ok(outcome) => {
            *out_le1 = i32::from(outcome.verdict == Verdict::CertifiedLe1);
            td_status::TD_OK
        }
        Err(ProgramError::Domain(_)) => td_status::TD_OFF_DOMAIN,
        Err(_) => td_status::TD_BAD_PARAMETER,
    })
}
