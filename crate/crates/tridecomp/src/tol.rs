//! Numeric tolerances used across the crate.
//!
//! Every floating-point comparison in the library and its tests goes through
//! one of these named constants so that the magnitude and its justification
//! live in exactly one place.

/// Absolute tolerance for two floating-point evaluations of the same quantity
/// along different algebraic routes (e.g. the recast triangle weight against
/// the brute-force oracle, or a closed form against its expanded form).
///
/// Each route performs at most a few hundred additions of O(1) terms, so the
/// accumulated error stays within a few hundred ulps of 1 (~1e-13); 1e-12
/// leaves headroom without masking real defects.
pub const CROSS_CHECK_ABS: f64 = 1e-12;

/// Absolute tolerance for per-edge weight sums against 1 in float mode.
///
/// An edge sum on the largest supported inputs accumulates tens of thousands
/// of triangle weights, each itself a short alternating sum; 1e-9 bounds the
/// worst observed drift by several orders of magnitude.
pub const EDGE_SUM_ABS: f64 = 1e-9;

/// Slack allowed below zero for the minimum triangle weight on graphs whose
/// minimum degree clears the non-negativity threshold.
///
/// The weights are exact rationals in exact mode; in float mode only the
/// final rounding of a genuinely non-negative value can dip below zero, which
/// 1e-12 covers.
pub const NEG_WEIGHT_ABS: f64 = 1e-12;

/// Slack for objective monotonicity under a clamp step: the clamped value
/// must be at least the original minus this.
///
/// Objective evaluations are ~30 flops on O(1) operands, so a true tie can
/// stray by a few ulps only; 1e-12 is far above that.
pub const CLAMP_MONOTONE_ABS: f64 = 1e-12;

/// Absolute tolerance on the computed minimum-degree threshold constant.
pub const THRESHOLD_ABS: f64 = 1e-12;

/// Tolerance for grid-search optima against their closed-form values.
///
/// A grid of resolution ~2000 per axis lands within O(grid step squared) of a
/// smooth interior optimum and exactly on boundary optima; 1e-6 accommodates
/// the former.
pub const GRID_OPT_ABS: f64 = 1e-6;

/// Tolerance for the certification value against independently recomputed
/// closed-form arithmetic.
pub const CERTIFY_ABS: f64 = 1e-6;

/// Slack for program-domain box constraints in float mode.
///
/// Lower bounds like `x - d` or `x + y - 1` are recomputed from the point's
/// coordinates, so a point sitting exactly on the boundary (as every point
/// extracted from a graph does, with coordinates `k/n`) can miss by a few
/// ulps of 1. Exact arithmetic keeps the comparisons strict.
pub const DOMAIN_SLACK_ABS: f64 = 1e-12;

/// Default `--tol` for CLI verification runs (edge sums and negativity).
pub const DEFAULT_VERIFY_TOL: f64 = 1e-9;

/// Slack for the graph-to-program bound: an ordered-triangle normalized
/// weight may exceed the program optimum by at most this much in float mode.
pub const BRIDGE_SLACK_ABS: f64 = 1e-9;
