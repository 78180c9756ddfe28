//! Fractional triangle decompositions of dense graphs.
//!
//! Every edge of a graph whose minimum degree is large enough can be
//! covered by triangles with fractional multiplicities: this crate
//! computes an explicit such weighting. Each ordered 5-clique delegates
//! small edge gadgets down to triangles; summing the delegations gives a
//! weight per triangle whose per-edge sums are exactly one, and the
//! weights stay nonnegative once the degree deficiency `d = 1 - delta/n`
//! is below the critical value `(7 - sqrt 21)/14`.
//!
//! Two independent routes compute the weighting: a brute-force oracle
//! ([`decomp::w_oracle`]) that walks every ordered 5-clique, and a fast
//! recast ([`decomp::w_fast`], [`decomp::decompose`]) that only touches
//! common neighborhoods of each triangle. They agree exactly on every
//! graph where delegation is total, which the fast route verifies as it
//! runs.
//!
//! The nonnegativity threshold is certified through a chain of ten
//! maximization programs ([`program`]) that relax the weighting residual
//! step by step to a univariate closed form; [`program::search`] evaluates
//! the chain numerically and certifies deficiencies against it.

pub mod cliques;
pub mod decomp;
pub mod graph;
pub mod program;
pub mod report;
pub mod scalar;
pub mod tol;

pub use cliques::{enumerate_triangles, OrderedTriangle, Triangle};
pub use decomp::{decompose, decompose_with, DecompError, TriangleWeightReport};
pub use graph::{Graph, GraphError};
pub use program::search::{certify, solve_threshold, threshold_exact, Verdict};
pub use program::{check_domain, eval_objective, ProgramError, ProgramPoint, Var};
pub use scalar::{BigRat, Quad21, Rat128, Scalar};
