//! The chain of maximization programs bounding the weighting residual.
//!
//! The quantity under study is the residual `1 - 6 |N^({x1,x2})| w(O)` of
//! the recast triangle weighting. Replacing every neighborhood count by its
//! density and relaxing to worst-case bounds turns that residual into a
//! sequence of ten programs over box-like domains parameterized by the
//! degree deficiency `d = 1 - min_degree/n`. Each step of the chain fixes
//! variables at the boundary values that maximize the objective or
//! substitutes a dominating bound, so optimum values never decrease along
//! the chain (`clamp_step` performs one step and is tested for that
//! monotonicity). The terminal program has the closed form
//!
//! ```text
//! 3 d (1 - d) / (1 - 2d)^2
//! ```
//!
//! which stays at most one exactly while `7d^2 - 7d + 1 >= 0`, giving the
//! critical deficiency `d = (7 - sqrt 21)/14`.
//!
//! Levels 1 and 2 carry vector data (one entry per delegate seen by a
//! residual evaluation); levels 3 through 10 are scalar points. Everything
//! scalar is generic over [`Scalar`] so the terminal levels can be
//! evaluated in exact arithmetic.

pub mod search;

use std::collections::BTreeMap;
use std::fmt::{self, Display};
use std::str::FromStr;

use thiserror::Error;

use crate::scalar::Scalar;

/// Scalar program variables.
///
/// On the graph side, for a visit (ordering (x1,x2,x3), delegate y, second
/// delegate z), the densities are: `x` of deg(x1), `y` of deg(y), `e0` of
/// N^({x1,x2}), `e` of N^({x1,y}), `f` of N^({y,z})`, `q0` of
/// N^({x1,x2,y}), `q` of N^({x1,y,z}), `p` of N^({x1,x2,y,z}), `r0` of
/// N^({x1,x2,x3}), `r` of N^({x1,x2,x3,y}). Levels 7 and 8 switch to the
/// slack coordinates `a = x - e0` and `b = y - f`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    X,
    Y,
    E0,
    E,
    F,
    Q0,
    Q,
    P,
    R0,
    R,
    A,
    B,
}

impl Var {
    pub const ALL: [Var; 12] = [
        Var::X,
        Var::Y,
        Var::E0,
        Var::E,
        Var::F,
        Var::Q0,
        Var::Q,
        Var::P,
        Var::R0,
        Var::R,
        Var::A,
        Var::B,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
            Var::E0 => "e0",
            Var::E => "e",
            Var::F => "f",
            Var::Q0 => "q0",
            Var::Q => "q",
            Var::P => "p",
            Var::R0 => "r0",
            Var::R => "r",
            Var::A => "a",
            Var::B => "b",
        }
    }
}

impl Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Var {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Var::ALL
            .iter()
            .copied()
            .find(|v| v.name() == s)
            .ok_or_else(|| format!("unknown variable `{s}`"))
    }
}

/// Scalar variables carried by each level; `None` for the vector levels.
pub fn level_vars(level: u8) -> Option<&'static [Var]> {
    match level {
        3 | 4 => Some(&[
            Var::X,
            Var::Y,
            Var::E0,
            Var::E,
            Var::F,
            Var::Q0,
            Var::Q,
            Var::P,
            Var::R0,
            Var::R,
        ]),
        5 => Some(&[Var::X, Var::Y, Var::E0, Var::E, Var::F, Var::Q0]),
        6 => Some(&[Var::X, Var::Y, Var::E0, Var::E, Var::F]),
        7 => Some(&[Var::X, Var::Y, Var::A, Var::B]),
        8 => Some(&[Var::X, Var::A, Var::B]),
        9 => Some(&[Var::A, Var::B]),
        10 => Some(&[Var::B]),
        _ => None,
    }
}

/// One second-delegate entry of a vector point.
#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    pub f: f64,
    pub q: f64,
    pub p: f64,
}

/// One delegate entry of a vector point.
#[derive(Clone, Debug, PartialEq)]
pub struct Leg {
    pub y: f64,
    pub e: f64,
    pub q0: f64,
    pub r: f64,
    pub branches: Vec<Branch>,
}

/// Data of a level 1 or 2 point: the per-delegate view a residual
/// evaluation produces, before any maximization collapses it. At level 2
/// every leg carries exactly one branch.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorPoint {
    pub x: f64,
    pub e0: f64,
    pub r0: f64,
    pub legs: Vec<Leg>,
}

/// Caps the vector sizes: these points mirror common-neighborhood walks of
/// test graphs, which stay tiny, and the cap keeps domain checks and clamp
/// arguments O(1) per point.
pub const MAX_VECTOR_ENTRIES: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub enum PointData<S> {
    Scalars(BTreeMap<Var, S>),
    Vectors(VectorPoint),
}

/// A point of one program level: the level tag, the deficiency `d` the
/// domain is parameterized by, and the level's data.
#[derive(Clone, Debug, PartialEq)]
pub struct ProgramPoint<S: Scalar = f64> {
    level: u8,
    d: S,
    data: PointData<S>,
}

impl<S: Scalar> ProgramPoint<S> {
    pub fn from_scalars(level: u8, d: S, vars: BTreeMap<Var, S>) -> Self {
        ProgramPoint {
            level,
            d,
            data: PointData::Scalars(vars),
        }
    }

    pub fn from_vectors(level: u8, d: S, vp: VectorPoint) -> Self {
        ProgramPoint {
            level,
            d,
            data: PointData::Vectors(vp),
        }
    }

    pub fn level(&self) -> u8 {
        self.level
    }

    pub fn d(&self) -> S {
        self.d.clone()
    }

    /// The same point with the domain reparameterized to another
    /// deficiency. Domains only loosen as `d` grows, so rebasing to a
    /// larger `d` preserves membership.
    pub fn with_d(&self, d: S) -> Self {
        ProgramPoint {
            level: self.level,
            d,
            data: self.data.clone(),
        }
    }

    pub fn get(&self, v: Var) -> Option<&S> {
        match &self.data {
            PointData::Scalars(m) => m.get(&v),
            PointData::Vectors(_) => None,
        }
    }

    pub fn scalars(&self) -> Option<&BTreeMap<Var, S>> {
        match &self.data {
            PointData::Scalars(m) => Some(m),
            PointData::Vectors(_) => None,
        }
    }

    pub fn vectors(&self) -> Option<&VectorPoint> {
        match &self.data {
            PointData::Vectors(v) => Some(v),
            PointData::Scalars(_) => None,
        }
    }
}

/// A named domain constraint that does not hold at a point.
#[derive(Clone, Debug, Error, PartialEq)]
#[error("level {level}: constraint `{constraint}` fails ({detail})")]
pub struct DomainViolation {
    pub level: u8,
    pub constraint: String,
    pub detail: String,
}

#[derive(Debug, Error, PartialEq)]
pub enum ProgramError {
    #[error(transparent)]
    Domain(#[from] DomainViolation),
    #[error("level {0} does not support this operation")]
    BadLevel(u8),
    #[error("point data does not match level {0}")]
    DataMismatch(u8),
    #[error("missing variable {0}")]
    MissingVar(Var),
    #[error("unexpected variable {0} at level {1}")]
    UnexpectedVar(Var, u8),
    #[error("value {0} has no exact representation in the chosen arithmetic")]
    Inexact(f64),
    #[error("{0}")]
    BadParameter(String),
    #[error("helper function expects {expected} arguments, got {got}")]
    BadArity { expected: usize, got: usize },
    #[error("sampling rejected {rejected} candidates without finding a point")]
    SamplerStarved { rejected: u64 },
}

fn violation<S: Display>(level: u8, constraint: &str, detail: S) -> ProgramError {
    ProgramError::Domain(DomainViolation {
        level,
        constraint: constraint.to_string(),
        detail: detail.to_string(),
    })
}

struct Dom<'a> {
    level: u8,
    ctx: &'a str,
}

impl<'a> Dom<'a> {
    fn le<S: Scalar>(&self, constraint: &str, lo: &S, hi: &S) -> Result<(), ProgramError> {
        // Float points sit ulps off recomputed bounds; exact ones must not.
        let pass =
            lo <= hi || (!S::EXACT && lo.to_f64() - hi.to_f64() <= crate::tol::DOMAIN_SLACK_ABS);
        if pass {
            Ok(())
        } else {
            Err(violation(
                self.level,
                constraint,
                format!("{lo} > {hi}{}", self.ctx),
            ))
        }
    }

    fn lt<S: Scalar>(&self, constraint: &str, lo: &S, hi: &S) -> Result<(), ProgramError> {
        if lo < hi {
            Ok(())
        } else {
            Err(violation(
                self.level,
                constraint,
                format!("{lo} >= {hi}{}", self.ctx),
            ))
        }
    }
}

fn check_d<S: Scalar>(level: u8, d: &S) -> Result<(), ProgramError> {
    let dom = Dom { level, ctx: "" };
    dom.lt("0 < d", &S::zero(), d)?;
    dom.lt("d < 1/4", &(S::from_count(4) * d.clone()), &S::one())?;
    Ok(())
}

/// Checks that the point lies in its level's domain: `0 < d < 1/4`, the
/// exact variable set for the level, and the box constraints. The first
/// failing constraint is reported by name.
pub fn check_domain<S: Scalar>(pt: &ProgramPoint<S>) -> Result<(), ProgramError> {
    check_d(pt.level, &pt.d)?;
    match (&pt.data, level_vars(pt.level)) {
        (PointData::Scalars(m), Some(vars)) => check_domain_scalars(pt.level, &pt.d, m, vars),
        (PointData::Vectors(vp), None) if pt.level == 1 || pt.level == 2 => {
            check_domain_vectors(pt.level, &pt.d, vp)
        }
        _ => Err(ProgramError::DataMismatch(pt.level)),
    }
}

fn check_domain_scalars<S: Scalar>(
    level: u8,
    d: &S,
    m: &BTreeMap<Var, S>,
    vars: &'static [Var],
) -> Result<(), ProgramError> {
    for v in m.keys() {
        if !vars.contains(v) {
            return Err(ProgramError::UnexpectedVar(*v, level));
        }
    }
    for v in vars {
        if !m.contains_key(v) {
            return Err(ProgramError::MissingVar(*v));
        }
    }
    let g = |v: Var| m.get(&v).unwrap();
    let one = S::one();
    let zero = S::zero();
    let dom = Dom { level, ctx: "" };

    if vars.contains(&Var::X) {
        dom.le("1-d <= x", &(one.clone() - d.clone()), g(Var::X))?;
        dom.le("x <= 1", g(Var::X), &one)?;
    }
    if vars.contains(&Var::Y) {
        dom.le("1-d <= y", &(one.clone() - d.clone()), g(Var::Y))?;
        dom.le("y <= 1", g(Var::Y), &one)?;
    }
    if vars.contains(&Var::E0) {
        let x = g(Var::X);
        dom.le("x-d <= e0", &(x.clone() - d.clone()), g(Var::E0))?;
        dom.le("e0 <= x", g(Var::E0), x)?;
    }
    if vars.contains(&Var::E) {
        let xy1 = g(Var::X).clone() + g(Var::Y).clone() - one.clone();
        dom.le("x+y-1 <= e", &xy1, g(Var::E))?;
        dom.le("e <= 1", g(Var::E), &one)?;
    }
    if vars.contains(&Var::F) {
        let y = g(Var::Y);
        dom.le("y-d <= f", &(y.clone() - d.clone()), g(Var::F))?;
        dom.le("f <= y", g(Var::F), y)?;
    }
    if vars.contains(&Var::Q0) {
        let lo = g(Var::E).clone() + g(Var::E0).clone() - g(Var::X).clone();
        dom.le("e+e0-x <= q0", &lo, g(Var::Q0))?;
        dom.le("q0 <= 1", g(Var::Q0), &one)?;
    }
    if vars.contains(&Var::Q) {
        let lo = g(Var::E).clone() + g(Var::F).clone() - g(Var::Y).clone();
        dom.le("e+f-y <= q", &lo, g(Var::Q))?;
        dom.le("q <= 1", g(Var::Q), &one)?;
    }
    if vars.contains(&Var::P) {
        let lo = g(Var::Q0).clone() + g(Var::F).clone() - g(Var::Y).clone();
        dom.le("q0+f-y <= p", &lo, g(Var::P))?;
        dom.le("p <= 1", g(Var::P), &one)?;
    }
    if vars.contains(&Var::R0) {
        dom.le("0 <= r0", &zero, g(Var::R0))?;
        dom.le("r0 <= e0", g(Var::R0), g(Var::E0))?;
    }
    if vars.contains(&Var::R) {
        dom.le("0 <= r", &zero, g(Var::R))?;
        dom.le("r <= q0", g(Var::R), g(Var::Q0))?;
    }
    if vars.contains(&Var::A) {
        dom.le("0 <= a", &zero, g(Var::A))?;
        dom.le("a <= d", g(Var::A), d)?;
    }
    if vars.contains(&Var::B) {
        dom.le("0 <= b", &zero, g(Var::B))?;
        dom.le("b <= d", g(Var::B), d)?;
    }
    Ok(())
}

fn check_domain_vectors<S: Scalar>(level: u8, d: &S, vp: &VectorPoint) -> Result<(), ProgramError> {
    let emb = |x: f64| S::from_f64_exact(x).ok_or(ProgramError::Inexact(x));
    let one = S::one();
    let zero = S::zero();
    if vp.legs.len() > MAX_VECTOR_ENTRIES {
        return Err(violation(
            level,
            "R0 <= 16",
            format!("{} legs", vp.legs.len()),
        ));
    }
    let dom = Dom { level, ctx: "" };
    let x = emb(vp.x)?;
    let e0 = emb(vp.e0)?;
    let r0 = emb(vp.r0)?;
    dom.le("1-d <= x", &(one.clone() - d.clone()), &x)?;
    dom.le("x <= 1", &x, &one)?;
    dom.le("x-d <= e0", &(x.clone() - d.clone()), &e0)?;
    dom.le("e0 <= x", &e0, &x)?;
    dom.le("0 <= r0", &zero, &r0)?;
    dom.le("r0 <= e0", &r0, &e0)?;
    for (i, leg) in vp.legs.iter().enumerate() {
        let ctx = format!(" in leg {i}");
        let dom = Dom { level, ctx: &ctx };
        if leg.branches.len() > MAX_VECTOR_ENTRIES {
            return Err(violation(
                level,
                "R_i <= 16",
                format!("{} branches in leg {i}", leg.branches.len()),
            ));
        }
        if level == 2 && leg.branches.len() != 1 {
            return Err(violation(
                level,
                "R_i == 1",
                format!("{} branches in leg {i}", leg.branches.len()),
            ));
        }
        let y = emb(leg.y)?;
        let e = emb(leg.e)?;
        let q0 = emb(leg.q0)?;
        let r = emb(leg.r)?;
        dom.le("1-d <= y", &(one.clone() - d.clone()), &y)?;
        dom.le("y <= 1", &y, &one)?;
        dom.le("x+y-1 <= e", &(x.clone() + y.clone() - one.clone()), &e)?;
        dom.le("e <= 1", &e, &one)?;
        dom.le("e+e0-x <= q0", &(e.clone() + e0.clone() - x.clone()), &q0)?;
        dom.le("q0 <= 1", &q0, &one)?;
        dom.le("0 <= r", &zero, &r)?;
        dom.le("r <= q0", &r, &q0)?;
        for (j, br) in leg.branches.iter().enumerate() {
            let ctx = format!(" in leg {i} branch {j}");
            let dom = Dom { level, ctx: &ctx };
            let f = emb(br.f)?;
            let q = emb(br.q)?;
            let p = emb(br.p)?;
            dom.le("y-d <= f", &(y.clone() - d.clone()), &f)?;
            dom.le("f <= y", &f, &y)?;
            dom.le("e+f-y <= q", &(e.clone() + f.clone() - y.clone()), &q)?;
            dom.le("q <= 1", &q, &one)?;
            dom.le("q0+f-y <= p", &(q0.clone() + f.clone() - y.clone()), &p)?;
            dom.le("p <= 1", &p, &one)?;
        }
    }
    Ok(())
}

fn recip<S: Scalar>(v: &S) -> S {
    S::one() / v.clone()
}

/// The inner delegate term `A = (1/q0)(1/e - 1/e0)`.
fn term_a<S: Scalar>(e0: &S, e: &S, q0: &S) -> S {
    recip(q0) * (recip(e) - recip(e0))
}

/// The inner second-delegate term `B = (1/p)((1/q)(1/e - 1/f) + A)`.
fn term_b<S: Scalar>(e0: &S, e: &S, f: &S, q0: &S, q: &S, p: &S) -> S {
    recip(p) * (recip(q) * (recip(e) - recip(f)) + term_a(e0, e, q0))
}

/// Objective of the vector levels 1 and 2. Level 1 averages the branch
/// terms per leg; level 2 has the branch already chosen. A point with no
/// legs evaluates to zero.
pub fn eval_vector_objective<S: Scalar>(pt: &ProgramPoint<S>) -> Result<S, ProgramError> {
    let vp = match (&pt.data, pt.level) {
        (PointData::Vectors(vp), 1 | 2) => vp,
        _ => return Err(ProgramError::DataMismatch(pt.level)),
    };
    let emb = |x: f64| S::from_f64_exact(x).ok_or(ProgramError::Inexact(x));
    if vp.legs.is_empty() {
        return Ok(S::zero());
    }
    if pt.level == 2 && vp.legs.iter().any(|l| l.branches.len() != 1) {
        return Err(ProgramError::DataMismatch(2));
    }
    let e0 = emb(vp.e0)?;
    let r0 = emb(vp.r0)?;
    let count_r0 = S::from_count(vp.legs.len() as u64);
    let mut total = S::zero();
    for leg in &vp.legs {
        let e = emb(leg.e)?;
        let q0 = emb(leg.q0)?;
        let r = emb(leg.r)?;
        let a = term_a(&e0, &e, &q0);
        let leg_term = match pt.level {
            1 => {
                if leg.branches.is_empty() {
                    a
                } else {
                    let count_r = S::from_count(leg.branches.len() as u64);
                    let mut bsum = S::zero();
                    for br in &leg.branches {
                        bsum = bsum + term_b(&e0, &e, &emb(br.f)?, &q0, &emb(br.q)?, &emb(br.p)?);
                    }
                    a + (r / count_r) * bsum
                }
            }
            _ => {
                let br = &leg.branches[0];
                let b = term_b(&e0, &e, &emb(br.f)?, &q0, &emb(br.q)?, &emb(br.p)?);
                a + r * b
            }
        };
        total = total + leg_term;
    }
    Ok(e0 * (r0 / count_r0) * total)
}

/// The terminal objective `(1-d)d/(1-2d)^2 + (1-d)^2(d-b)/((1-2d-b)^2(1-d-b))
/// + (1-d)d/((1-2d-b)(1-2d))`; at `b = 0` it collapses to
/// `3d(1-d)/(1-2d)^2`.
pub fn eval_w10<S: Scalar>(d: &S, b: &S) -> S {
    let one = S::one();
    let two = S::from_count(2);
    let omd = one.clone() - d.clone();
    let om2d = one.clone() - two * d.clone();
    let om2db = om2d.clone() - b.clone();
    let omdb = omd.clone() - b.clone();
    let t1 = omd.clone() * d.clone() / (om2d.clone() * om2d.clone());
    let t2 = omd.clone() * omd.clone() * (d.clone() - b.clone())
        / (om2db.clone() * om2db.clone() * omdb);
    let t3 = omd * d.clone() / (om2db * om2d);
    t1 + t2 + t3
}

/// Objective value of a point at its level. Levels 1 and 2 take the vector
/// form; levels 3 through 10 the scalar forms. The formulas are applied
/// literally and assume the point is on-domain; run [`check_domain`] first
/// when that is not known.
pub fn eval_objective<S: Scalar>(pt: &ProgramPoint<S>) -> Result<S, ProgramError> {
    let m = match (&pt.data, pt.level) {
        (PointData::Vectors(_), 1 | 2) => return eval_vector_objective(pt),
        (PointData::Scalars(m), 3..=10) => m,
        _ => return Err(ProgramError::DataMismatch(pt.level)),
    };
    let vars = level_vars(pt.level).expect("scalar level");
    for v in vars {
        if !m.contains_key(v) {
            return Err(ProgramError::MissingVar(*v));
        }
    }
    let g = |v: Var| m.get(&v).unwrap().clone();
    let d = pt.d.clone();
    let one = S::one();
    Ok(match pt.level {
        3 => {
            let (e0, e, f) = (g(Var::E0), g(Var::E), g(Var::F));
            let (q0, q, p) = (g(Var::Q0), g(Var::Q), g(Var::P));
            let (r0, r) = (g(Var::R0), g(Var::R));
            let a = term_a(&e0, &e, &q0);
            let b = term_b(&e0, &e, &f, &q0, &q, &p);
            e0 * r0 * (a + r * b)
        }
        4 => {
            let (e0, e, f) = (g(Var::E0), g(Var::E), g(Var::F));
            let (q0, q, p) = (g(Var::Q0), g(Var::Q), g(Var::P));
            let (r0, r) = (g(Var::R0), g(Var::R));
            let t1 = r0.clone() * (e0.clone() - e.clone()).ramp() / (q0.clone() * e.clone());
            let t2 = e0.clone() * r0.clone() * r.clone() * (f.clone() - e.clone()).ramp()
                / (p.clone() * q * e.clone() * f);
            let t3 = e0.clone() * r0 * r * (e0.clone() - e.clone()).ramp() / (p * q0 * e * e0);
            t1 + t2 + t3
        }
        5 => {
            let (y, e0, e) = (g(Var::Y), g(Var::E0), g(Var::E));
            let (f, q0) = (g(Var::F), g(Var::Q0));
            let p5 = q0.clone() + f.clone() - y.clone();
            let q5 = e.clone() + f.clone() - y;
            let t1 = e0.clone() * (e0.clone() - e.clone()).ramp() / (q0.clone() * e.clone());
            let t2 = e0.clone() * e0.clone() * q0 * (f.clone() - e.clone()).ramp()
                / (p5.clone() * q5 * e.clone() * f);
            let t3 = e0.clone() * (e0 - e.clone()).ramp() / (p5 * e);
            t1 + t2 + t3
        }
        6 => {
            let (x, y, e0) = (g(Var::X), g(Var::Y), g(Var::E0));
            let (e, f) = (g(Var::E), g(Var::F));
            let q06 = e.clone() + e0.clone() - x;
            let p6 = q06.clone() + f.clone() - y.clone();
            let q6 = e.clone() + f.clone() - y;
            let t1 = e0.clone() * (e0.clone() - e.clone()).ramp() / (q06.clone() * e.clone());
            let t2 = e0.clone() * e0.clone() * q06 * (f.clone() - e.clone()).ramp()
                / (p6.clone() * q6 * e.clone() * f);
            let t3 = e0.clone() * (e0 - e.clone()).ramp() / (p6 * e);
            t1 + t2 + t3
        }
        7 => {
            let (x, y, a, b) = (g(Var::X), g(Var::Y), g(Var::A), g(Var::B));
            let s = x.clone() + y.clone() - one.clone();
            let xa = x.clone() - a.clone();
            let sa = s.clone() - a.clone();
            let sab = sa.clone() - b.clone();
            let t1 = xa.clone() * (one.clone() - y.clone() - a.clone()).ramp()
                / (sa.clone() * s.clone());
            let t2 = xa.clone() * xa.clone() * sa * (one.clone() - x - b.clone()).ramp()
                / (sab.clone() * (s.clone() - b.clone()) * s.clone() * (y.clone() - b));
            let t3 = xa * (one - y - a).ramp() / (sab * s);
            t1 + t2 + t3
        }
        8 => {
            let (x, a, b) = (g(Var::X), g(Var::A), g(Var::B));
            let s = x.clone() - d.clone();
            let xa = x.clone() - a.clone();
            let sa = s.clone() - a.clone();
            let sab = sa.clone() - b.clone();
            let t1 = xa.clone() * (d.clone() - a.clone()).ramp() / (sa.clone() * s.clone());
            let t2 = xa.clone() * xa.clone() * sa * (one.clone() - x - b.clone()).ramp()
                / (sab.clone()
                    * (s.clone() - b.clone())
                    * s.clone()
                    * (one.clone() - d.clone() - b));
            let t3 = xa * (d - a).ramp() / (sab * s);
            t1 + t2 + t3
        }
        9 => {
            let (a, b) = (g(Var::A), g(Var::B));
            let two = S::from_count(2);
            let omd = one.clone() - d.clone();
            let om2d = one.clone() - two * d.clone();
            let omda = omd.clone() - a.clone();
            let om2da = om2d.clone() - a.clone();
            let om2dab = om2da.clone() - b.clone();
            let t1 = omda.clone() * (d.clone() - a.clone()) / (om2da.clone() * om2d.clone());
            let t2 = omda.clone() * omda.clone() * om2da * (d.clone() - b.clone())
                / (om2dab.clone() * (om2d.clone() - b.clone()) * om2d.clone() * (omd - b));
            let t3 = omda * (d - a) / (om2dab * om2d);
            t1 + t2 + t3
        }
        _ => eval_w10(&d, &g(Var::B)),
    })
}

/// One step of the chain: moves a point of level L to level L+1 (level 10
/// maps to itself with `b = 0`, its fixed point), keeping `d`.
///
/// The steps are: pick the best branch per leg (1 to 2), pick the best leg
/// (2 to 3), ramp the objective (3 to 4, coordinates unchanged), substitute
/// the extreme values `r0 = e0`, `r = q0`, `p = q0+f-y`, `q = e+f-y`
/// (4 to 5), then `q0 = e+e0-x` (5 to 6), switch to slack coordinates
/// `a = x-e0`, `b = y-f` with `e = x+y-1` (6 to 7), then drop `y` (7 to 8),
/// drop `x` (8 to 9), and set `a = 0` (9 to 10). Every step's objective
/// dominates the previous one on-domain. The input must be on-domain.
pub fn clamp_step<S: Scalar>(pt: &ProgramPoint<S>) -> Result<ProgramPoint<S>, ProgramError> {
    check_domain(pt)?;
    let d = pt.d.clone();
    match (&pt.data, pt.level) {
        (PointData::Vectors(vp), 1) => {
            let e0 = embed::<S>(vp.e0)?;
            let mut out = vp.clone();
            for (i, leg) in vp.legs.iter().enumerate() {
                if leg.branches.is_empty() {
                    return Err(violation(
                        1,
                        "R_i >= 1",
                        format!("leg {i} has no branches to choose from"),
                    ));
                }
                let e = embed::<S>(leg.e)?;
                let q0 = embed::<S>(leg.q0)?;
                let mut best = 0usize;
                let mut best_val: Option<S> = None;
                for (j, br) in leg.branches.iter().enumerate() {
                    let val = term_b(
                        &e0,
                        &e,
                        &embed::<S>(br.f)?,
                        &q0,
                        &embed::<S>(br.q)?,
                        &embed::<S>(br.p)?,
                    );
                    if best_val.as_ref().is_none_or(|bv| val > *bv) {
                        best = j;
                        best_val = Some(val);
                    }
                }
                out.legs[i].branches = vec![leg.branches[best].clone()];
            }
            Ok(ProgramPoint::from_vectors(2, d, out))
        }
        (PointData::Vectors(vp), 2) => {
            if vp.legs.is_empty() {
                return Err(violation(2, "R0 >= 1", "no legs to choose from"));
            }
            let e0 = embed::<S>(vp.e0)?;
            let mut best = 0usize;
            let mut best_val: Option<S> = None;
            for (i, leg) in vp.legs.iter().enumerate() {
                let e = embed::<S>(leg.e)?;
                let q0 = embed::<S>(leg.q0)?;
                let r = embed::<S>(leg.r)?;
                let br = &leg.branches[0];
                let val = term_a(&e0, &e, &q0)
                    + r * term_b(
                        &e0,
                        &e,
                        &embed::<S>(br.f)?,
                        &q0,
                        &embed::<S>(br.q)?,
                        &embed::<S>(br.p)?,
                    );
                if best_val.as_ref().is_none_or(|bv| val > *bv) {
                    best = i;
                    best_val = Some(val);
                }
            }
            let leg = &vp.legs[best];
            let br = &leg.branches[0];
            let mut m = BTreeMap::new();
            m.insert(Var::X, embed::<S>(vp.x)?);
            m.insert(Var::Y, embed::<S>(leg.y)?);
            m.insert(Var::E0, embed::<S>(vp.e0)?);
            m.insert(Var::E, embed::<S>(leg.e)?);
            m.insert(Var::F, embed::<S>(br.f)?);
            m.insert(Var::Q0, embed::<S>(leg.q0)?);
            m.insert(Var::Q, embed::<S>(br.q)?);
            m.insert(Var::P, embed::<S>(br.p)?);
            m.insert(Var::R0, embed::<S>(vp.r0)?);
            m.insert(Var::R, embed::<S>(leg.r)?);
            Ok(ProgramPoint::from_scalars(3, d, m))
        }
        (PointData::Scalars(m), 3) => Ok(ProgramPoint::from_scalars(4, d, m.clone())),
        (PointData::Scalars(m), 4) => Ok(ProgramPoint::from_scalars(
            5,
            d,
            keep(m, level_vars(5).unwrap()),
        )),
        (PointData::Scalars(m), 5) => Ok(ProgramPoint::from_scalars(
            6,
            d,
            keep(m, level_vars(6).unwrap()),
        )),
        (PointData::Scalars(m), 6) => {
            let mut out = BTreeMap::new();
            out.insert(Var::X, m[&Var::X].clone());
            out.insert(Var::Y, m[&Var::Y].clone());
            out.insert(Var::A, m[&Var::X].clone() - m[&Var::E0].clone());
            out.insert(Var::B, m[&Var::Y].clone() - m[&Var::F].clone());
            Ok(ProgramPoint::from_scalars(7, d, out))
        }
        (PointData::Scalars(m), 7) => Ok(ProgramPoint::from_scalars(
            8,
            d,
            keep(m, level_vars(8).unwrap()),
        )),
        (PointData::Scalars(m), 8) => Ok(ProgramPoint::from_scalars(
            9,
            d,
            keep(m, level_vars(9).unwrap()),
        )),
        (PointData::Scalars(m), 9) => Ok(ProgramPoint::from_scalars(
            10,
            d,
            keep(m, level_vars(10).unwrap()),
        )),
        (PointData::Scalars(_), 10) => {
            let mut out = BTreeMap::new();
            out.insert(Var::B, S::zero());
            Ok(ProgramPoint::from_scalars(10, d, out))
        }
        _ => Err(ProgramError::DataMismatch(pt.level)),
    }
}

fn embed<S: Scalar>(x: f64) -> Result<S, ProgramError> {
    S::from_f64_exact(x).ok_or(ProgramError::Inexact(x))
}

fn keep<S: Scalar>(m: &BTreeMap<Var, S>, vars: &[Var]) -> BTreeMap<Var, S> {
    m.iter()
        .filter(|(v, _)| vars.contains(v))
        .map(|(v, s)| (*v, s.clone()))
        .collect()
}

/// Helper functions used by the threshold certification.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HelperName {
    /// `E(b) = (-1+5d-13d^2-12d^3) + b(-5d+10d^2) + b^2(2d)`; nonpositive
    /// on `b in [0, d]` for `d <= 1/5`.
    E,
    /// `G(b) = (1-d)(1-2d)(d-b)/((1-2d-b)^2(1-d-b)) + d/(1-2d-b)`, with
    /// `G(0) = 2d/(1-2d)`.
    G,
    /// `F(b) = (1-2d)(2d(1-d)(1-2d) + b(-1+d+d^2) + b^2 d)
    ///        - 2d(1-2d-b)^2(1-d-b)`, with `F(0) = 0`; related to G by
    /// `(G(0) - G(b)) (1-2d)(1-2d-b)^2(1-d-b) = -F(b)`.
    F,
    /// `H1(s,t) = t(1-d-s)/((1-2d-s)(1-2d-s-t))`; bounded by 2 on
    /// `[0,d]^2` exactly when `26d^2 - 15d + 2 >= 0`.
    H1,
}

impl HelperName {
    pub fn arity(&self) -> usize {
        match self {
            HelperName::H1 => 2,
            _ => 1,
        }
    }
}

/// Evaluates one of the certification helpers at the given arguments and
/// deficiency, literally as documented on [`HelperName`].
pub fn lemma_fn<S: Scalar>(name: HelperName, args: &[S], d: &S) -> Result<S, ProgramError> {
    if args.len() != name.arity() {
        return Err(ProgramError::BadArity {
            expected: name.arity(),
            got: args.len(),
        });
    }
    let one = S::one();
    let two = S::from_count(2);
    Ok(match name {
        HelperName::E => {
            let b = args[0].clone();
            let d2 = d.clone() * d.clone();
            let d3 = d2.clone() * d.clone();
            let c0 = -one.clone() + S::from_count(5) * d.clone()
                - S::from_count(13) * d2.clone()
                - S::from_count(12) * d3;
            let c1 = -(S::from_count(5) * d.clone()) + S::from_count(10) * d2;
            let c2 = two * d.clone();
            c0 + b.clone() * c1 + b.clone() * b * c2
        }
        HelperName::G => {
            let b = args[0].clone();
            let omd = one.clone() - d.clone();
            let om2d = one.clone() - two * d.clone();
            let om2db = om2d.clone() - b.clone();
            let omdb = omd.clone() - b.clone();
            omd * om2d * (d.clone() - b) / (om2db.clone() * om2db.clone() * omdb)
                + d.clone() / om2db
        }
        HelperName::F => {
            let b = args[0].clone();
            let omd = one.clone() - d.clone();
            let om2d = one.clone() - two.clone() * d.clone();
            let om2db = om2d.clone() - b.clone();
            let omdb = omd.clone() - b.clone();
            let inner = two.clone() * d.clone() * omd * om2d.clone()
                + b.clone() * (-one.clone() + d.clone() + d.clone() * d.clone())
                + b.clone() * b * d.clone();
            om2d * inner - two * d.clone() * om2db.clone() * om2db * omdb
        }
        HelperName::H1 => {
            let s = args[0].clone();
            let t = args[1].clone();
            let omds = one.clone() - d.clone() - s.clone();
            let om2ds = one.clone() - two * d.clone() - s;
            t.clone() * omds / (om2ds.clone() * (om2ds - t))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{BigRat, Quad21};
    use num_bigint::BigInt;

    fn pt(level: u8, d: f64, vals: &[(Var, f64)]) -> ProgramPoint {
        ProgramPoint::from_scalars(level, d, vals.iter().copied().collect())
    }

    fn k5_point() -> ProgramPoint {
        pt(
            3,
            0.2,
            &[
                (Var::X, 0.8),
                (Var::Y, 0.8),
                (Var::E0, 0.6),
                (Var::E, 0.6),
                (Var::F, 0.6),
                (Var::Q0, 0.4),
                (Var::Q, 0.4),
                (Var::P, 0.2),
                (Var::R0, 0.4),
                (Var::R, 0.2),
            ],
        )
    }

    #[test]
    fn var_names_round_trip() {
        for v in Var::ALL {
            assert_eq!(v.name().parse::<Var>().unwrap(), v);
        }
        assert!("z".parse::<Var>().is_err());
    }

    #[test]
    fn k5_point_is_on_domain_with_zero_objective() {
        let p = k5_point();
        check_domain(&p).unwrap();
        assert_eq!(eval_objective(&p).unwrap(), 0.0);
    }

    #[test]
    fn domain_violations_are_named() {
        let mut bad = k5_point();
        if let PointData::Scalars(m) = &mut bad.data {
            m.insert(Var::E0, 0.59);
        }
        let err = check_domain(&bad).unwrap_err();
        match err {
            ProgramError::Domain(v) => assert_eq!(v.constraint, "x-d <= e0"),
            other => panic!("unexpected error {other:?}"),
        }

        let off_d = pt(10, 0.3, &[(Var::B, 0.0)]);
        match check_domain(&off_d).unwrap_err() {
            ProgramError::Domain(v) => assert_eq!(v.constraint, "d < 1/4"),
            other => panic!("unexpected error {other:?}"),
        }

        let missing = pt(9, 0.17, &[(Var::A, 0.0)]);
        assert_eq!(
            check_domain(&missing).unwrap_err(),
            ProgramError::MissingVar(Var::B)
        );
    }

    #[test]
    fn terminal_value_is_exact_at_the_threshold() {
        let d = Quad21::threshold();
        let w = eval_w10(&d, &Quad21::from_ratio(0, 1));
        assert_eq!(w, Quad21::from_ratio(1, 1));

        let mut m = BTreeMap::new();
        m.insert(Var::B, Quad21::from_ratio(0, 1));
        let p10: ProgramPoint<Quad21> = ProgramPoint::from_scalars(10, d, m);
        assert_eq!(eval_objective(&p10).unwrap(), Quad21::from_ratio(1, 1));
    }

    #[test]
    fn terminal_closed_form_matches_float() {
        for d in [0.05, 0.1, 0.15, 0.17, 0.172] {
            let w = eval_w10(&d, &0.0);
            let closed = 3.0 * d * (1.0 - d) / ((1.0 - 2.0 * d) * (1.0 - 2.0 * d));
            assert!((w - closed).abs() < 1e-13, "d = {d}");
        }
    }

    #[test]
    fn chain_from_k5_point_reaches_the_terminal_value() {
        let mut p = k5_point();
        let mut prev = eval_objective(&p).unwrap();
        loop {
            let next = clamp_step(&p).unwrap();
            let val = eval_objective(&next).unwrap();
            assert!(
                val >= prev - crate::tol::CLAMP_MONOTONE_ABS,
                "level {} -> {}: {prev} -> {val}",
                p.level(),
                next.level()
            );
            let terminal = p.level() == 10;
            p = next;
            prev = val;
            if terminal {
                break;
            }
        }
        assert_eq!(p.level(), 10);
        assert_eq!(p.get(Var::B), Some(&0.0));
        let want = 3.0 * 0.2 * 0.8 / (0.6 * 0.6);
        assert!((prev - want).abs() < 1e-12);

        // The terminal point is a fixed point of the step.
        let again = clamp_step(&p).unwrap();
        assert_eq!(again, p);
    }

    #[test]
    fn vector_levels_collapse_to_their_best_entries() {
        let d = 0.2;
        let branch_weak = Branch {
            f: 0.62,
            q: 0.5,
            p: 0.4,
        };
        let branch_strong = Branch {
            f: 0.8,
            q: 0.7,
            p: 0.6,
        };
        let vp = VectorPoint {
            x: 0.85,
            e0: 0.7,
            r0: 0.5,
            legs: vec![
                Leg {
                    y: 0.8,
                    e: 0.66,
                    q0: 0.55,
                    r: 0.4,
                    branches: vec![branch_weak.clone(), branch_strong.clone()],
                },
                Leg {
                    y: 0.82,
                    e: 0.69,
                    q0: 0.6,
                    r: 0.5,
                    branches: vec![branch_weak.clone()],
                },
            ],
        };
        let p1 = ProgramPoint::from_vectors(1, d, vp);
        check_domain(&p1).unwrap();
        let v1: f64 = eval_objective(&p1).unwrap();

        let p2 = clamp_step(&p1).unwrap();
        assert_eq!(p2.level(), 2);
        check_domain(&p2).unwrap();
        let v2 = eval_objective(&p2).unwrap();
        assert!(v2 >= v1 - crate::tol::CLAMP_MONOTONE_ABS);

        let p3 = clamp_step(&p2).unwrap();
        assert_eq!(p3.level(), 3);
        check_domain(&p3).unwrap();
        let v3 = eval_objective(&p3).unwrap();
        assert!(v3 >= v2 - crate::tol::CLAMP_MONOTONE_ABS);
        // The first leg with its second branch dominates.
        assert_eq!(p3.get(Var::Y), Some(&0.8));
        assert_eq!(p3.get(Var::F), Some(&0.8));

        // An empty vector point evaluates to zero.
        let empty = ProgramPoint::from_vectors(
            1,
            d,
            VectorPoint {
                x: 0.85,
                e0: 0.7,
                r0: 0.0,
                legs: vec![],
            },
        );
        assert_eq!(eval_objective(&empty).unwrap(), 0.0);
    }

    #[test]
    fn helper_values_match_their_special_points() {
        let d = 0.17;
        let e0 = lemma_fn(HelperName::E, &[0.0], &d).unwrap();
        assert!((e0 - -0.584656).abs() < 1e-12);

        let g0 = lemma_fn(HelperName::G, &[0.0], &d).unwrap();
        assert!((g0 - 2.0 * d / (1.0 - 2.0 * d)).abs() < 1e-14);

        let f0 = lemma_fn(HelperName::F, &[0.0], &d).unwrap();
        assert!(f0.abs() < 1e-14);

        let d5 = 0.2 - 1e-9;
        let h = lemma_fn(HelperName::H1, &[d5, d5], &d5).unwrap();
        assert!((h - 1.499999956250001).abs() < 1e-12);

        assert_eq!(
            lemma_fn(HelperName::H1, &[0.1], &d).unwrap_err(),
            ProgramError::BadArity {
                expected: 2,
                got: 1
            }
        );
    }

    #[test]
    fn g_and_f_satisfy_their_exact_identity() {
        // (G(0) - G(b)) (1-2d)(1-2d-b)^2(1-d-b) = -F(b), checked in exact
        // rational arithmetic on a grid.
        let big = |n: i64, den: i64| BigRat::new(BigInt::from(n), BigInt::from(den));
        for dk in 1..=24i64 {
            let d = big(dk, 100);
            for bk in 0..=10i64 {
                let b = d.clone() * big(bk, 10);
                let g0 = lemma_fn(HelperName::G, &[<BigRat as Scalar>::zero()], &d).unwrap();
                let gb = lemma_fn(HelperName::G, std::slice::from_ref(&b), &d).unwrap();
                let fb = lemma_fn(HelperName::F, std::slice::from_ref(&b), &d).unwrap();
                let one = <BigRat as Scalar>::one();
                let two = BigRat::from_count(2);
                let om2d = one.clone() - two.clone() * d.clone();
                let om2db = om2d.clone() - b.clone();
                let omdb = one.clone() - d.clone() - b.clone();
                let lhs = (g0 - gb) * om2d * om2db.clone() * om2db * omdb;
                assert_eq!(lhs, -fb, "d = {dk}/100, b = {bk}/10 of d");
            }
        }
    }
}
