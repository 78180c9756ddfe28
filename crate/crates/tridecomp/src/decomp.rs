//! The fractional triangle weighting and its two evaluation routes.
//!
//! Route one is the definition: every ordered 5-clique K = (v1..v5)
//! distributes gadget values `psi` over the triangles inside it, scaled by
//! the delegation product `W(v1..v4)`, and a triangle's weight is half the
//! sum over all ordered 5-cliques. Route two is a recast of the same sum
//! that only walks common neighborhoods of the triangle, which turns an
//! O(n^5)-per-triangle enumeration into a two-level loop. The two routes
//! agree exactly whenever delegation is total (every triangle extends to a
//! K4 and every K4 to a K5); `decompose` checks those conditions as it runs
//! and reports the first failure witness in lexicographic order.
//!
//! Weight facts used by tests: on the complete graph K_n every triangle gets
//! weight 1/(n-2), and each ordering of a triangle of K5 contributes exactly
//! 1/18.

use std::collections::BTreeMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::cliques::CliqueError;
use crate::cliques::{
    check_clique, enumerate_triangles, five_clique_sets_containing,
    ordered_five_cliques_containing, permutations_5, OrderedTriangle, Triangle,
};
use crate::graph::{and_count, and_into, count_ones, iter_bits, Graph};
use crate::program::{ProgramPoint, Var};
use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum DecompError {
    /// A referenced clique has no extension, so a delegation share is
    /// undefined. The prefix is reported as a sorted vertex set.
    #[error("delegation undefined: clique {prefix:?} has no extension")]
    DelegationUndefined { prefix: Vec<usize> },
    #[error("delegation prefix length {0} outside 2..=4")]
    BadPrefixLength(usize),
    #[error("vertex {v} is not a common neighbor of {base:?}")]
    NotAnExtension { v: usize, base: Vec<usize> },
    #[error("thread pool: {0}")]
    Pool(String),
    #[error(transparent)]
    Clique(#[from] CliqueError),
}

/// Value the edge gadget of an ordered 5-clique assigns to one triangle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GadgetValue {
    /// Triangle inside the clique meeting the marked edge in 0 or 2 vertices.
    PlusThird,
    /// Triangle inside the clique meeting the marked edge in 1 vertex.
    MinusSixth,
    /// Triangle not contained in the clique.
    Zero,
}

impl GadgetValue {
    pub fn value<S: Scalar>(&self) -> S {
        match self {
            GadgetValue::PlusThird => S::recip_count(3),
            GadgetValue::MinusSixth => -S::recip_count(6),
            GadgetValue::Zero => S::zero(),
        }
    }
}

/// Edge gadget of the ordered 5-clique `k` with marked edge `(k[0], k[1])`,
/// evaluated at triangle `t`.
pub fn psi(g: &Graph, k: &[usize; 5], t: Triangle) -> Result<GadgetValue, DecompError> {
    check_clique(g, k)?;
    let tv = t.vertices();
    if !tv.iter().all(|v| k.contains(v)) {
        return Ok(GadgetValue::Zero);
    }
    let marked = [k[0], k[1]];
    match marked.iter().filter(|v| tv.contains(v)).count() {
        0 | 2 => Ok(GadgetValue::PlusThird),
        _ => Ok(GadgetValue::MinusSixth),
    }
}

/// Sum of the gadget of `k` over the triangles of `k` containing the edge
/// `f`. Equals one when `f` is the marked edge `(k[0], k[1])` and zero for
/// every other edge: the gadget moves a unit of coverage onto the marked
/// edge without disturbing the rest.
pub fn gadget_edge_sum<S: Scalar>(
    g: &Graph,
    k: &[usize; 5],
    f: (usize, usize),
) -> Result<S, DecompError> {
    check_clique(g, k)?;
    check_clique(g, &[f.0, f.1])?;
    let mut sum = S::zero();
    if !(k.contains(&f.0) && k.contains(&f.1)) {
        return Ok(sum);
    }
    for &w in k.iter().filter(|&&w| w != f.0 && w != f.1) {
        let t = Triangle::new(g, f.0, f.1, w)?;
        sum = sum + psi(g, k, t)?.value();
    }
    Ok(sum)
}

/// Delegation product of an ordered clique prefix (v1..vr), r in 2..=4:
/// the product over i = 2..=r of 1/|extensions of {v1..vi}|. Depends only
/// on the prefix sets, not on the order within each prefix.
pub fn weight_w<S: Scalar>(g: &Graph, prefix: &[usize]) -> Result<S, DecompError> {
    if !(2..=4).contains(&prefix.len()) {
        return Err(DecompError::BadPrefixLength(prefix.len()));
    }
    check_clique(g, prefix)?;
    let mut w = S::one();
    for i in 2..=prefix.len() {
        let c = g.common_neighbors(&prefix[..i]).count() as u64;
        if c == 0 {
            let mut p = prefix[..i].to_vec();
            p.sort_unstable();
            return Err(DecompError::DelegationUndefined { prefix: p });
        }
        w = w * S::recip_count(c);
    }
    Ok(w)
}

/// Definitional weight of a triangle: half the sum over all ordered
/// 5-cliques of the delegation product times the gadget value. Only cliques
/// containing the triangle contribute (the gadget is zero elsewhere), so
/// the enumeration restricts to those.
pub fn w_oracle<S: Scalar>(g: &Graph, t: Triangle) -> Result<S, DecompError> {
    let mut sum = S::zero();
    for set in five_clique_sets_containing(g, t) {
        let mut per_set = S::zero();
        permutations_5(&set, &mut |perm| {
            per_set = per_set.clone()
                + psi_unchecked(&perm, t).value::<S>() * w4_unchecked::<S>(g, &perm);
        });
        sum = sum + per_set;
    }
    Ok(sum / S::from_count(2))
}

/// Gadget value when `k` is already known to be an ordered 5-clique.
fn psi_unchecked(k: &[usize; 5], t: Triangle) -> GadgetValue {
    let tv = t.vertices();
    if !tv.iter().all(|v| k.contains(v)) {
        return GadgetValue::Zero;
    }
    match [k[0], k[1]].iter().filter(|v| tv.contains(v)).count() {
        0 | 2 => GadgetValue::PlusThird,
        _ => GadgetValue::MinusSixth,
    }
}

/// Delegation product of the first four vertices of an ordered 5-clique.
/// Every referenced count is at least one because the remaining clique
/// vertices extend each prefix.
fn w4_unchecked<S: Scalar>(g: &Graph, k: &[usize; 5]) -> S {
    let mut w = S::one();
    for i in 2..=4 {
        w = w * S::recip_count(g.common_neighbors(&k[..i]).count() as u64);
    }
    w
}

/// Definitional weight restricted to one ordering: the same half-sum, taken
/// over the ordered 5-cliques containing the ordered triangle as a
/// subsequence. Summing this over the six orderings of a triangle gives
/// `w_oracle`, since each ordered 5-clique containing the triangle contains
/// exactly one of its orderings as a subsequence.
pub fn w_oracle_ordered<S: Scalar>(g: &Graph, o: &OrderedTriangle) -> Result<S, DecompError> {
    let t = o.triangle();
    let mut sum = S::zero();
    for k in ordered_five_cliques_containing(g, o)? {
        sum = sum + psi_unchecked(&k, t).value::<S>() * w4_unchecked::<S>(g, &k);
    }
    Ok(sum / S::from_count(2))
}

// Shared term shapes for the recast evaluator. Both the standalone
// single-ordering evaluator and the merged six-ordering loop in `decompose`
// go through these functions with the same accumulation order, so their
// floating-point results are bitwise identical.

#[inline]
fn y_term<S: Scalar>(inv_m: &S, inv_h: &S, inv_c: &S) -> S {
    inv_m.clone() * (inv_h.clone() - inv_c.clone())
}

#[inline]
fn z_term<S: Scalar>(inv_m: &S, inv_h: &S, inv_c: &S, inv_g: &S, inv_q: &S, inv_c4: &S) -> S {
    (inv_m.clone() * (inv_h.clone() - inv_c.clone())
        + inv_g.clone() * (inv_h.clone() - inv_q.clone()))
        * inv_c4.clone()
}

#[inline]
fn finish_ordering<S: Scalar>(inv_c: &S, acc: S) -> S {
    (inv_c.clone() - acc) / S::from_count(6)
}

/// Recast weight of one ordering (x1, x2, x3). Writing N^ for common
/// neighborhoods and W for the delegation product, this evaluates
///
/// ```text
/// w(O) = 1/6 ( W(x1,x2)
///              - sum over y in R of [ W(x1,y,x2) - W(x1,x2,y)
///                  + sum over z in N(y) cap R of
///                      ( W(x1,y,x2,z) - W(x1,x2,y,z)
///                      + W(x1,y,z,x2) - W(z,y,x1,x2) ) ] )
/// ```
///
/// where `R = N^({x1,x2,x3})`. The sums are empty when R is: the evaluator
/// is literal and does not require delegation to be total. Every count it
/// divides by has a clique vertex as witness, with the single theoretical
/// exception of the 4-set {x1,x2,y,z} count, which is guarded and reported
/// as a delegation failure.
pub fn w_fast_ordered<S: Scalar>(g: &Graph, o: &OrderedTriangle) -> Result<S, DecompError> {
    check_clique(g, &o.vertices())?;
    let (x1, x2, x3) = (o.x1(), o.x2(), o.x3());
    let words = g.words_per_row();
    let mut pair = vec![0u64; words];
    and_into(&mut pair, g.row(x1), g.row(x2));
    let c = count_ones(&pair);
    let inv_c = S::recip_count(c);
    let mut r_set = vec![0u64; words];
    and_into(&mut r_set, &pair, g.row(x3));
    let mut ny_r = vec![0u64; words];
    let mut qyz = vec![0u64; words];
    let mut acc = S::zero();
    for y in iter_bits(&r_set) {
        let row_y = g.row(y);
        let inv_h = S::recip_count(and_count(g.row(x1), row_y));
        let inv_m = S::recip_count(and_count(&pair, row_y));
        let mut bracket = y_term(&inv_m, &inv_h, &inv_c);
        and_into(&mut ny_r, row_y, &r_set);
        for z in iter_bits(&ny_r) {
            and_into(&mut qyz, row_y, g.row(z));
            let q = count_ones(&qyz);
            let c4 = and_count(&pair, &qyz);
            if c4 == 0 {
                let mut p = vec![x1, x2, y, z];
                p.sort_unstable();
                return Err(DecompError::DelegationUndefined { prefix: p });
            }
            let gc = and_count(g.row(x1), &qyz);
            let inv_q = S::recip_count(q);
            let inv_c4 = S::recip_count(c4);
            let inv_g = S::recip_count(gc);
            bracket = bracket + z_term(&inv_m, &inv_h, &inv_c, &inv_g, &inv_q, &inv_c4);
        }
        acc = acc + bracket;
    }
    Ok(finish_ordering(&inv_c, acc))
}

/// Recast weight of an unordered triangle: the sum of `w_fast_ordered` over
/// the six orderings, accumulated in their fixed order.
pub fn w_fast<S: Scalar>(g: &Graph, t: Triangle) -> Result<S, DecompError> {
    let mut sum = S::zero();
    for o in t.orderings() {
        sum = sum + w_fast_ordered(g, &o)?;
    }
    Ok(sum)
}

/// One-step residual of the weighting at one ordering:
/// `1 - 6 |N^({x1,x2})| w(O)`. Zero on complete graphs, and bounded by the
/// optimization chain on graphs above the degree threshold.
pub fn w1_hat<S: Scalar>(g: &Graph, o: &OrderedTriangle) -> Result<S, DecompError> {
    check_clique(g, &o.vertices())?;
    let c = and_count(g.row(o.x1()), g.row(o.x2()));
    let w: S = w_fast_ordered(g, o)?;
    Ok(S::one() - S::from_count(6) * S::from_count(c) * w)
}

/// Statistics of the per-visit slack `b = (deg(y) - |N(y) cap N(z)|) / n`
/// over all (triangle, y, z) visits of a decomposition run, accumulated
/// exactly in integers and divided once at the end.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BStats {
    pub visits: u64,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
}

#[derive(Clone, Copy, Debug, Default)]
struct BAccum {
    visits: u64,
    sum: u128,
    min: u64,
    max: u64,
}

impl BAccum {
    fn record(&mut self, diff: u64) {
        if self.visits == 0 {
            self.min = diff;
            self.max = diff;
        } else {
            self.min = self.min.min(diff);
            self.max = self.max.max(diff);
        }
        self.visits += 1;
        self.sum += diff as u128;
    }

    fn merge(&mut self, other: BAccum) {
        if other.visits == 0 {
            return;
        }
        if self.visits == 0 {
            *self = other;
        } else {
            self.visits += other.visits;
            self.sum += other.sum;
            self.min = self.min.min(other.min);
            self.max = self.max.max(other.max);
        }
    }

    fn stats(&self, n: usize) -> Option<BStats> {
        if self.visits == 0 {
            return None;
        }
        let nf = n as f64;
        Some(BStats {
            visits: self.visits,
            min: self.min as f64 / nf,
            max: self.max as f64 / nf,
            mean: self.sum as f64 / (self.visits as f64 * nf),
        })
    }
}

/// Result of a whole-graph decomposition run.
#[derive(Clone, Debug)]
pub struct TriangleWeightReport<S> {
    pub n: usize,
    pub min_degree: usize,
    /// Triangle weights in ascending lexicographic triangle order.
    pub weights: Vec<(Triangle, S)>,
    /// Per-edge weight sums over the triangles containing each edge, in
    /// ascending edge order; edges in no triangle are absent here.
    pub edge_sums: Vec<((usize, usize), S)>,
    /// Edges contained in no triangle, in ascending order. The weighting
    /// cannot cover these, so verification fails when any exist.
    pub uncoverable_edges: Vec<(usize, usize)>,
    /// Smallest weight with its first witness in lexicographic order.
    pub min_weight: Option<(Triangle, S)>,
    pub b_stats: Option<BStats>,
}

struct Scratch {
    p01: Vec<u64>,
    p02: Vec<u64>,
    p12: Vec<u64>,
    r_set: Vec<u64>,
    ny_r: Vec<u64>,
    qyz: Vec<u64>,
}

impl Scratch {
    fn new(words: usize) -> Self {
        Scratch {
            p01: vec![0; words],
            p02: vec![0; words],
            p12: vec![0; words],
            r_set: vec![0; words],
            ny_r: vec![0; words],
            qyz: vec![0; words],
        }
    }
}

/// The six orderings of a sorted triangle as (x1 index, x2 index, pair
/// index), in lexicographic (x1, x2) order; pair index 0, 1, 2 stands for
/// the vertex pair {0,1}, {0,2}, {1,2}.
const ORDERINGS: [(usize, usize, usize); 6] = [
    (0, 1, 0),
    (0, 2, 1),
    (1, 0, 0),
    (1, 2, 2),
    (2, 0, 1),
    (2, 1, 2),
];

/// Merged recast evaluation of all six orderings of one triangle, sharing
/// the neighborhood intersections across orderings. Accumulation order per
/// ordering matches `w_fast_ordered` exactly.
fn triangle_weight_merged<S: Scalar>(
    g: &Graph,
    t: Triangle,
    scratch: &mut Scratch,
) -> Result<(S, BAccum), DecompError> {
    let Scratch {
        p01,
        p02,
        p12,
        r_set,
        ny_r,
        qyz,
    } = scratch;
    let v = t.vertices();
    let rows = [g.row(v[0]), g.row(v[1]), g.row(v[2])];
    and_into(p01, rows[0], rows[1]);
    and_into(p02, rows[0], rows[2]);
    and_into(p12, rows[1], rows[2]);
    let pairs: [&[u64]; 3] = [p01, p02, p12];
    let inv_c: [S; 3] = [
        S::recip_count(count_ones(pairs[0])),
        S::recip_count(count_ones(pairs[1])),
        S::recip_count(count_ones(pairs[2])),
    ];
    and_into(r_set, pairs[0], rows[2]);
    if count_ones(r_set) == 0 {
        return Err(DecompError::DelegationUndefined { prefix: v.to_vec() });
    }
    let mut acc: [S; 6] = std::array::from_fn(|_| S::zero());
    let mut b = BAccum::default();
    for y in iter_bits(r_set) {
        let row_y = g.row(y);
        let deg_y = count_ones(row_y);
        let inv_h: [S; 3] = std::array::from_fn(|a| S::recip_count(and_count(rows[a], row_y)));
        let inv_m: [S; 3] = std::array::from_fn(|pi| S::recip_count(and_count(pairs[pi], row_y)));
        let mut bracket: [S; 6] = std::array::from_fn(|o| {
            y_term(
                &inv_m[ORDERINGS[o].2],
                &inv_h[ORDERINGS[o].0],
                &inv_c[ORDERINGS[o].2],
            )
        });
        and_into(ny_r, row_y, r_set);
        if count_ones(ny_r) == 0 {
            let mut p = v.to_vec();
            p.push(y);
            p.sort_unstable();
            return Err(DecompError::DelegationUndefined { prefix: p });
        }
        for z in iter_bits(ny_r) {
            and_into(qyz, row_y, g.row(z));
            let q = count_ones(qyz);
            let c4: [u64; 3] = std::array::from_fn(|pi| and_count(pairs[pi], qyz));
            for pi in 0..3 {
                if c4[pi] == 0 {
                    let (i, j) = [(0, 1), (0, 2), (1, 2)][pi];
                    let mut p = vec![v[i], v[j], y, z];
                    p.sort_unstable();
                    return Err(DecompError::DelegationUndefined { prefix: p });
                }
            }
            let inv_q = S::recip_count(q);
            let inv_c4: [S; 3] = std::array::from_fn(|pi| S::recip_count(c4[pi]));
            let inv_g: [S; 3] = std::array::from_fn(|a| S::recip_count(and_count(rows[a], qyz)));
            for (o, &(a, _, pi)) in ORDERINGS.iter().enumerate() {
                bracket[o] = bracket[o].clone()
                    + z_term(
                        &inv_m[pi],
                        &inv_h[a],
                        &inv_c[pi],
                        &inv_g[a],
                        &inv_q,
                        &inv_c4[pi],
                    );
            }
            b.record(deg_y - q);
        }
        for o in 0..6 {
            acc[o] = acc[o].clone() + bracket[o].clone();
        }
    }
    let mut weight = S::zero();
    for (o, &(_, _, pi)) in ORDERINGS.iter().enumerate() {
        weight = weight + finish_ordering(&inv_c[pi], acc[o].clone());
    }
    Ok((weight, b))
}

/// Computes all triangle weights of the graph by the recast route, checking
/// delegation totality as it goes. On success the per-edge sums over
/// triangles equal one exactly for every edge that lies in a triangle.
///
/// Triangles are processed independently (in parallel when a pool is
/// configured) and all reductions happen sequentially in lexicographic
/// order afterwards, so the output is identical regardless of thread count,
/// bit for bit even in floating point.
pub fn decompose<S: Scalar>(g: &Graph) -> Result<TriangleWeightReport<S>, DecompError> {
    let triangles = enumerate_triangles(g);
    let results: Vec<Result<(S, BAccum), DecompError>> = triangles
        .par_iter()
        .map_init(
            || Scratch::new(g.words_per_row()),
            |scratch, &t| triangle_weight_merged(g, t, scratch),
        )
        .collect();

    let mut weights = Vec::with_capacity(triangles.len());
    let mut b = BAccum::default();
    for (t, r) in triangles.iter().zip(results) {
        let (w, bt) = r?;
        b.merge(bt);
        weights.push((*t, w));
    }

    let mut edge_sums: BTreeMap<(usize, usize), S> = BTreeMap::new();
    for (t, w) in &weights {
        let [a, bb, c] = t.vertices();
        for e in [(a, bb), (a, c), (bb, c)] {
            match edge_sums.get_mut(&e) {
                Some(s) => *s = s.clone() + w.clone(),
                None => {
                    edge_sums.insert(e, w.clone());
                }
            }
        }
    }

    let mut min_weight: Option<(Triangle, S)> = None;
    for (t, w) in &weights {
        let better = match &min_weight {
            None => true,
            Some((_, best)) => w < best,
        };
        if better {
            min_weight = Some((*t, w.clone()));
        }
    }

    let uncoverable_edges: Vec<(usize, usize)> = g
        .edges()
        .into_iter()
        .filter(|&(u, v)| and_count(g.row(u), g.row(v)) == 0)
        .collect();

    Ok(TriangleWeightReport {
        n: g.n(),
        min_degree: g.min_degree(),
        weights,
        edge_sums: edge_sums.into_iter().collect(),
        uncoverable_edges,
        min_weight,
        b_stats: b.stats(g.n()),
    })
}

/// `decompose` on a dedicated thread pool of the given size; `None` uses
/// the global pool.
pub fn decompose_with<S: Scalar>(
    g: &Graph,
    threads: Option<usize>,
) -> Result<TriangleWeightReport<S>, DecompError> {
    match threads {
        None => decompose(g),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map_err(|e| DecompError::Pool(e.to_string()))?
            .install(|| decompose(g)),
    }
}

/// Reads off the density point that one (ordering, y, z) visit of the
/// recast loop presents to the optimization chain: degree and common
/// neighborhood densities of the named vertex groups, at the graph's own
/// degree deficiency `d = 1 - min_degree/n`.
pub fn extract_program_point(
    g: &Graph,
    o: &OrderedTriangle,
    y: usize,
    z: usize,
) -> Result<ProgramPoint, DecompError> {
    check_clique(g, &o.vertices())?;
    let r = g.common_neighbors(&o.vertices());
    if !r.contains(y) {
        return Err(DecompError::NotAnExtension {
            v: y,
            base: o.vertices().to_vec(),
        });
    }
    if !(r.contains(z) && g.has_edge(y, z)) {
        let mut base = o.vertices().to_vec();
        base.push(y);
        base.sort_unstable();
        return Err(DecompError::NotAnExtension { v: z, base });
    }
    let (x1, x2, x3) = (o.x1(), o.x2(), o.x3());
    let nf = g.n() as f64;
    let dens = |vs: &[usize]| g.common_neighbors(vs).count() as f64 / nf;
    let d = 1.0 - g.min_degree() as f64 / nf;
    let vars = [
        (Var::X, g.degree(x1) as f64 / nf),
        (Var::Y, g.degree(y) as f64 / nf),
        (Var::E0, dens(&[x1, x2])),
        (Var::E, dens(&[x1, y])),
        (Var::F, dens(&[y, z])),
        (Var::Q0, dens(&[x1, x2, y])),
        (Var::Q, dens(&[x1, y, z])),
        (Var::P, dens(&[x1, x2, y, z])),
        (Var::R0, dens(&[x1, x2, x3])),
        (Var::R, dens(&[x1, x2, x3, y])),
    ];
    Ok(ProgramPoint::from_scalars(3, d, vars.into_iter().collect()))
}
