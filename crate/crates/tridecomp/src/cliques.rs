//! Triangles, ordered triangles, and small-clique enumeration.
//!
//! Triangles are stored with ascending vertices; an ordered triangle singles
//! out the pair `(x1, x2)` whose edge the weighting formula treats specially,
//! with `x3` the remaining vertex. Enumeration order is ascending
//! lexicographic everywhere, which downstream code relies on for
//! deterministic reports and for breaking ties (first witness wins).

use thiserror::Error;

use crate::graph::{and_into, iter_bits, Graph};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CliqueError {
    #[error("vertex {0} out of range")]
    OutOfRange(usize),
    #[error("duplicate vertex {0}")]
    Duplicate(usize),
    #[error("vertices {0:?} are not pairwise adjacent")]
    NotAClique(Vec<usize>),
}

/// Checks that `verts` are distinct, in range, and pairwise adjacent.
pub fn check_clique(g: &Graph, verts: &[usize]) -> Result<(), CliqueError> {
    for &u in verts {
        if u >= g.n() {
            return Err(CliqueError::OutOfRange(u));
        }
    }
    for (i, &u) in verts.iter().enumerate() {
        for &v in &verts[i + 1..] {
            if u == v {
                return Err(CliqueError::Duplicate(u));
            }
            if !g.has_edge(u, v) {
                return Err(CliqueError::NotAClique(verts.to_vec()));
            }
        }
    }
    Ok(())
}

/// Number of vertices extending the clique `verts` to a clique one larger:
/// the size of the common neighborhood. The empty clique extends to every
/// vertex.
pub fn extension_count(g: &Graph, verts: &[usize]) -> Result<u64, CliqueError> {
    check_clique(g, verts)?;
    Ok(g.common_neighbors(verts).count() as u64)
}

/// A triangle of the graph, vertices ascending.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Triangle {
    a: usize,
    b: usize,
    c: usize,
}

impl Triangle {
    /// Validated constructor; sorts the vertices.
    pub fn new(g: &Graph, u: usize, v: usize, w: usize) -> Result<Self, CliqueError> {
        check_clique(g, &[u, v, w])?;
        let mut s = [u, v, w];
        s.sort_unstable();
        Ok(Triangle {
            a: s[0],
            b: s[1],
            c: s[2],
        })
    }

    pub fn vertices(&self) -> [usize; 3] {
        [self.a, self.b, self.c]
    }

    /// The six orderings, in lexicographic order of the index pair picked
    /// for `(x1, x2)`: (0,1), (0,2), (1,0), (1,2), (2,0), (2,1).
    pub fn orderings(&self) -> [OrderedTriangle; 6] {
        let v = self.vertices();
        [
            (0, 1, 2),
            (0, 2, 1),
            (1, 0, 2),
            (1, 2, 0),
            (2, 0, 1),
            (2, 1, 0),
        ]
        .map(|(i, j, k)| OrderedTriangle {
            x1: v[i],
            x2: v[j],
            x3: v[k],
        })
    }
}

/// A triangle with a distinguished ordering: the pair `(x1, x2)` is the edge
/// the weighting formula delegates from, `x3` the remaining vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct OrderedTriangle {
    x1: usize,
    x2: usize,
    x3: usize,
}

impl OrderedTriangle {
    pub fn new(g: &Graph, x1: usize, x2: usize, x3: usize) -> Result<Self, CliqueError> {
        check_clique(g, &[x1, x2, x3])?;
        Ok(OrderedTriangle { x1, x2, x3 })
    }

    pub fn x1(&self) -> usize {
        self.x1
    }

    pub fn x2(&self) -> usize {
        self.x2
    }

    pub fn x3(&self) -> usize {
        self.x3
    }

    pub fn vertices(&self) -> [usize; 3] {
        [self.x1, self.x2, self.x3]
    }

    /// The underlying unordered triangle.
    pub fn triangle(&self) -> Triangle {
        let mut s = self.vertices();
        s.sort_unstable();
        Triangle {
            a: s[0],
            b: s[1],
            c: s[2],
        }
    }
}

/// All triangles in ascending lexicographic order.
pub fn enumerate_triangles(g: &Graph) -> Vec<Triangle> {
    let mut out = Vec::new();
    let mut scratch = vec![0u64; g.words_per_row()];
    for a in 0..g.n() {
        for b in iter_bits(g.row(a)).filter(|&b| b > a) {
            and_into(&mut scratch, g.row(a), g.row(b));
            for c in iter_bits(&scratch).filter(|&c| c > b) {
                out.push(Triangle { a, b, c });
            }
        }
    }
    out
}

/// All 5-vertex clique sets containing the given triangle, each as an
/// ascending 5-tuple, in lexicographic order.
pub(crate) fn five_clique_sets_containing(g: &Graph, t: Triangle) -> Vec<[usize; 5]> {
    let common = g.common_neighbors(&t.vertices());
    let candidates = common.to_vec();
    let mut out = Vec::new();
    for (i, &u) in candidates.iter().enumerate() {
        for &v in &candidates[i + 1..] {
            if g.has_edge(u, v) {
                let mut s = [t.a, t.b, t.c, u, v];
                s.sort_unstable();
                out.push(s);
            }
        }
    }
    out.sort_unstable();
    out
}

/// All orderings of all 5-cliques that contain the given ordered triangle as
/// a subsequence. Every permutation of a 5-clique's vertex set is a valid
/// ordered 5-clique, so this filters the 120 permutations of each containing
/// set down to those where `x1, x2, x3` appear in that relative order.
///
/// This is the deliberately naive reference path; callers that need speed use
/// the recast formula instead.
pub fn ordered_five_cliques_containing(
    g: &Graph,
    o: &OrderedTriangle,
) -> Result<Vec<[usize; 5]>, CliqueError> {
    check_clique(g, &o.vertices())?;
    let mut out = Vec::new();
    for set in five_clique_sets_containing(g, o.triangle()) {
        permutations_5(&set, &mut |perm| {
            if is_subsequence(&o.vertices(), &perm) {
                out.push(perm);
            }
        });
    }
    Ok(out)
}

fn is_subsequence(sub: &[usize; 3], seq: &[usize; 5]) -> bool {
    let mut i = 0;
    for &v in seq {
        if i < 3 && v == sub[i] {
            i += 1;
        }
    }
    i == 3
}

/// Visits the 120 permutations of a 5-element set in lexicographic order of
/// position indices.
pub(crate) fn permutations_5(set: &[usize; 5], visit: &mut impl FnMut([usize; 5])) {
    let mut idx = [0usize; 5];
    for i0 in 0..5 {
        idx[0] = i0;
        for i1 in (0..5).filter(|&i| i != i0) {
            idx[1] = i1;
            for i2 in (0..5).filter(|&i| i != i0 && i != i1) {
                idx[2] = i2;
                for i3 in (0..5).filter(|&i| i != i0 && i != i1 && i != i2) {
                    idx[3] = i3;
                    let i4 = 10 - i0 - i1 - i2 - i3;
                    idx[4] = i4;
                    visit(idx.map(|i| set[i]));
                }
            }
        }
    }
}
