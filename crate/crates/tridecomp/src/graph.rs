//! Undirected simple graphs as bitset adjacency matrices, with the edge-list
//! file format and the generator family used by the test corpus.
//!
//! Rows are `u64` words; neighborhood intersections are word-wise ANDs, which
//! is what the weighting hot loop spends its time on. All vertex and edge
//! iteration is in ascending index order so every downstream report is
//! deterministic.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::scalar::Scalar;

/// Graph generation and parsing failures.
#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: loop edge at vertex {v}")]
    LoopEdge { line: usize, v: usize },
    #[error("graph must have at least one vertex")]
    EmptyGraph,
    #[error("bad parameter: {0}")]
    BadParameter(String),
    #[error("no sample met the minimum degree after {attempts} attempts")]
    GenerationTimeout { attempts: u32 },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Resampling budget for the minimum-degree random generator.
const MAX_GNP_ATTEMPTS: u32 = 1000;

#[inline]
pub(crate) fn words_for(n: usize) -> usize {
    n.div_ceil(64)
}

#[inline]
pub(crate) fn count_ones(words: &[u64]) -> u64 {
    words.iter().map(|w| w.count_ones() as u64).sum()
}

#[inline]
pub(crate) fn and_count(a: &[u64], b: &[u64]) -> u64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x & y).count_ones() as u64)
        .sum()
}

#[inline]
pub(crate) fn and_into(dst: &mut [u64], a: &[u64], b: &[u64]) {
    for (d, (x, y)) in dst.iter_mut().zip(a.iter().zip(b)) {
        *d = x & y;
    }
}

/// Ascending indices of the set bits.
pub(crate) fn iter_bits(words: &[u64]) -> impl Iterator<Item = usize> + '_ {
    words.iter().enumerate().flat_map(|(wi, &w)| {
        let mut rest = w;
        std::iter::from_fn(move || {
            if rest == 0 {
                None
            } else {
                let b = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(wi * 64 + b)
            }
        })
    })
}

/// A set of vertices of a fixed-order graph, stored as a bitset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexSet {
    n: usize,
    words: Vec<u64>,
}

impl VertexSet {
    pub fn new(n: usize) -> Self {
        VertexSet {
            n,
            words: vec![0; words_for(n)],
        }
    }

    /// The full vertex set `{0, .., n-1}`.
    pub fn full(n: usize) -> Self {
        let mut words = vec![u64::MAX; words_for(n)];
        let tail = n % 64;
        if tail != 0 {
            if let Some(last) = words.last_mut() {
                *last = (1u64 << tail) - 1;
            }
        }
        if n == 0 {
            words.clear();
        }
        VertexSet { n, words }
    }

    pub fn insert(&mut self, v: usize) {
        debug_assert!(v < self.n);
        self.words[v / 64] |= 1 << (v % 64);
    }

    pub fn contains(&self, v: usize) -> bool {
        v < self.n && self.words[v / 64] >> (v % 64) & 1 == 1
    }

    pub fn count(&self) -> usize {
        count_ones(&self.words) as usize
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        iter_bits(&self.words)
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    /// Intersect in place with a row of word bits of the same width.
    pub(crate) fn intersect_words(&mut self, other: &[u64]) {
        for (d, s) in self.words.iter_mut().zip(other) {
            *d &= s;
        }
    }
}

/// Undirected simple graph on vertices `0..n` with bitset adjacency rows.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    w: usize,
    bits: Vec<u64>,
}

impl Graph {
    /// Edgeless graph on `n >= 1` vertices.
    pub fn new(n: usize) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::EmptyGraph);
        }
        let w = words_for(n);
        Ok(Graph {
            n,
            w,
            bits: vec![0; n * w],
        })
    }

    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self, GraphError> {
        let mut g = Graph::new(n)?;
        for &(u, v) in edges {
            if u == v {
                return Err(GraphError::BadParameter(format!("loop edge at vertex {u}")));
            }
            if u >= n || v >= n {
                return Err(GraphError::BadParameter(format!(
                    "edge ({u}, {v}) out of range for {n} vertices"
                )));
            }
            g.add_edge(u, v);
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub(crate) fn words_per_row(&self) -> usize {
        self.w
    }

    /// Adjacency row of `v` as raw bitset words.
    pub(crate) fn row(&self, v: usize) -> &[u64] {
        &self.bits[v * self.w..(v + 1) * self.w]
    }

    fn add_edge(&mut self, u: usize, v: usize) {
        debug_assert!(u != v && u < self.n && v < self.n);
        self.bits[u * self.w + v / 64] |= 1 << (v % 64);
        self.bits[v * self.w + u / 64] |= 1 << (u % 64);
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n && v < self.n && u != v && self.bits[u * self.w + v / 64] >> (v % 64) & 1 == 1
    }

    pub fn degree(&self, v: usize) -> usize {
        count_ones(self.row(v)) as usize
    }

    pub fn min_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).min().unwrap_or(0)
    }

    /// Edges in ascending lexicographic order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for v in iter_bits(self.row(u)) {
                if v > u {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).sum::<usize>() / 2
    }

    /// Neighbors of `v` as a vertex set.
    pub fn neighbors(&self, v: usize) -> VertexSet {
        VertexSet {
            n: self.n,
            words: self.row(v).to_vec(),
        }
    }

    /// Common neighborhood of a list of vertices; the empty list yields the
    /// full vertex set, so one-vertex lists yield plain neighborhoods.
    pub fn common_neighbors(&self, verts: &[usize]) -> VertexSet {
        let mut set = VertexSet::full(self.n);
        for &v in verts {
            assert!(v < self.n, "vertex {v} out of range");
            set.intersect_words(self.row(v));
        }
        set
    }

    /// Common-neighborhood density `|common_neighbors(verts)| / n`.
    pub fn nhat<S: Scalar>(&self, verts: &[usize]) -> S {
        S::from_count(self.common_neighbors(verts).count() as u64) / S::from_count(self.n as u64)
    }

    /// Parse the plain edge-list format: a `n <count>` header line, then one
    /// `u v` pair per line. Blank lines and `#` comments are allowed
    /// anywhere; duplicate edges collapse.
    pub fn parse_edge_list(text: &str) -> Result<Self, GraphError> {
        let mut graph: Option<Graph> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let mut parts = body.split_whitespace();
            match graph {
                None => {
                    if parts.next() != Some("n") {
                        return Err(GraphError::Parse {
                            line,
                            msg: "expected header `n <count>`".into(),
                        });
                    }
                    let n: usize = parts.next().and_then(|t| t.parse().ok()).ok_or_else(|| {
                        GraphError::Parse {
                            line,
                            msg: "expected header `n <count>`".into(),
                        }
                    })?;
                    if parts.next().is_some() {
                        return Err(GraphError::Parse {
                            line,
                            msg: "unexpected token after header".into(),
                        });
                    }
                    if n == 0 {
                        return Err(GraphError::EmptyGraph);
                    }
                    graph = Some(Graph::new(n)?);
                }
                Some(ref mut g) => {
                    let (u, v) = match (
                        parts.next().and_then(|t| t.parse::<usize>().ok()),
                        parts.next().and_then(|t| t.parse::<usize>().ok()),
                        parts.next(),
                    ) {
                        (Some(u), Some(v), None) => (u, v),
                        _ => {
                            return Err(GraphError::Parse {
                                line,
                                msg: "expected `u v` edge line".into(),
                            })
                        }
                    };
                    if u == v {
                        return Err(GraphError::LoopEdge { line, v: u });
                    }
                    if u >= g.n || v >= g.n {
                        return Err(GraphError::Parse {
                            line,
                            msg: format!("vertex out of range for {} vertices", g.n),
                        });
                    }
                    g.add_edge(u, v);
                }
            }
        }
        graph.ok_or(GraphError::Parse {
            line: 1,
            msg: "missing header `n <count>`".into(),
        })
    }

    pub fn load_edge_list(path: &Path) -> Result<Self, GraphError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse_edge_list(&text)
    }

    /// Serialize in the same format `parse_edge_list` reads, edges in
    /// ascending lexicographic order.
    pub fn to_edge_list_string(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "n {}", self.n);
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    pub fn write_edge_list(&self, path: &Path) -> Result<(), GraphError> {
        std::fs::write(path, self.to_edge_list_string())?;
        Ok(())
    }
}

/// Complete graph on `n >= 1` vertices.
pub fn gen_complete(n: usize) -> Result<Graph, GraphError> {
    let mut g = Graph::new(n)?;
    for u in 0..n {
        for v in u + 1..n {
            g.add_edge(u, v);
        }
    }
    Ok(g)
}

/// Cycle on `n >= 3` vertices.
pub fn gen_cycle(n: usize) -> Result<Graph, GraphError> {
    if n < 3 {
        return Err(GraphError::BadParameter(format!(
            "cycle needs at least 3 vertices, got {n}"
        )));
    }
    let mut g = Graph::new(n)?;
    for v in 0..n {
        g.add_edge(v, (v + 1) % n);
    }
    Ok(g)
}

/// Circulant graph on `m` vertices where `i ~ i +- j (mod m)` for each
/// offset `j` in `conns`.
fn circulant(m: usize, conns: &[usize]) -> Result<Graph, GraphError> {
    let mut g = Graph::new(m)?;
    for v in 0..m {
        for &j in conns {
            debug_assert!(j >= 1 && 2 * j < m + 1);
            g.add_edge(v, (v + j) % m);
        }
    }
    Ok(g)
}

/// Join of two circulants `C_{12k+6}(1..=3k+1)`, a dense regular family on
/// `24k + 12` vertices with degree `18k + 8`, so the non-degree fraction
/// `1 - delta/n = (6k + 4)/(24k + 12)` sits above the critical ratio for
/// every `k >= 1`: these graphs carry negative triangle weights.
///
/// The construction is deterministic; `_seed` is accepted for interface
/// uniformity with the other generators.
pub fn gen_join_regular(k: usize, _seed: u64) -> Result<Graph, GraphError> {
    if k == 0 {
        return Err(GraphError::BadParameter("join family needs k >= 1".into()));
    }
    let m = 12 * k + 6;
    let conns: Vec<usize> = (1..=3 * k + 1).collect();
    let side = circulant(m, &conns)?;
    let mut g = Graph::new(2 * m)?;
    for (u, v) in side.edges() {
        g.add_edge(u, v);
        g.add_edge(m + u, m + v);
    }
    for u in 0..m {
        for v in 0..m {
            g.add_edge(u, m + v);
        }
    }
    Ok(g)
}

/// How a blow-up fills in edges inside each part.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BlowupMode {
    /// Each part is a clique.
    Clique,
    /// Each part is an independent set.
    Independent,
}

/// Blow-up of `base` replacing every vertex by a part of `part_size`
/// consecutive vertices: vertex `i` of the base becomes the block
/// `i*part_size .. (i+1)*part_size`. Parts of adjacent base vertices are
/// joined completely; inside a part the mode decides.
pub fn gen_blowup(base: &Graph, part_size: usize, mode: BlowupMode) -> Result<Graph, GraphError> {
    if part_size == 0 {
        return Err(GraphError::BadParameter("part size must be >= 1".into()));
    }
    let t = part_size;
    let mut g = Graph::new(base.n() * t)?;
    for (u, v) in base.edges() {
        for a in 0..t {
            for b in 0..t {
                g.add_edge(u * t + a, v * t + b);
            }
        }
    }
    if mode == BlowupMode::Clique {
        for i in 0..base.n() {
            for a in 0..t {
                for b in a + 1..t {
                    g.add_edge(i * t + a, i * t + b);
                }
            }
        }
    }
    Ok(g)
}

/// Erdos-Renyi sample conditioned on minimum degree: draws whole graphs with
/// edge probability `p` until one has minimum degree at least `delta_min`,
/// resampling up to a fixed budget. The random stream is seeded once and
/// runs across attempts, so results are reproducible per seed.
pub fn gen_gnp_min_degree(
    n: usize,
    p: f64,
    delta_min: usize,
    seed: u64,
) -> Result<Graph, GraphError> {
    if n == 0 {
        return Err(GraphError::EmptyGraph);
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(GraphError::BadParameter(format!(
            "edge probability {p} outside [0, 1]"
        )));
    }
    if delta_min >= n {
        return Err(GraphError::BadParameter(format!(
            "minimum degree {delta_min} impossible on {n} vertices"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_GNP_ATTEMPTS {
        let mut g = Graph::new(n)?;
        for u in 0..n {
            for v in u + 1..n {
                if rng.gen_bool(p) {
                    g.add_edge(u, v);
                }
            }
        }
        if g.min_degree() >= delta_min {
            return Ok(g);
        }
    }
    Err(GraphError::GenerationTimeout {
        attempts: MAX_GNP_ATTEMPTS,
    })
}
