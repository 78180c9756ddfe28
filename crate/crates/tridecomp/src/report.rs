//! Report rendering for decomposition and verification runs.
//!
//! Reports carry the full weighting (one row per triangle), the per-edge
//! sums, any uncoverable edges, and summary statistics. Two formats are
//! supported: a JSON document (`schema_version` 1) and a CSV with
//! `#`-prefixed metadata lines and section headers. Exact scalars render
//! as `p/q` strings, floating-point scalars as numbers.

use serde_json::{json, Map, Value};

use crate::decomp::TriangleWeightReport;
use crate::scalar::Scalar;

/// Outcome of the numeric checks a verification run performs on top of a
/// decomposition. `ok` aggregates every individual check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyChecks {
    /// Absolute tolerance the float checks were run at.
    pub tol: f64,
    /// Largest deviation of a per-edge sum from one.
    pub edge_sum_max_dev: f64,
    pub edge_sums_ok: bool,
    /// Triangles with weight below `-tol`.
    pub negative_count: u64,
    pub no_uncoverable: bool,
    /// Whether the brute-force oracle was compared against the fast route
    /// (done for small graphs only), and the largest deviation if so.
    pub oracle_checked: bool,
    pub oracle_max_dev: Option<f64>,
    pub oracle_ok: Option<bool>,
    pub ok: bool,
}

fn scalar_value<S: Scalar>(s: &S) -> Value {
    match s.exact_string() {
        Some(t) => Value::String(t),
        None => json!(s.to_f64()),
    }
}

fn scalar_text<S: Scalar>(s: &S) -> String {
    match s.exact_string() {
        Some(t) => t,
        None => format!("{}", s.to_f64()),
    }
}

/// Renders a report as a JSON document.
pub fn render_json<S: Scalar>(
    rep: &TriangleWeightReport<S>,
    mode: &str,
    checks: Option<&VerifyChecks>,
) -> String {
    let mut root = Map::new();
    root.insert("schema_version".into(), json!(1));
    root.insert("mode".into(), json!(mode));
    root.insert("exact".into(), json!(S::EXACT));
    root.insert("n".into(), json!(rep.n));
    root.insert("min_degree".into(), json!(rep.min_degree));
    root.insert("triangle_count".into(), json!(rep.weights.len()));
    root.insert("edges_in_triangles".into(), json!(rep.edge_sums.len()));
    match &rep.min_weight {
        Some((t, w)) => {
            root.insert("min_weight".into(), scalar_value(w));
            root.insert("min_witness".into(), json!(t.vertices()));
        }
        None => {
            root.insert("min_weight".into(), Value::Null);
            root.insert("min_witness".into(), Value::Null);
        }
    }
    root.insert(
        "b_stats".into(),
        match &rep.b_stats {
            Some(b) => json!({
                "visits": b.visits,
                "min": b.min,
                "max": b.max,
                "mean": b.mean,
            }),
            None => Value::Null,
        },
    );
    if let Some(c) = checks {
        root.insert(
            "checks".into(),
            json!({
                "tol": c.tol,
                "edge_sum_max_dev": c.edge_sum_max_dev,
                "edge_sums_ok": c.edge_sums_ok,
                "negative_count": c.negative_count,
                "no_uncoverable": c.no_uncoverable,
                "oracle_checked": c.oracle_checked,
                "oracle_max_dev": c.oracle_max_dev,
                "oracle_ok": c.oracle_ok,
                "ok": c.ok,
            }),
        );
    }
    root.insert(
        "uncoverable_edges".into(),
        Value::Array(
            rep.uncoverable_edges
                .iter()
                .map(|&(u, v)| json!([u, v]))
                .collect(),
        ),
    );
    root.insert(
        "triangles".into(),
        Value::Array(
            rep.weights
                .iter()
                .map(|(t, w)| {
                    let [a, b, c] = t.vertices();
                    json!({"a": a, "b": b, "c": c, "weight": scalar_value(w)})
                })
                .collect(),
        ),
    );
    root.insert(
        "edge_sums".into(),
        Value::Array(
            rep.edge_sums
                .iter()
                .map(|((u, v), s)| json!({"u": u, "v": v, "sum": scalar_value(s)}))
                .collect(),
        ),
    );
    let mut out = serde_json::to_string_pretty(&Value::Object(root))
        .expect("report serialization cannot fail");
    out.push('\n');
    out
}

/// Renders a report as CSV with `#`-prefixed metadata and section markers.
pub fn render_csv<S: Scalar>(
    rep: &TriangleWeightReport<S>,
    mode: &str,
    checks: Option<&VerifyChecks>,
) -> String {
    let mut out = String::new();
    let mut meta = |k: &str, v: String| {
        out.push_str(&format!("# {k}: {v}\n"));
    };
    meta("schema_version", "1".into());
    meta("mode", mode.into());
    meta("exact", S::EXACT.to_string());
    meta("n", rep.n.to_string());
    meta("min_degree", rep.min_degree.to_string());
    meta("triangle_count", rep.weights.len().to_string());
    meta("edges_in_triangles", rep.edge_sums.len().to_string());
    match &rep.min_weight {
        Some((t, w)) => {
            meta("min_weight", scalar_text(w));
            let [a, b, c] = t.vertices();
            meta("min_witness", format!("{a} {b} {c}"));
        }
        None => meta("min_weight", "none".into()),
    }
    if let Some(b) = &rep.b_stats {
        meta("b_visits", b.visits.to_string());
        meta("b_min", b.min.to_string());
        meta("b_max", b.max.to_string());
        meta("b_mean", b.mean.to_string());
    }
    if let Some(c) = checks {
        meta("tol", c.tol.to_string());
        meta("edge_sum_max_dev", c.edge_sum_max_dev.to_string());
        meta("edge_sums_ok", c.edge_sums_ok.to_string());
        meta("negative_count", c.negative_count.to_string());
        meta("no_uncoverable", c.no_uncoverable.to_string());
        meta("oracle_checked", c.oracle_checked.to_string());
        if let Some(dev) = c.oracle_max_dev {
            meta("oracle_max_dev", dev.to_string());
        }
        if let Some(ok) = c.oracle_ok {
            meta("oracle_ok", ok.to_string());
        }
        meta("ok", c.ok.to_string());
    }

    out.push_str("# section: triangles\n");
    out.push_str("a,b,c,weight\n");
    for (t, w) in &rep.weights {
        let [a, b, c] = t.vertices();
        out.push_str(&format!("{a},{b},{c},{}\n", scalar_text(w)));
    }
    out.push_str("# section: edge_sums\n");
    out.push_str("u,v,sum\n");
    for ((u, v), s) in &rep.edge_sums {
        out.push_str(&format!("{u},{v},{}\n", scalar_text(s)));
    }
    if !rep.uncoverable_edges.is_empty() {
        out.push_str("# section: uncoverable_edges\n");
        out.push_str("u,v\n");
        for &(u, v) in &rep.uncoverable_edges {
            out.push_str(&format!("{u},{v}\n"));
        }
    }
    out
}
