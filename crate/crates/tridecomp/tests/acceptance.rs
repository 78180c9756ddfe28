//! Acceptance gate for the crate: one test per criterion, each enforcing
//! its own runtime budget and printing one summary line.
//!
//! The criteria cover the threshold constant (exact and floating), the
//! certification window, exact agreement of the two weighting routes on a
//! corpus, per-edge sums, nonnegativity above the critical density with
//! the graph-to-program bridge, the negative family below it, the clamp
//! chain, the terminal grid optimum, the helper validations, and the CLI's
//! oracle cross-check.

use std::collections::BTreeMap;
use std::process::Command;
use std::time::Instant;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tridecomp::decomp::{decompose, extract_program_point, w1_hat, w_oracle};
use tridecomp::graph::{
    gen_blowup, gen_complete, gen_gnp_min_degree, BlowupMode, Graph, GraphError,
};
use tridecomp::program::search::{
    certify, grid_search, random_clamp_test, solve_threshold, threshold_exact, Verdict,
};
use tridecomp::program::{
    check_domain, clamp_step, eval_objective, eval_w10, lemma_fn, HelperName, ProgramPoint, Var,
};
use tridecomp::scalar::{Quad21, Rat128, Scalar};
use tridecomp::tol;

fn finish(name: &str, started: Instant, budget_s: f64) {
    let dt = started.elapsed().as_secs_f64();
    assert!(
        dt < budget_s,
        "{name} exceeded its {budget_s}s budget ({dt:.1}s)"
    );
    println!("{name}: PASS ({dt:.2}s)");
}

/// Draws a conditioned dense sample, probing nearby seeds when the
/// generator's own resampling budget runs out.
fn sample_conditioned(n: usize, p: f64, delta_min: usize, base_seed: u64) -> Graph {
    for s in 0..20 {
        match gen_gnp_min_degree(n, p, delta_min, base_seed + s) {
            Ok(g) => return g,
            Err(GraphError::GenerationTimeout { .. }) => continue,
            Err(e) => panic!("generator failed: {e}"),
        }
    }
    panic!("no sample with min degree {delta_min} near seed {base_seed}");
}

#[test]
fn criterion_01_threshold_constant() {
    let t0 = Instant::now();
    let g = |d: f64| 7.0 * d * d - 7.0 * d + 1.0;
    let (mut lo, mut hi) = (0.1, 0.25);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let root = 0.5 * (lo + hi);
    let t = solve_threshold();
    assert!((t - root).abs() <= tol::THRESHOLD_ABS);
    assert!((t - 0.1726731646460114).abs() <= tol::THRESHOLD_ABS);
    finish("criterion 01 threshold constant", t0, 1.0);
}

#[test]
fn criterion_02_exact_terminal_value_at_threshold() {
    let t0 = Instant::now();
    let d = threshold_exact();
    let one = Quad21::from_ratio(1, 1);
    assert_eq!(eval_w10(&d, &Quad21::from_ratio(0, 1)), one);
    // The closed form is 3d(1-d)/(1-2d)^2; both factors equal 3/7 exactly.
    let three7 = Quad21::from_ratio(3, 7);
    let om2d = one.clone() - Quad21::from_ratio(2, 1) * d.clone();
    assert_eq!(om2d.clone() * om2d, three7.clone());
    assert_eq!(Quad21::from_ratio(3, 1) * d.clone() * (one - d), three7);
    finish("criterion 02 exact terminal value", t0, 1.0);
}

#[test]
fn criterion_03_certify_window() {
    let t0 = Instant::now();
    let t = solve_threshold();
    let below = certify(t - tol::CERTIFY_ABS).unwrap();
    assert_eq!(below.verdict, Verdict::CertifiedLe1);
    assert!(below.validations_ok);
    let above = certify(t + tol::CERTIFY_ABS).unwrap();
    assert_eq!(above.verdict, Verdict::Exceeds1);
    finish("criterion 03 certify window", t0, 1.0);
}

#[test]
fn criterion_04_oracle_agrees_on_corpus() {
    let t0 = Instant::now();
    let mut corpus: Vec<Graph> = Vec::new();
    for n in 5..=8 {
        corpus.push(gen_complete(n).unwrap());
    }
    corpus.push(gen_blowup(&gen_complete(5).unwrap(), 2, BlowupMode::Independent).unwrap());
    let path3 = Graph::parse_edge_list("n 3\n0 1\n1 2\n").unwrap();
    corpus.push(gen_blowup(&path3, 3, BlowupMode::Clique).unwrap());

    for (ci, n) in (8..=11).enumerate() {
        for (pi, p) in [0.85, 0.9, 0.95].into_iter().enumerate() {
            let mut found = 0;
            let base = (ci as u64 * 3 + pi as u64) * 1000;
            for s in 0..200u64 {
                let g = match gen_gnp_min_degree(n, p, 0, base + s) {
                    Ok(g) => g,
                    Err(_) => continue,
                };
                if decompose::<Rat128>(&g).is_ok() {
                    corpus.push(g);
                    found += 1;
                    if found == 4 {
                        break;
                    }
                }
            }
            assert_eq!(found, 4, "cell n={n} p={p} starved");
        }
    }
    assert!(corpus.len() >= 50, "corpus has only {}", corpus.len());

    for g in &corpus {
        let rep = decompose::<Rat128>(g).unwrap();
        for (t, w) in &rep.weights {
            let oracle: Rat128 = w_oracle(g, *t).unwrap();
            assert_eq!(&oracle, w, "routes disagree on {:?}", t.vertices());
        }
    }
    finish("criterion 04 oracle agreement corpus", t0, 300.0);
}

#[test]
fn criterion_05_edge_sums() {
    let t0 = Instant::now();
    // Exact route: each covered edge sums to exactly one.
    let c4 = tridecomp::graph::gen_cycle(4).unwrap();
    let exact_graphs = vec![
        gen_complete(7).unwrap(),
        gen_blowup(&c4, 5, BlowupMode::Clique).unwrap(),
        gen_blowup(&gen_complete(5).unwrap(), 2, BlowupMode::Independent).unwrap(),
    ];
    for g in &exact_graphs {
        let rep = decompose::<Rat128>(g).unwrap();
        assert!(!rep.edge_sums.is_empty());
        for ((u, v), s) in &rep.edge_sums {
            assert_eq!(s, &<Rat128 as Scalar>::one(), "edge ({u},{v})");
        }
    }
    // Float route: sums within the edge-sum tolerance.
    for seed in [1, 2, 3] {
        let g = sample_conditioned(50, 0.9, 42, seed);
        let rep = decompose::<f64>(&g).unwrap();
        assert!(rep.uncoverable_edges.is_empty());
        for ((u, v), s) in &rep.edge_sums {
            assert!(
                (s - 1.0).abs() <= tol::EDGE_SUM_ABS,
                "edge ({u},{v}) sums to {s}"
            );
        }
    }
    finish("criterion 05 edge sums", t0, 120.0);
}

#[test]
fn criterion_06_nonnegative_above_threshold_with_bridge() {
    let t0 = Instant::now();
    // Twenty conditioned samples with min degree at least ceil(0.83 n),
    // which keeps the deficiency below the rebasing value 0.17.
    let cells: [(usize, f64, usize, usize); 4] = [
        (40, 0.95, 34, 8),
        (60, 0.93, 50, 5),
        (80, 0.92, 67, 4),
        (120, 0.92, 100, 3),
    ];
    let mut checked = 0usize;
    for (n, p, delta_min, count) in cells {
        for i in 0..count {
            let g = sample_conditioned(n, p, delta_min, (n as u64) * 100 + i as u64);
            assert!(g.min_degree() >= delta_min);
            let rep = decompose::<f64>(&g).unwrap();
            assert!(rep.uncoverable_edges.is_empty());
            let (wt, wmin) = rep.min_weight.unwrap();
            assert!(
                wmin >= -tol::NEG_WEIGHT_ABS,
                "n={n} seed-slot {i}: weight {wmin} at {:?}",
                wt.vertices()
            );

            // Bridge to the program chain: the residual of each ordering of
            // the minimum-weight triangle is bounded by the terminal
            // optimum at the rebased deficiency 0.17.
            let w10_017 = eval_w10(&0.17, &0.0);
            for o in wt.orderings() {
                let hat: f64 = w1_hat(&g, &o).unwrap();
                assert!(hat <= 1.0 + tol::BRIDGE_SLACK_ABS);
                assert!(
                    hat <= w10_017 + tol::BRIDGE_SLACK_ABS,
                    "residual {hat} above terminal optimum {w10_017}"
                );

                // Extracted visit points lie on the level 3 domain, both at
                // the graph's own deficiency and rebased to 0.17.
                let r = g.common_neighbors(&o.vertices());
                let y = r.iter().next().expect("delegation is total");
                let z = r
                    .iter()
                    .find(|&z| z != y && g.has_edge(y, z))
                    .expect("second delegate exists");
                let pt = extract_program_point(&g, &o, y, z).unwrap();
                check_domain(&pt).unwrap();
                assert!(pt.d() <= 0.17 + tol::DOMAIN_SLACK_ABS);
                check_domain(&pt.with_d(0.17)).unwrap();
            }
            checked += 1;
        }
    }
    assert_eq!(checked, 20);
    finish("criterion 06 nonnegativity and bridge", t0, 600.0);
}

#[test]
fn criterion_07_join_family_flags_negative_weights() {
    let t0 = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let el = dir.path().join("join1.el");
    let bin = env!("CARGO_BIN_EXE_tridecomp");

    let gen = Command::new(bin)
        .args(["gen", "join", "--k", "1", "--output"])
        .arg(&el)
        .output()
        .unwrap();
    assert!(gen.status.success());

    let verify = Command::new(bin)
        .args(["verify", "--input"])
        .arg(&el)
        .output()
        .unwrap();
    assert_eq!(verify.status.code(), Some(2), "negative weights exit 2");
    let report: serde_json::Value = serde_json::from_slice(&verify.stdout).unwrap();
    assert_eq!(report["checks"]["edge_sums_ok"], true);
    assert!(report["checks"]["negative_count"].as_u64().unwrap() > 0);
    finish("criterion 07 join family exit code", t0, 30.0);
}

#[test]
fn criterion_08_complete_graph_closed_form() {
    let t0 = Instant::now();
    for n in 5..=8usize {
        let g = gen_complete(n).unwrap();
        let rep = decompose::<Rat128>(&g).unwrap();
        let want = Rat128::new(1, n as i128 - 2);
        assert_eq!(rep.weights.len(), n * (n - 1) * (n - 2) / 6);
        for (_, w) in &rep.weights {
            assert_eq!(w, &want);
        }
        for (_, s) in &rep.edge_sums {
            assert_eq!(s, &<Rat128 as Scalar>::one());
        }
    }
    finish("criterion 08 complete graphs", t0, 10.0);
}

#[test]
fn criterion_09_clamp_chain_monotone() {
    let t0 = Instant::now();
    let ds = [0.15, 0.17, solve_threshold()];

    // The ramped level dominates the signed one from the start of the
    // chain: one step from level 3 is nonnegative and no smaller.
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for &d in &ds {
        for _ in 0..1000 {
            let x = rng.gen_range(1.0 - d..=1.0);
            let y = rng.gen_range(1.0 - d..=1.0);
            let e0 = rng.gen_range(x - d..=x);
            let e = rng.gen_range(x + y - 1.0..=1.0);
            let f = rng.gen_range(y - d..=y);
            let q0 = rng.gen_range(e + e0 - x..=1.0);
            let q = rng.gen_range(e + f - y..=1.0);
            let p = rng.gen_range(q0 + f - y..=1.0);
            let r0 = rng.gen_range(0.0..=e0);
            let r = rng.gen_range(0.0..=q0);
            let m: BTreeMap<Var, f64> = [
                (Var::X, x),
                (Var::Y, y),
                (Var::E0, e0),
                (Var::E, e),
                (Var::F, f),
                (Var::Q0, q0),
                (Var::Q, q),
                (Var::P, p),
                (Var::R0, r0),
                (Var::R, r),
            ]
            .into_iter()
            .collect();
            let p3 = ProgramPoint::from_scalars(3, d, m);
            let v3 = eval_objective(&p3).unwrap();
            let p4 = clamp_step(&p3).unwrap();
            let v4 = eval_objective(&p4).unwrap();
            assert!(v4 >= 0.0);
            assert!(v4 >= v3 - tol::CLAMP_MONOTONE_ABS);
        }
    }

    // Full chains from every level: 100k sampled points each.
    for &d in &ds {
        for level in 3..=10u8 {
            let rep = random_clamp_test(level, d, 100_000, 1000 + level as u64).unwrap();
            assert_eq!(
                rep.violations, 0,
                "level {level} d {d}: max drop {}",
                rep.max_violation
            );
        }
    }
    finish("criterion 09 clamp chain monotone", t0, 300.0);
}

#[test]
fn criterion_10_terminal_grid_optimum() {
    let t0 = Instant::now();
    let d = solve_threshold();
    let r = grid_search(9, d, 2000).unwrap();
    assert_eq!(r.best_point.get(Var::A), Some(&0.0));
    assert_eq!(r.best_point.get(Var::B), Some(&0.0));
    assert!(
        (r.best_value - 1.0).abs() <= tol::GRID_OPT_ABS,
        "optimum {} at the threshold",
        r.best_value
    );
    let r10 = grid_search(10, d, 2000).unwrap();
    assert_eq!(r10.best_point.get(Var::B), Some(&0.0));
    assert!((r10.best_value - 1.0).abs() <= tol::GRID_OPT_ABS);
    finish("criterion 10 terminal grid optimum", t0, 60.0);
}

#[test]
fn criterion_11_helper_validations() {
    let t0 = Instant::now();
    let d = 0.2 - 1e-9;

    // E stays nonpositive on [0, d] right up to the validation boundary.
    for i in 0..=1000 {
        let b = d * (i as f64) / 1000.0;
        let e = lemma_fn(HelperName::E, &[b], &d).unwrap();
        assert!(e <= 0.0, "E({b}) = {e}");
    }

    // H1 stays at most 2 on [0, d]^2; its supremum sits at (d, d).
    for i in 0..=100 {
        for j in 0..=100 {
            let s = d * (i as f64) / 100.0;
            let t = d * (j as f64) / 100.0;
            let h = lemma_fn(HelperName::H1, &[s, t], &d).unwrap();
            assert!(h <= 2.0, "H1({s},{t}) = {h}");
        }
    }
    let peak = lemma_fn(HelperName::H1, &[d, d], &d).unwrap();
    assert!((peak - 1.499999956250001).abs() < 1e-9);

    // The quadratic deciding the H1 bound changes sign exactly around its
    // roots (15 +- sqrt 17)/52.
    let poly = |d: f64| 26.0 * d * d - 15.0 * d + 2.0;
    assert!(poly(0.20) > 0.0);
    assert!(poly(0.21) < 0.0);
    assert!(poly(0.36) < 0.0);
    assert!(poly(0.37) > 0.0);
    let lo = (15.0 - 17f64.sqrt()) / 52.0;
    let hi = (15.0 + 17f64.sqrt()) / 52.0;
    assert!((lo - 0.20917104566119884).abs() < 1e-15);
    assert!((hi - 0.367_752_031_261_878_1).abs() < 1e-15);
    finish("criterion 11 helper validations", t0, 60.0);
}

#[test]
fn criterion_12_cli_cross_checks_small_graphs() {
    let t0 = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let el = dir.path().join("g10.el");
    let bin = env!("CARGO_BIN_EXE_tridecomp");

    let gen = Command::new(bin)
        .args([
            "gen",
            "gnp",
            "--n",
            "10",
            "--p",
            "0.9",
            "--delta-min",
            "7",
            "--seed",
            "5",
        ])
        .arg("--output")
        .arg(&el)
        .output()
        .unwrap();
    assert!(gen.status.success());

    let verify = Command::new(bin)
        .args(["verify", "--input"])
        .arg(&el)
        .output()
        .unwrap();
    let stderr = String::from_utf8_lossy(&verify.stderr);
    assert!(
        stderr.contains("oracle == fast"),
        "missing cross-check line; stderr: {stderr}"
    );
    assert_eq!(verify.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&verify.stdout).unwrap();
    assert_eq!(report["schema_version"], 1);
    assert_eq!(report["checks"]["oracle_checked"], true);
    assert_eq!(report["checks"]["ok"], true);
    finish("criterion 12 cli oracle cross-check", t0, 60.0);
}
