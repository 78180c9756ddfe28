//! Randomized invariants of the weighting and the program chain, plus the
//! frozen values of the structured example families.

use proptest::prelude::*;

use tridecomp::cliques::{enumerate_triangles, extension_count, Triangle};
use tridecomp::decomp::{decompose, w1_hat, w_fast, w_oracle, w_oracle_ordered, DecompError};
use tridecomp::graph::{
    gen_blowup, gen_complete, gen_cycle, gen_gnp_min_degree, BlowupMode, Graph,
};
use tridecomp::program::search::random_clamp_test;
use tridecomp::program::{clamp_step, eval_objective, lemma_fn, HelperName, ProgramPoint, Var};
use tridecomp::scalar::{BigRat, Rat128, Scalar};
use tridecomp::tol;

use num_bigint::BigInt;

fn dense_graph(n: usize, p: f64, seed: u64) -> Graph {
    gen_gnp_min_degree(n, p, 0, seed).expect("unconditioned sample always succeeds")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Extending the base of a common neighborhood can only shrink it.
    #[test]
    fn extension_counts_shrink_monotonically(seed in any::<u64>(), n in 6usize..=14) {
        let g = dense_graph(n, 0.9, seed);
        for t in enumerate_triangles(&g) {
            let [a, b, c] = t.vertices();
            let full = extension_count(&g, &[a, b, c]).unwrap();
            for pair in [[a, b], [a, c], [b, c]] {
                let part = extension_count(&g, &pair).unwrap();
                prop_assert!(full <= part, "triangle count above pair count");
            }
        }
    }

    /// On graphs where delegation is total the two routes agree exactly and
    /// every per-edge sum is exactly one.
    #[test]
    fn oracle_and_fast_agree_exactly(seed in any::<u64>(), n in 6usize..=9) {
        let g = dense_graph(n, 0.92, seed);
        let rep = match decompose::<Rat128>(&g) {
            Ok(rep) => rep,
            Err(DecompError::DelegationUndefined { .. }) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(format!("{e}"))),
        };
        for (t, w) in &rep.weights {
            let oracle: Rat128 = w_oracle(&g, *t).unwrap();
            prop_assert_eq!(&oracle, w);
        }
        for (_, s) in &rep.edge_sums {
            prop_assert_eq!(s, &<Rat128 as Scalar>::one());
        }
    }

    /// The merged six-ordering loop inside `decompose` reproduces the
    /// standalone evaluator bit for bit in floating point, and exactly in
    /// rational arithmetic.
    #[test]
    fn merged_loop_equals_standalone(seed in any::<u64>(), n in 6usize..=12) {
        let g = dense_graph(n, 0.9, seed);
        let rep = match decompose::<f64>(&g) {
            Ok(rep) => rep,
            Err(DecompError::DelegationUndefined { .. }) => return Ok(()),
            Err(e) => return Err(TestCaseError::fail(format!("{e}"))),
        };
        let exact = decompose::<Rat128>(&g).unwrap();
        for ((t, wf), (_, wr)) in rep.weights.iter().zip(&exact.weights) {
            let standalone: f64 = w_fast(&g, *t).unwrap();
            prop_assert_eq!(wf.to_bits(), standalone.to_bits());
            let standalone_exact: Rat128 = w_fast(&g, *t).unwrap();
            prop_assert_eq!(&standalone_exact, wr);
            prop_assert!((wf - wr.to_f64()).abs() <= tol::CROSS_CHECK_ABS);
        }
    }

    /// The one-step residual ties to the brute-force oracle: on totality
    /// graphs `w1_hat(O) = 1 - 6 |N^({x1,x2})| w_oracle(O)` exactly.
    #[test]
    fn residual_matches_the_oracle_route(seed in any::<u64>(), n in 6usize..=9) {
        let g = dense_graph(n, 0.92, seed);
        if decompose::<Rat128>(&g).is_err() {
            return Ok(());
        }
        for t in enumerate_triangles(&g).into_iter().take(4) {
            for o in t.orderings() {
                let hat: Rat128 = w1_hat(&g, &o).unwrap();
                let pair = extension_count(&g, &[o.x1(), o.x2()]).unwrap();
                let ordered: Rat128 = w_oracle_ordered(&g, &o).unwrap();
                let expect = <Rat128 as Scalar>::one()
                    - Rat128::from_count(6) * Rat128::from_count(pair) * ordered;
                prop_assert_eq!(hat, expect);
            }
        }
    }

    /// Graphs survive a save/load reimaging unchanged.
    #[test]
    fn edge_lists_round_trip(seed in any::<u64>(), n in 1usize..=20, p in 0.0f64..1.0) {
        let g = dense_graph(n, p, seed);
        let again = Graph::parse_edge_list(&g.to_edge_list_string()).unwrap();
        prop_assert_eq!(g.n(), again.n());
        prop_assert_eq!(g.edges(), again.edges());
    }

    /// The conditioned random generator is a function of its parameters.
    #[test]
    fn gnp_generation_is_deterministic(seed in any::<u64>(), n in 2usize..=16) {
        let a = gen_gnp_min_degree(n, 0.8, 1, seed);
        let b = gen_gnp_min_degree(n, 0.8, 1, seed);
        match (a, b) {
            (Ok(x), Ok(y)) => prop_assert_eq!(x.edges(), y.edges()),
            (Err(_), Err(_)) => {}
            _ => return Err(TestCaseError::fail("one attempt timed out")),
        }
    }

    /// The terminal level is a fixed point of the clamp step and matches
    /// its closed form after one application.
    #[test]
    fn terminal_clamp_is_a_fixed_point(d in 0.01f64..0.24, frac in 0.0f64..=1.0) {
        let b = d * frac;
        let pt = ProgramPoint::from_scalars(10, d, [(Var::B, b)].into_iter().collect());
        let stepped = clamp_step(&pt).unwrap();
        prop_assert_eq!(stepped.level(), 10);
        prop_assert_eq!(stepped.get(Var::B), Some(&0.0));
        let v = eval_objective(&stepped).unwrap();
        let closed = 3.0 * d * (1.0 - d) / ((1.0 - 2.0 * d) * (1.0 - 2.0 * d));
        prop_assert!((v - closed).abs() < 1e-12);
        prop_assert_eq!(&clamp_step(&stepped).unwrap(), &stepped);
    }

    /// The helpers `G` and `F` satisfy their exact algebraic identity on
    /// random rational arguments.
    #[test]
    fn g_f_identity_on_random_rationals(dn in 1i64..=200, bn in 0i64..=200) {
        // d in (0, 1/4) with denominator 804, b in [0, d].
        let rat = |n: i64, den: i64| BigRat::new(BigInt::from(n), BigInt::from(den));
        let d = rat(dn, 804);
        let b = d.clone() * rat(bn, 200);
        let g0 = lemma_fn(HelperName::G, &[<BigRat as Scalar>::zero()], &d).unwrap();
        let gb = lemma_fn(HelperName::G, std::slice::from_ref(&b), &d).unwrap();
        let fb = lemma_fn(HelperName::F, std::slice::from_ref(&b), &d).unwrap();
        let one = <BigRat as Scalar>::one();
        let om2d = one.clone() - BigRat::from_count(2) * d.clone();
        let om2db = om2d.clone() - b.clone();
        let omdb = one - d - b;
        prop_assert_eq!((g0 - gb) * om2d * om2db.clone() * om2db * omdb, -fb);
    }

    /// Random clamp chains never decrease, whatever the seed.
    #[test]
    fn clamp_chains_are_monotone(seed in any::<u64>(), level in 3u8..=10) {
        let rep = random_clamp_test(level, 0.17, 50, seed).unwrap();
        prop_assert_eq!(rep.violations, 0);
    }
}

#[test]
fn complete_multipartite_without_5_cliques_fails_delegation() {
    // Independent blow-up of a 4-clique: 4-cliques exist but none extends
    // to a 5-clique, so the first failing share is the first 4-set.
    let k4 = gen_complete(4).unwrap();
    let g = gen_blowup(&k4, 3, BlowupMode::Independent).unwrap();
    match decompose::<f64>(&g) {
        Err(DecompError::DelegationUndefined { prefix }) => {
            assert_eq!(prefix, vec![0, 3, 6, 9]);
        }
        other => panic!("expected undefined delegation, got {other:?}"),
    }
}

#[test]
fn cycle_blowup_reaches_its_negative_minimum() {
    let c4 = gen_cycle(4).unwrap();
    let g = gen_blowup(&c4, 5, BlowupMode::Clique).unwrap();
    let rep = decompose::<Rat128>(&g).unwrap();
    assert_eq!(rep.weights.len(), 440);
    let (_, min) = rep.min_weight.unwrap();
    assert_eq!(min, Rat128::new(-1, 12));
    for (_, s) in &rep.edge_sums {
        assert_eq!(s, &<Rat128 as Scalar>::one());
    }
}

#[test]
fn complete_5_partite_weights_are_uniform() {
    let k5 = gen_complete(5).unwrap();
    let g = gen_blowup(&k5, 2, BlowupMode::Independent).unwrap();
    let rep = decompose::<Rat128>(&g).unwrap();
    for (t, w) in &rep.weights {
        assert_eq!(w, &Rat128::new(1, 6), "triangle {:?}", t.vertices());
    }
}

#[test]
fn complete_graph_weights_follow_the_closed_form() {
    for n in 5..=8 {
        let g = gen_complete(n).unwrap();
        let rep = decompose::<Rat128>(&g).unwrap();
        let want = Rat128::new(1, (n as i128) - 2);
        for (_, w) in &rep.weights {
            assert_eq!(w, &want);
        }
    }
}

#[test]
fn triangle_free_edges_are_reported_uncoverable() {
    let g = gen_cycle(6).unwrap();
    let rep = decompose::<f64>(&g).unwrap();
    assert!(rep.weights.is_empty());
    assert_eq!(rep.uncoverable_edges.len(), 6);
    assert!(rep.min_weight.is_none());
}

#[test]
fn parse_rejects_malformed_input() {
    assert!(Graph::parse_edge_list("").is_err());
    assert!(Graph::parse_edge_list("n 3\n0 0\n").is_err());
    assert!(Graph::parse_edge_list("n 3\n0 5\n").is_err());
    assert!(Graph::parse_edge_list("0 1\n").is_err());
    let tri = Triangle::new(
        &Graph::parse_edge_list("n 3\n0 1\n0 2\n1 2\n").unwrap(),
        0,
        1,
        2,
    );
    assert!(tri.is_ok());
}
