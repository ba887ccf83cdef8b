//! Sparse solvers against dense reference solutions.

mod common;

use common::*;
use purerank::*;

const ORACLE_TOL: f64 = 1e-8;

fn assert_close(a: &[f64], b: &[f64], tol: f64, what: &str) {
    let d = l1(a, b);
    assert!(
        d < tol,
        "{what}: L1 distance {d:e}\n  got      {a:?}\n  expected {b:?}"
    );
}

#[test]
fn classification_matches_reachability() {
    let mut rng = rng(11);
    for _ in 0..300 {
        let g = random_graph(&mut rng, 60);
        let c = classify(&g);
        assert_eq!(c.labels(), brute_classify(&g).as_slice());
    }
}

#[test]
fn recurrent_locals_match_dense_stationary() {
    let mut rng = rng(12);
    for _ in 0..100 {
        let g = random_graph_of(&mut rng, 50, Shape::ClosedBlocks);
        let c = classify(&g);
        for k in 0..c.recurrent_count() {
            let l = lambda_r(&g, &c, k, &SolverOptions::default()).unwrap();
            assert_close(
                &l.values,
                &dense_lambda_r(&g, c.recurrent(k)),
                ORACLE_TOL,
                "lambda_R",
            );
        }
    }
}

#[test]
fn transient_local_matches_dense_solve() {
    let mut rng = rng(13);
    let mut checked = 0;
    while checked < 100 {
        let g = random_graph_of(&mut rng, 50, Shape::Mixed);
        let c = classify(&g);
        let Some((l, theta)) = lambda_t(&g, &c, &SolverOptions::default()).unwrap() else {
            continue;
        };
        let (dense, dense_theta) = dense_lambda_t(&g, c.transient());
        assert_close(&l.values, &dense, ORACLE_TOL, "lambda_T");
        assert!((theta - dense_theta).abs() < ORACLE_TOL);
        assert!((l.theta() - theta).abs() < 1e-15);
        checked += 1;
    }
}

#[test]
fn scores_match_extended_chain_limit() {
    let mut rng = rng(14);
    for _ in 0..200 {
        let g = random_graph(&mut rng, 40);
        let r = compute(&g, &SolverOptions::default()).unwrap();
        assert_close(&r.pi, &dense_purerank(&g), ORACLE_TOL, "pi");
    }
}

#[test]
fn extended_transient_closed_form_matches_dense() {
    let mut rng = rng(15);
    let mut checked = 0;
    while checked < 50 {
        let g = random_graph_of(&mut rng, 30, Shape::Mixed);
        let c = classify(&g);
        if c.transient().is_empty() || c.transient().len() > 30 {
            continue;
        }
        let r = compute(&g, &SolverOptions::default()).unwrap();
        let chain = ExtendedChain::new(&g, &c).unwrap();
        let closed_form = chain
            .extended_transient_stationary(r.local(ClassId::Transient).unwrap())
            .unwrap();
        let dense = dense_extended_transient_stationary(&g, c.labels());
        assert_close(&closed_form, &dense, ORACLE_TOL, "lambda_T-hat");
        checked += 1;
    }
}

#[test]
fn extended_chain_matches_dense_kernel() {
    let mut rng = rng(16);
    for _ in 0..100 {
        let g = random_graph(&mut rng, 25);
        let c = classify(&g);
        let chain = ExtendedChain::new(&g, &c).unwrap();
        let dense = dense_extended_chain(&g, c.labels());
        assert_eq!(chain.state_count(), dense.m.nrows());
        for s in 0..chain.state_count() {
            let mut row = vec![0.0; chain.state_count()];
            for (t, p) in chain.transitions(s) {
                row[t] += p;
            }
            let total: f64 = row.iter().sum();
            assert!((total - 1.0).abs() < 1e-12, "row {s} sums to {total}");
            for (t, p) in row.iter().enumerate() {
                assert!((p - dense.m[(s, t)]).abs() < 1e-15, "M[{s},{t}]");
            }
            assert_eq!(
                chain.fold(s),
                if s < g.node_count() {
                    s
                } else {
                    dense.copies[s - g.node_count()]
                }
            );
        }
        let law = chain.initial_law();
        assert!((law.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(law[g.node_count()..].iter().all(|&p| p == 0.0));
    }
}

#[test]
fn extended_fixture_dangling_copy_mass() {
    // 0 <-> 1, 0 -> 2: the copy of the dangling node carries (2/7)/(9/7) = 2/9
    let g = Graph::from_edges(3, [(0, 1, 1.0), (1, 0, 1.0), (0, 2, 1.0)]).unwrap();
    let c = classify(&g);
    let chain = ExtendedChain::new(&g, &c).unwrap();
    let dense = dense_extended_transient_stationary(&g, c.labels());
    let copy = chain.copy_of(2).unwrap();
    assert!((dense[copy] - 2.0 / 9.0).abs() < 1e-12);
    assert!((dense[0] - 4.0 / 9.0).abs() < 1e-12);
    assert!((dense[1] - 3.0 / 9.0).abs() < 1e-12);
    assert!((dense_expected_sojourn(&g, c.transient()) - 3.5).abs() < 1e-12);
}

#[test]
fn hand_fixtures_agree_with_dense_reference() {
    let single = Graph::from_edges(2, [(0, 1, 1.0)]).unwrap();
    assert_close(
        &dense_purerank(&single),
        &[0.25, 0.75],
        1e-14,
        "single edge",
    );

    let three = Graph::from_edges(3, [(0, 1, 1.0), (1, 0, 1.0), (0, 2, 1.0)]).unwrap();
    assert_close(
        &dense_purerank(&three),
        &[8.0 / 27.0, 6.0 / 27.0, 13.0 / 27.0],
        1e-14,
        "three nodes",
    );
    let (lambda, theta) = dense_lambda_t(&three, &[0, 1]);
    assert_close(&lambda, &[4.0 / 7.0, 3.0 / 7.0], 1e-14, "lambda_T");
    assert!((theta - 2.0 / 7.0).abs() < 1e-14);

    let weighted = Graph::from_edges(2, [(0, 1, 1.0), (1, 0, 2.0), (0, 0, 1.0)]).unwrap();
    assert_close(
        &dense_lambda_r(&weighted, &[0, 1]),
        &[2.0 / 3.0, 1.0 / 3.0],
        1e-14,
        "weighted pair",
    );
}

#[test]
fn signed_pair_split_graph_by_enumeration() {
    let mut b = multi::MultiGraphBuilder::new();
    b.add_edge("1", "2", "s", 1.0);
    b.add_edge("2", "1", "s", -1.0);
    let mg = b.build().unwrap();
    let (g, map) = build_splitting_network(&mg).unwrap();
    // enumerate every (copy, copy) pair and compare with the splitting rule
    for src in 0..g.node_count() {
        for dst in 0..g.node_count() {
            let (i, _) = map.original(src);
            let (j, a) = map.original(dst);
            let expected = mg
                .edges()
                .iter()
                .find(|e| e.src == i && e.dst == j && e.attribute == a)
                .map(|e| e.weight);
            assert_eq!(
                g.weight(src, dst),
                expected,
                "{} -> {}",
                g.label(src),
                g.label(dst)
            );
        }
    }
    let dense = dense_purerank(&g);
    assert_close(
        &dense,
        &[1.0 / 8.0, 3.0 / 8.0, 3.0 / 8.0, 1.0 / 8.0],
        1e-14,
        "split scores",
    );
}
