use std::collections::BTreeSet;

use cvalue::pdg::{cdg_impact, ddg_impact, impact_range, FunctionPDG};
use proptest::prelude::*;

/// Transitive closure by Floyd-Warshall; `r[i][j]` when j is reachable from i (reflexive).
fn closure(n: usize, edges: &BTreeSet<(usize, usize)>) -> Vec<Vec<bool>> {
    let mut r = vec![vec![false; n]; n];
    for (i, row) in r.iter_mut().enumerate() {
        row[i] = true;
    }
    for &(a, b) in edges {
        r[a][b] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if r[i][k] {
                for j in 0..n {
                    if r[k][j] {
                        r[i][j] = true;
                    }
                }
            }
        }
    }
    r
}

fn oracle(g: &FunctionPDG, changed: &BTreeSet<usize>) -> (usize, usize) {
    let n = g.len();
    let d = closure(n, &g.ddg_edges);
    let ddg = (0..n)
        .filter(|&v| changed.iter().any(|&c| d[c][v] || d[v][c]))
        .count();
    let c = closure(n, &g.cdg_edges);
    let preds: Vec<usize> = changed
        .iter()
        .copied()
        .filter(|&x| g.cdg_edges.iter().filter(|e| e.0 == x).count() >= 2)
        .collect();
    let cdg = (0..n).filter(|&v| preds.iter().any(|&p| c[p][v])).count();
    (ddg, cdg)
}

fn instance() -> impl Strategy<Value = (FunctionPDG, BTreeSet<usize>)> {
    (1usize..=20).prop_flat_map(|n| {
        (
            prop::collection::vec((0..n, 0..n), 0..3 * n),
            prop::collection::vec((0..n, 0..n), 0..2 * n),
            prop::collection::btree_set(0..n, 0..=n),
        )
            .prop_map(move |(d, c, ch)| {
                let d: Vec<_> = d.into_iter().filter(|(a, b)| a != b).collect();
                (FunctionPDG::from_edges(n, &d, &c), ch)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn impacts_match_reachability_and_ir_is_bounded((g, changed) in instance()) {
        let (dn, cn) = oracle(&g, &changed);
        let n = g.len() as f64;
        let d = ddg_impact(&g, &changed);
        let c = cdg_impact(&g, &changed);
        prop_assert_eq!(d, dn as f64 / n);
        prop_assert_eq!(c, cn as f64 / n);
        let ir: f64 = impact_range(d, c);
        prop_assert!((1.0..=3.0).contains(&ir));
    }
}
