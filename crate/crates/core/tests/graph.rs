use funnelsync_core::graph::{Graph, GraphError, Spectrum};
use funnelsync_core::netsim::diffusive_terms;
use nalgebra::DMatrix;
use proptest::prelude::*;

/// Random spanning tree plus extra edges.
fn connected_graph() -> impl Strategy<Value = Graph> {
    (2usize..=10)
        .prop_flat_map(|n| {
            let parents: Vec<_> = (1..n).map(|k| 0..k).collect();
            let tree_w = proptest::collection::vec(0.1f64..5.0, n - 1);
            let extra = proptest::collection::vec((0..n, 0..n, 0.1f64..5.0), 0..2 * n);
            (Just(n), parents, tree_w, extra)
        })
        .prop_map(|(n, parents, tree_w, extra)| {
            let mut edges: Vec<(usize, usize, f64)> = Vec::new();
            let mut seen = std::collections::HashSet::new();
            for (k, (p, w)) in parents.into_iter().zip(tree_w).enumerate() {
                seen.insert((p, k + 1));
                edges.push((p, k + 1, w));
            }
            for (i, j, w) in extra {
                let key = (i.min(j), i.max(j));
                if i != j && seen.insert(key) {
                    edges.push((key.0, key.1, w));
                }
            }
            Graph::new(n, &edges).unwrap()
        })
}

fn as_nalgebra(g: &Graph) -> DMatrix<f64> {
    let l = g.laplacian();
    DMatrix::from_fn(g.n(), g.n(), |i, j| l[(i, j)])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn eigenvalues_match_nalgebra(g in connected_graph()) {
        let s = Spectrum::of(&g).unwrap();
        let mut oracle: Vec<f64> = as_nalgebra(&g).symmetric_eigen().eigenvalues.iter().copied().collect();
        oracle.sort_by(f64::total_cmp);
        let scale = 1.0 + oracle[oracle.len() - 1];
        prop_assert_eq!(s.eigenvalues()[0], 0.0);
        for (a, b) in s.eigenvalues().iter().zip(&oracle) {
            prop_assert!((a - b).abs() <= 1e-10 * scale, "{a} vs {b}");
        }
    }

    #[test]
    fn reconstruction_and_orthogonality(g in connected_graph()) {
        let s = Spectrum::of(&g).unwrap();
        let n = g.n();
        let r = s.basis();
        let lam = s.lambda();
        let l = g.laplacian();
        let mut err: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let rec: f64 = (0..n - 1).map(|k| r[(i, k)] * lam[k] * r[(j, k)]).sum();
                err = err.max((rec - l[(i, j)]).abs());
            }
        }
        prop_assert!(err <= 1e-10 * (1.0 + s.lambda_max()));
        let ones = r.tr_mul_vec(&vec![1.0; n]);
        let norm = ones.iter().map(|v| v * v).sum::<f64>().sqrt();
        prop_assert!(norm <= 1e-10);
        for a in 0..n - 1 {
            for b in 0..n - 1 {
                let dot: f64 = (0..n).map(|i| r[(i, a)] * r[(i, b)]).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                prop_assert!((dot - want).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn diffusive_terms_sum_to_zero(g in connected_graph(), seed in proptest::collection::vec(-1e3f64..1e3, 10)) {
        let x = &seed[..g.n()];
        let nu = diffusive_terms(&g, x).unwrap();
        let xmax = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        prop_assert!(nu.iter().sum::<f64>().abs() <= 1e-12 * g.n() as f64 * xmax.max(1.0));
        let l = g.laplacian();
        for i in 0..g.n() {
            let lx: f64 = (0..g.n()).map(|j| l[(i, j)] * x[j]).sum();
            prop_assert!((nu[i] + lx).abs() <= 1e-12 * (1.0 + lx.abs()) * g.n() as f64 * 10.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn disagreement_relation(g in connected_graph(), seed in proptest::collection::vec(-10.0f64..10.0, 10)) {
        let x = &seed[..g.n()];
        let n = g.n() as f64;
        let s = Spectrum::of(&g).unwrap();
        let nu = diffusive_terms(&g, x).unwrap();
        let lx_inf = nu.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mean = x.iter().sum::<f64>() / n;
        let lhs = x.iter().fold(0.0f64, |m, v| m.max((v - mean).abs()));
        prop_assert!(lhs <= n.sqrt() * lx_inf / s.lambda2() * (1.0 + 1e-12) + 1e-12);
    }
}

#[test]
fn path_and_complete_closed_forms() {
    let s = Spectrum::of(&Graph::complete(6, 1.0).unwrap()).unwrap();
    for l in s.lambda() {
        assert!((l - 6.0).abs() < 1e-12);
    }
    let n = 5;
    let s = Spectrum::of(&Graph::path(n, 1.0).unwrap()).unwrap();
    for (k, l) in s.eigenvalues().iter().enumerate() {
        let want = 2.0 - 2.0 * (std::f64::consts::PI * k as f64 / n as f64).cos();
        assert!((l - want).abs() < 1e-12, "k={k}");
    }
}

#[test]
fn rejects_disconnected_and_bad_edges() {
    let g = Graph::new(4, &[(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
    assert!(!g.is_connected());
    assert_eq!(Spectrum::of(&g).unwrap_err(), GraphError::NotConnected);
    assert!(matches!(Graph::new(3, &[(0, 0, 1.0)]), Err(GraphError::SelfLoop(0))));
    assert!(matches!(Graph::new(3, &[(0, 1, -1.0)]), Err(GraphError::NonPositiveWeight { .. })));
    assert!(matches!(Graph::new(3, &[(0, 1, 1.0), (1, 0, 2.0)]), Err(GraphError::DuplicateEdge { .. })));
    assert!(matches!(Graph::new(3, &[(0, 5, 1.0)]), Err(GraphError::NodeOutOfRange { node: 5, n: 3 })));
}
