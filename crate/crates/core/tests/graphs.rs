mod common;

use common::{beta_near_tie, knn_near_tie, models_for_dim, out_sets, random_config};
use condensate::graphs::{build_adjacency, build_adjacency_brute, GraphModel, ModelKind};
use proptest::prelude::*;

fn near_tie(cfg: &condensate::point_process::PointConfig, model: &GraphModel) -> bool {
    match model.kind {
        ModelKind::Knn { k } => knn_near_tie(cfg, k, 1e-9),
        ModelKind::BetaSkeleton { beta } => beta_near_tie(cfg, beta, 1e-9),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn indexed_matches_brute(dim in 1usize..=3, m in 3usize..=300, seed in any::<u64>()) {
        let cfg = random_config(dim, m, seed);
        for model in models_for_dim(dim) {
            let a = build_adjacency(&cfg, &model).unwrap();
            let b = build_adjacency_brute(&cfg, &model).unwrap();
            prop_assert_eq!(out_sets(&a), out_sets(&b), "{}", model.label());
        }
    }

    #[test]
    fn scale_invariance(dim in 1usize..=3, m in 3usize..=120, seed in any::<u64>()) {
        let cfg = random_config(dim, m, seed);
        for model in models_for_dim(dim) {
            if near_tie(&cfg, &model) {
                continue;
            }
            let base = out_sets(&build_adjacency(&cfg, &model).unwrap());
            for tau in [0.5, 2.0, 10.0] {
                let scaled = out_sets(&build_adjacency(&cfg.scaled(tau), &model).unwrap());
                prop_assert_eq!(&base, &scaled, "{} tau={}", model.label(), tau);
            }
        }
    }

    #[test]
    fn rigid_motion_invariance(m in 3usize..=60, seed in any::<u64>(), theta in 0.0..std::f64::consts::TAU, sx in -50.0..50.0f64, sy in -50.0..50.0f64) {
        let cfg = random_config(2, m, seed);
        for model in models_for_dim(2) {
            if near_tie(&cfg, &model) {
                continue;
            }
            let base = out_sets(&build_adjacency(&cfg, &model).unwrap());
            let moved = out_sets(&build_adjacency(&cfg.rotated2(theta).translated(&[sx, sy]), &model).unwrap());
            prop_assert_eq!(&base, &moved, "{}", model.label());
        }
    }

    #[test]
    fn beta_monotone(m in 3usize..=150, seed in any::<u64>()) {
        let cfg = random_config(2, m, seed);
        let edges = |b: f64| {
            let adj = build_adjacency(&cfg, &GraphModel::beta_skeleton(b).unwrap()).unwrap();
            adj.arcs().collect::<std::collections::BTreeSet<_>>()
        };
        let (e1, e12, e2) = (edges(1.0), edges(1.2), edges(2.0));
        prop_assert!(e2.is_subset(&e12));
        prop_assert!(e12.is_subset(&e1));
    }

    #[test]
    fn degree_and_symmetry(dim in 1usize..=3, m in 1usize..=100, seed in any::<u64>()) {
        let cfg = random_config(dim, m, seed);
        for model in models_for_dim(dim) {
            let adj = build_adjacency(&cfg, &model).unwrap();
            for i in 0..adj.len() {
                prop_assert!(!adj.out(i).contains(&i));
                match model.kind {
                    ModelKind::Knn { k } => prop_assert_eq!(adj.out(i).len(), k.min(m - 1)),
                    ModelKind::BetaSkeleton { .. } => {
                        for &j in adj.out(i) {
                            prop_assert!(adj.has_arc(j, i));
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn unknown_node_is_an_error() {
    let cfg = random_config(2, 5, 1);
    let adj = build_adjacency(&cfg, &GraphModel::nng(2)).unwrap();
    assert!(adj.out_neighbors(5).is_err());
    assert!(GraphModel::beta_skeleton(0.5).is_err());
    assert!(GraphModel::knn(2, 0).is_err());
}
