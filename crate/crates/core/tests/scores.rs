mod common;

use common::{models_for_dim, random_config};
use condensate::geometry::dist;
use condensate::graphs::build_adjacency;
use condensate::scores::{score_all, ScoreVariant, Variant};
use proptest::prelude::*;

fn sv(v: Variant, alpha: f64) -> ScoreVariant {
    ScoreVariant::new(v, alpha).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn variant_identities(dim in 1usize..=3, m in 2usize..=80, seed in any::<u64>(), alpha in 0.5..20.0f64) {
        let cfg = random_config(dim, m, seed);
        for model in models_for_dim(dim) {
            let adj = build_adjacency(&cfg, &model).unwrap();
            let dir = score_all(&adj, &sv(Variant::Dir, alpha));
            let undir = score_all(&adj, &sv(Variant::Undir, alpha));
            let bidir = score_all(&adj, &sv(Variant::Bidir, alpha));
            for i in 0..adj.len() {
                let scale = dir[i].max(f64::MIN_POSITIVE);
                prop_assert!((dir[i] - undir[i] - bidir[i]).abs() <= 1e-12 * scale);
                prop_assert!(bidir[i] >= 0.0 && bidir[i] <= 0.5 * dir[i] * (1.0 + 1e-12));
                prop_assert!(undir[i] >= 0.5 * dir[i] * (1.0 - 1e-12) && undir[i] <= dir[i] * (1.0 + 1e-12));
            }
            // Σ ξ_undir = Σ over undirected edges |e|^α, each edge once.
            let mut edges = std::collections::BTreeSet::new();
            for (a, b) in adj.arcs() {
                edges.insert((a.min(b), a.max(b)));
            }
            let by_edges: f64 = edges.iter().map(|&(a, b)| dist(cfg.point(a), cfg.point(b)).powf(alpha)).sum();
            let total: f64 = undir.iter().sum();
            prop_assert!((total - by_edges).abs() <= 1e-9 * by_edges.max(f64::MIN_POSITIVE));
        }
    }

    #[test]
    fn scaling_law(dim in 1usize..=3, m in 2usize..=80, seed in any::<u64>(), alpha in 0.5..20.0f64) {
        let cfg = random_config(dim, m, seed);
        for model in models_for_dim(dim) {
            let adj = build_adjacency(&cfg, &model).unwrap();
            for tau in [0.5, 2.0] {
                let adj_t = build_adjacency(&cfg.scaled(tau), &model).unwrap();
                for v in [Variant::Dir, Variant::Undir, Variant::Bidir] {
                    let a = score_all(&adj, &sv(v, alpha));
                    let b = score_all(&adj_t, &sv(v, alpha));
                    for (x, y) in a.iter().zip(&b) {
                        let want = x * tau.powf(alpha);
                        prop_assert!((y - want).abs() <= 1e-9 * want.abs().max(f64::MIN_POSITIVE), "{} vs {}", y, want);
                    }
                }
            }
        }
    }
}
