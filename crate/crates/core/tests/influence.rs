use condensate::geometry::{dist, AxisBox};
use condensate::graphs::{build_adjacency, GraphModel};
use condensate::influence::{
    in_influence_zone, in_influence_zone_recompute, influence_bounding, influence_volume, nng_k_set_contains, protected_nodes,
    ConfigPair, InfluenceMethod, InfluenceZone,
};
use condensate::point_process::sample_binomial;
use condensate::scores::ScoreVariant;
use condensate::Seed;
use proptest::prelude::*;
use rand::Rng;

fn random_pair(model: GraphModel, m: usize, mask: u32, seed: u64) -> ConfigPair {
    let psi = sample_binomial(&AxisBox::centered_cube(model.dim, 2.0), m, Seed::new(seed)).unwrap();
    let mut phi: Vec<usize> = (0..m).filter(|i| mask >> i & 1 == 1).collect();
    if phi.is_empty() {
        phi.push(0);
    }
    ConfigPair::new(phi, psi, model, ScoreVariant::dir(15.0)).unwrap()
}

fn planar_models() -> [GraphModel; 3] {
    [GraphModel::nng(2), GraphModel::knn(2, 2).unwrap(), GraphModel::beta_skeleton(1.5).unwrap()]
}

fn quad(pair: &ConfigPair) -> (f64, f64) {
    let v = influence_volume(pair, InfluenceMethod::Quadrature { rel_tol: 1e-4 }).unwrap().volume;
    (v.value, v.bracket_width())
}

fn probe(bx: &AxisBox, rng: &mut impl Rng) -> Vec<f64> {
    (0..bx.dim()).map(|i| bx.lower[i] + rng.random::<f64>() * bx.side(i)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn scale_covariance(m in 3usize..=7, mask in any::<u32>(), seed in any::<u64>()) {
        for model in planar_models() {
            let pair = random_pair(model, m, mask, seed);
            let (v, w) = quad(&pair);
            for tau in [0.5, 2.0] {
                let (vt, wt) = quad(&pair.scaled(tau));
                let want = tau * tau * v;
                prop_assert!((vt - want).abs() <= wt + tau * tau * w + 1e-12, "{}: {} vs {}", model.label(), vt, want);
            }
        }
    }

    #[test]
    fn rigid_motion_invariance(m in 3usize..=7, mask in any::<u32>(), seed in any::<u64>(), theta in 0.0..std::f64::consts::TAU) {
        for model in planar_models() {
            let pair = random_pair(model, m, mask, seed);
            let moved = pair.rotated2(theta).translated(&[3.0, -7.0]);
            if build_adjacency(&pair.psi, &model).unwrap().arcs().collect::<Vec<_>>()
                != build_adjacency(&moved.psi, &model).unwrap().arcs().collect::<Vec<_>>()
            {
                continue;
            }
            let (v, w) = quad(&pair);
            let (vm, wm) = quad(&moved);
            prop_assert!((v - vm).abs() <= w + wm + 1e-12, "{}: {} vs {}", model.label(), v, vm);
        }
    }

    #[test]
    fn bounding_contains_zone(m in 3usize..=6, mask in any::<u32>(), seed in any::<u64>()) {
        for model in planar_models() {
            let pair = random_pair(model, m, mask, seed);
            let bx = influence_bounding(&pair);
            let wide = bx.inflated(1.0, 1.0);
            let mut rng = Seed::new(seed).fork(3).rng();
            for _ in 0..300 {
                let y = probe(&wide, &mut rng);
                if bx.contains(&y) || pair.psi.contains_point(&y) {
                    continue;
                }
                prop_assert!(!in_influence_zone_recompute(&pair, &y).unwrap());
            }
        }
    }

    #[test]
    fn fast_membership_matches_recompute(m in 3usize..=6, mask in any::<u32>(), seed in any::<u64>()) {
        for model in planar_models() {
            let pair = random_pair(model, m, mask, seed);
            let bx = influence_bounding(&pair).inflated(0.2, 0.0);
            let mut rng = Seed::new(seed).fork(4).rng();
            for _ in 0..300 {
                let y = probe(&bx, &mut rng);
                prop_assert_eq!(in_influence_zone(&pair, &y).unwrap(), in_influence_zone_recompute(&pair, &y).unwrap());
            }
        }
    }

    #[test]
    fn enlarging_phi_never_shrinks(m in 3usize..=7, mask in any::<u32>(), extra in any::<u32>(), seed in any::<u64>()) {
        for model in planar_models() {
            let small = random_pair(model, m, mask, seed);
            let mut big = small.clone();
            big.phi.extend((0..m).filter(|i| extra >> i & 1 == 1 && !small.phi.contains(i)));
            big.phi.sort_unstable();
            let (zs, zb) = (InfluenceZone::new(&small), InfluenceZone::new(&big));
            let bx = zb.bounding().clone();
            let mut rng = Seed::new(seed).fork(5).rng();
            for _ in 0..2000 {
                let y = probe(&bx, &mut rng);
                if zs.contains_point(&y) {
                    prop_assert!(zb.contains_point(&y));
                }
            }
        }
    }
}

#[test]
fn nng_zone_is_ball_union_pointwise() {
    let model = GraphModel::nng(2);
    for case in 0..20u64 {
        let mut rng = Seed::new(500).child(case).rng();
        let m = rng.random_range(2..=7usize);
        let pair = random_pair(model, m, rng.random(), 600 + case);
        let adj = build_adjacency(&pair.psi, &model).unwrap();
        let prot = protected_nodes(&adj, &pair.phi);
        let bx = influence_bounding(&pair).inflated(0.2, 0.0);
        let mut compared = 0;
        while compared < 10_000 {
            let y = probe(&bx, &mut rng);
            let near = prot.iter().any(|&x| {
                let p = pair.psi.point(x);
                (dist(p, &y) - dist(p, pair.psi.point(adj.out(x)[0]))).abs() < 1e-9
            });
            if near || pair.psi.contains_point(&y) {
                continue;
            }
            assert_eq!(in_influence_zone(&pair, &y).unwrap(), nng_k_set_contains(&pair, &y), "case {case} y {y:?}");
            compared += 1;
        }
    }
}

#[test]
fn quadrature_and_mc_agree() {
    for case in 0..20u64 {
        let mut rng = Seed::new(700).child(case).rng();
        let model = planar_models()[case as usize % 3];
        let pair = random_pair(model, rng.random_range(3..=6), rng.random(), 800 + case);
        let q = influence_volume(&pair, InfluenceMethod::Quadrature { rel_tol: 1e-4 }).unwrap().volume;
        let mc = influence_volume(&pair, InfluenceMethod::Mc { samples: 200_000, seed: Seed::new(case) }).unwrap().volume;
        assert!((q.value - mc.value).abs() <= 3.0 * mc.std_error + q.bracket_width(), "case {case}: {} vs {} ± {}", q.value, mc.value, mc.std_error);
    }
}
