#![allow(dead_code)]

use condensate::geometry::AxisBox;
use condensate::graphs::{knn_ranked, DirectedAdjacency, GraphModel};
use condensate::point_process::{sample_binomial, PointConfig};
use condensate::Seed;

/// `m` uniform points on a cube sized for unit intensity.
pub fn random_config(dim: usize, m: usize, seed: u64) -> PointConfig {
    let side = (m as f64).powf(1.0 / dim as f64);
    sample_binomial(&AxisBox::centered_cube(dim, side), m, Seed::new(seed)).unwrap()
}

pub fn out_sets(adj: &DirectedAdjacency) -> Vec<Vec<usize>> {
    (0..adj.len()).map(|i| adj.out(i).to_vec()).collect()
}

/// True when some node has a near-tie among its k+1 nearest distances.
pub fn knn_near_tie(cfg: &PointConfig, k: usize, tol: f64) -> bool {
    (0..cfg.len()).any(|i| {
        let r = knn_ranked(cfg, i, k + 1);
        r.windows(2).any(|w| (w[1].0 - w[0].0).abs() <= tol * w[1].0)
    })
}

/// True when some third point sits within `tol` (relative) of an edge lens boundary.
pub fn beta_near_tie(cfg: &PointConfig, beta: f64, tol: f64) -> bool {
    let n = cfg.len();
    for i in 0..n {
        for j in i + 1..n {
            let lens = condensate::geometry::Lens::new(cfg.point(i), cfg.point(j), beta);
            for z in 0..n {
                if z != i && z != j && lens.signed_distance(cfg.point(z)).abs() <= tol * lens.radius {
                    return true;
                }
            }
        }
    }
    false
}

pub fn models_for_dim(dim: usize) -> Vec<GraphModel> {
    let mut v: Vec<GraphModel> = (1..=3).map(|k| GraphModel::knn(dim, k).unwrap()).collect();
    if dim == 2 {
        for b in [1.0, 1.2, 2.0] {
            v.push(GraphModel::beta_skeleton(b).unwrap());
        }
    }
    v
}
