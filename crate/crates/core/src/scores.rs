//! Score functionals ξ^(α), the windowed functional H_n, order statistics
//! and the Palm mean μ_α.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conditions::stabilization_radii;
use crate::error::{Error, Result};
use crate::geometry::{cone_cover, dist, AxisBox, DEFAULT_CONE_HALF_ANGLE, DEFAULT_CONE_OFFSET};
use crate::graphs::{build_adjacency_owned, DirectedAdjacency, GraphModel};
use crate::point_process::{sample_poisson, PointConfig};
use crate::rng::Seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Every out-edge counts fully at its source.
    Dir,
    /// Union of arc pairs: mutual edges are split in half.
    Undir,
    /// Intersection of arc pairs: only mutual edges count, half at each end.
    Bidir,
}

impl std::str::FromStr for Variant {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "dir" => Ok(Variant::Dir),
            "undir" => Ok(Variant::Undir),
            "bidir" => Ok(Variant::Bidir),
            _ => Err(Error::Parse(format!("unknown variant {s:?} (dir, undir, bidir)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoreVariant {
    pub variant: Variant,
    pub alpha: f64,
}

impl ScoreVariant {
    pub fn new(variant: Variant, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::Domain(format!("alpha must be positive, got {alpha}")));
        }
        Ok(ScoreVariant { variant, alpha })
    }

    pub fn dir(alpha: f64) -> Self {
        ScoreVariant { variant: Variant::Dir, alpha }
    }
}

pub(crate) fn score_unchecked(adj: &DirectedAdjacency, x: usize, sv: &ScoreVariant) -> f64 {
    let cfg = adj.config();
    let p = cfg.point(x);
    adj.out(x)
        .iter()
        .map(|&y| {
            let w = dist(p, cfg.point(y)).powf(sv.alpha);
            match sv.variant {
                Variant::Dir => w,
                Variant::Undir => {
                    if adj.has_arc(y, x) {
                        0.5 * w
                    } else {
                        w
                    }
                }
                Variant::Bidir => {
                    if adj.has_arc(y, x) {
                        0.5 * w
                    } else {
                        0.0
                    }
                }
            }
        })
        .sum()
}

/// ξ^(α) of node `x` with respect to the whole adjacency.
pub fn score_node(adj: &DirectedAdjacency, x: usize, sv: &ScoreVariant) -> Result<f64> {
    if x >= adj.len() {
        return Err(Error::UnknownNode { index: x, len: adj.len() });
    }
    Ok(score_unchecked(adj, x, sv))
}

pub fn score_all(adj: &DirectedAdjacency, sv: &ScoreVariant) -> Vec<f64> {
    (0..adj.len()).map(|x| score_unchecked(adj, x, sv)).collect()
}

/// Per-node scores of the nodes inside a window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreTable {
    pub window: AxisBox,
    pub variant: ScoreVariant,
    pub nodes: Vec<usize>,
    pub positions: Vec<Vec<f64>>,
    pub scores: Vec<f64>,
}

impl ScoreTable {
    pub fn new(adj: &DirectedAdjacency, window: &AxisBox, sv: &ScoreVariant) -> Self {
        let cfg = adj.config();
        let nodes: Vec<usize> = (0..adj.len()).filter(|&i| window.contains(cfg.point(i))).collect();
        let scores = nodes.iter().map(|&i| score_unchecked(adj, i, sv)).collect();
        let positions = nodes.iter().map(|&i| cfg.point(i).to_vec()).collect();
        ScoreTable { window: window.clone(), variant: *sv, nodes, positions, scores }
    }

    /// Table from bare scores, e.g. for synthetic checks.
    pub fn from_scores(window: AxisBox, variant: ScoreVariant, scores: Vec<f64>) -> Self {
        let nodes = (0..scores.len()).collect();
        let positions = vec![Vec::new(); scores.len()];
        ScoreTable { window, variant, nodes, positions, scores }
    }

    pub fn total(&self) -> f64 {
        self.scores.iter().sum()
    }

    /// `node_index,x_1..x_d,score`.
    pub fn to_csv(&self) -> String {
        let d = self.window.dim();
        let mut s = String::from("node_index");
        for i in 1..=d {
            let _ = write!(s, ",x_{i}");
        }
        s.push_str(",score\n");
        for ((n, p), v) in self.nodes.iter().zip(&self.positions).zip(&self.scores) {
            let _ = write!(s, "{n}");
            for c in p {
                let _ = write!(s, ",{c:.16e}");
            }
            let _ = writeln!(s, ",{v:.16e}");
        }
        s
    }
}

/// H_n = n^{-d} Σ_{x ∈ window} ξ(x). Nodes outside the window only act as neighbors.
pub fn functional_hn(adj: &DirectedAdjacency, window: &AxisBox, n_norm: f64, sv: &ScoreVariant) -> f64 {
    let cfg = adj.config();
    let total: f64 =
        (0..adj.len()).filter(|&i| window.contains(cfg.point(i))).map(|i| score_unchecked(adj, i, sv)).sum();
    total / n_norm.powi(window.dim() as i32)
}

/// The `m` largest window scores, descending, zero-padded.
pub fn order_statistics(table: &ScoreTable, m: usize) -> Vec<f64> {
    top_m(&table.scores, m)
}

pub(crate) fn top_m(scores: &[f64], m: usize) -> Vec<f64> {
    let mut s = scores.to_vec();
    s.sort_unstable_by(|a, b| b.total_cmp(a));
    s.resize(m, 0.0);
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MuEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub replicas: u64,
    /// Empirical 99.9% quantile of the origin's stabilization radius.
    pub stabilization_q999: f64,
    /// Distance from the origin to the sampling box boundary.
    pub clearance: f64,
    pub margin_ok: bool,
}

/// Monte Carlo Palm mean: score of an inserted origin in a Poisson(1) sample
/// on the cube of side `calib_box_side + 2 * margin`.
pub fn estimate_mu(
    model: &GraphModel,
    sv: &ScoreVariant,
    calib_box_side: f64,
    margin: f64,
    replicas: u64,
    seed: Seed,
) -> Result<MuEstimate> {
    if replicas < 2 {
        return Err(Error::Precondition("estimate_mu needs at least 2 replicas".into()));
    }
    if !(calib_box_side > 0.0) || !(margin >= 0.0) {
        return Err(Error::Domain("calibration box side must be positive and margin nonnegative".into()));
    }
    let d = model.dim;
    let side = calib_box_side + 2.0 * margin;
    let bx = AxisBox::centered_cube(d, side);
    let cones = if d <= 2 { Some(cone_cover(d, DEFAULT_CONE_HALF_ANGLE, DEFAULT_CONE_OFFSET)?) } else { None };
    let c_sta = model.c_sta();
    let per_replica: Vec<(f64, f64)> = (0..replicas)
        .into_par_iter()
        .map(|i| -> Result<(f64, f64)> {
            let mut cfg = sample_poisson(&bx, 1.0, seed.child(i))?;
            let origin = vec![0.0; d];
            if cfg.contains_point(&origin) {
                cfg = PointConfig::new(d, cfg.coords().iter().map(|c| c + f64::EPSILON).collect())?;
            }
            let o = cfg.push(&origin)?;
            let radius = match &cones {
                Some(c) => stabilization_radii(&cfg, o, c, c_sta)?.overall,
                None => f64::NAN,
            };
            let adj = build_adjacency_owned(cfg, model)?;
            Ok((score_unchecked(&adj, o, sv), radius))
        })
        .collect::<Result<_>>()?;
    let n = replicas as f64;
    let mean = per_replica.iter().map(|v| v.0).sum::<f64>() / n;
    let var = per_replica.iter().map(|v| (v.0 - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let mut radii: Vec<f64> = per_replica.iter().map(|v| v.1).collect();
    radii.sort_unstable_by(f64::total_cmp);
    let q999 = radii[((0.999 * (n - 1.0)).round() as usize).min(radii.len() - 1)];
    let clearance = side / 2.0;
    Ok(MuEstimate {
        mean,
        std_error: (var / n).sqrt(),
        replicas,
        stabilization_q999: q999,
        clearance,
        margin_ok: q999.is_nan() || q999 <= clearance,
    })
}

/// Closed-form μ_α for the directed NNG: κ_d^{-α/d} Γ(α/d + 1).
pub fn nng_mu_closed_form(d: usize, alpha: f64) -> f64 {
    let kappa = crate::geometry::unit_ball_volume(d);
    kappa.powf(-alpha / d as f64) * statrs::function::gamma::gamma(alpha / d as f64 + 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphs::build_adjacency;

    fn line(points: &[[f64; 2]]) -> PointConfig {
        PointConfig::from_points(2, points).unwrap()
    }

    #[test]
    fn pair_scores() {
        let adj = build_adjacency(&line(&[[0.0, 0.0], [2.0, 0.0]]), &GraphModel::nng(2)).unwrap();
        let dir = ScoreVariant::dir(3.0);
        let undir = ScoreVariant::new(Variant::Undir, 3.0).unwrap();
        assert_eq!(score_node(&adj, 0, &dir).unwrap(), 8.0);
        assert_eq!(score_node(&adj, 1, &dir).unwrap(), 8.0);
        assert_eq!(score_node(&adj, 0, &undir).unwrap(), 4.0);
        assert_eq!(score_node(&adj, 1, &undir).unwrap(), 4.0);
        assert!(score_node(&adj, 2, &dir).is_err());
        let w = AxisBox::centered_cube(2, 10.0);
        assert_eq!(functional_hn(&adj, &w, 1.0, &dir), 16.0);
        let empty = AxisBox::new(vec![50.0, 50.0], vec![51.0, 51.0]).unwrap();
        assert_eq!(functional_hn(&adj, &empty, 1.0, &dir), 0.0);
    }

    #[test]
    fn unreciprocated_arc_has_no_bidir_score() {
        let adj = build_adjacency(&line(&[[0.0, 0.0], [1.0, 0.0], [3.0, 0.0]]), &GraphModel::nng(2)).unwrap();
        let bidir = ScoreVariant::new(Variant::Bidir, 2.0).unwrap();
        assert_eq!(score_node(&adj, 2, &bidir).unwrap(), 0.0);
        assert_eq!(score_node(&adj, 0, &bidir).unwrap(), 0.5);
    }

    #[test]
    fn order_statistics_examples() {
        let sv = ScoreVariant::dir(3.0);
        let t = ScoreTable::from_scores(AxisBox::centered_cube(2, 1.0), sv, vec![8.0, 1.0, 8.0]);
        assert_eq!(order_statistics(&t, 2), vec![8.0, 8.0]);
        let e = ScoreTable::from_scores(AxisBox::centered_cube(2, 1.0), sv, vec![]);
        assert_eq!(order_statistics(&e, 3), vec![0.0; 3]);
    }

    #[test]
    fn closed_form_values() {
        assert!((nng_mu_closed_form(2, 3.0) - 0.238732).abs() < 1e-6);
        assert!((nng_mu_closed_form(2, 15.0) - 2.621622).abs() < 1e-6);
    }

    #[test]
    fn score_table_csv() {
        let adj = build_adjacency(&line(&[[0.0, 0.0], [2.0, 0.0]]), &GraphModel::nng(2)).unwrap();
        let t = ScoreTable::new(&adj, &AxisBox::centered_cube(2, 1.0), &ScoreVariant::dir(1.0));
        let csv = t.to_csv();
        assert!(csv.starts_with("node_index,x_1,x_2,score\n0,"));
        assert_eq!(csv.lines().count(), 2);
    }
}
