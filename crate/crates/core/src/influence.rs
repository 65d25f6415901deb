//! Influence zones A(φ,ψ): where inserting one new point deletes an out-edge
//! of a protected node (a point of φ or an out-neighbor of one).

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    ball_cover_quadrature, disk_union_area, dist2, lex_cmp, region_volume_mc, AxisBox, BallUnion, Lens, QuadratureOptions, Region,
    VolumeEstimate, VolumeMethod,
};
use crate::graphs::{build_adjacency, build_adjacency_brute, knn_ranked, pair_lens, DirectedAdjacency, GraphModel, ModelKind};
use crate::point_process::PointConfig;
use crate::rng::Seed;
use crate::scores::{score_unchecked, ScoreVariant};

/// φ given as node indices into ψ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigPair {
    pub phi: Vec<usize>,
    pub psi: PointConfig,
    pub model: GraphModel,
    pub variant: ScoreVariant,
}

impl ConfigPair {
    /// Validates φ ⊆ ψ, #ψ ≥ c_INF and dimensions. Degeneracy is checked
    /// separately (see `optimizer::admissible`).
    pub fn new(phi: Vec<usize>, psi: PointConfig, model: GraphModel, variant: ScoreVariant) -> Result<Self> {
        if psi.dim() != model.dim {
            return Err(Error::DimensionMismatch { expected: model.dim, got: psi.dim() });
        }
        if psi.len() < model.c_inf() {
            return Err(Error::Precondition(format!("#psi = {} below c_INF = {}", psi.len(), model.c_inf())));
        }
        let mut phi = phi;
        phi.sort_unstable();
        phi.dedup();
        if phi.is_empty() {
            return Err(Error::Domain("phi must be nonempty".into()));
        }
        if let Some(&bad) = phi.iter().find(|&&i| i >= psi.len()) {
            return Err(Error::UnknownNode { index: bad, len: psi.len() });
        }
        Ok(ConfigPair { phi, psi, model, variant })
    }

    pub fn adjacency(&self) -> DirectedAdjacency {
        build_adjacency(&self.psi, &self.model).expect("dimension checked")
    }

    /// Σ_{x∈φ} ξ(ψ − x).
    pub fn score_sum(&self) -> f64 {
        let adj = self.adjacency();
        self.phi.iter().map(|&x| score_unchecked(&adj, x, &self.variant)).sum()
    }

    pub fn scaled(&self, tau: f64) -> ConfigPair {
        ConfigPair { psi: self.psi.scaled(tau), ..self.clone() }
    }

    pub fn translated(&self, shift: &[f64]) -> ConfigPair {
        ConfigPair { psi: self.psi.translated(shift), ..self.clone() }
    }

    pub fn rotated2(&self, theta: f64) -> ConfigPair {
        ConfigPair { psi: self.psi.rotated2(theta), ..self.clone() }
    }
}

/// φ ∪ out-neighbors of φ, sorted.
pub fn protected_nodes(adj: &DirectedAdjacency, phi: &[usize]) -> Vec<usize> {
    let mut p: Vec<usize> = phi.to_vec();
    for &x in phi {
        p.extend_from_slice(adj.out(x));
    }
    p.sort_unstable();
    p.dedup();
    p
}

enum Shape {
    /// Per protected node: its position, k-th neighbor squared distance and
    /// the k-th neighbor's coordinates (for the lexicographic tie rule).
    Knn(Vec<(Vec<f64>, f64, Vec<f64>)>),
    /// Lenses of all edges incident to protected nodes.
    Lenses(Vec<Lens>),
}

/// Precomputed membership structure for one pair.
pub struct InfluenceZone {
    dim: usize,
    psi: PointConfig,
    protected: Vec<usize>,
    shape: Shape,
    balls: Vec<(Vec<f64>, f64)>,
    bounding: AxisBox,
}

impl InfluenceZone {
    pub fn new(pair: &ConfigPair) -> Self {
        let adj = pair.adjacency();
        let protected = protected_nodes(&adj, &pair.phi);
        let cfg = &pair.psi;
        let shape = match pair.model.kind {
            ModelKind::Knn { k } => Shape::Knn(
                protected
                    .iter()
                    .map(|&x| {
                        let ranked = knn_ranked(cfg, x, k);
                        let (d2, j) = ranked[k - 1];
                        (cfg.point(x).to_vec(), d2, cfg.point(j).to_vec())
                    })
                    .collect(),
            ),
            ModelKind::BetaSkeleton { beta } => {
                let mut edges: Vec<(usize, usize)> = Vec::new();
                for &x in &protected {
                    for &z in adj.out(x) {
                        edges.push((x.min(z), x.max(z)));
                    }
                }
                edges.sort_unstable();
                edges.dedup();
                Shape::Lenses(edges.into_iter().map(|(a, b)| pair_lens(cfg, a, b, beta)).collect())
            }
        };
        let raw = match &shape {
            Shape::Knn(v) => AxisBox::around_balls(pair.model.dim, v.iter().map(|(c, d2, _)| (&c[..], d2.sqrt()))),
            Shape::Lenses(v) => v.iter().map(|l| l.bounding_box()).reduce(|a, b| a.union(&b)),
        };
        let bounding = raw.unwrap_or_else(|| AxisBox::centered_cube(pair.model.dim, 0.0)).inflated(0.01, 0.0);
        let balls = match &shape {
            Shape::Knn(v) => v.iter().map(|(c, d2, _)| (c.clone(), d2.sqrt())).collect(),
            Shape::Lenses(v) => v.iter().flat_map(|l| l.centers.iter().map(move |c| (c.to_vec(), l.radius))).collect(),
        };
        InfluenceZone { dim: pair.model.dim, psi: cfg.clone(), protected, shape, balls, bounding }
    }

    pub fn protected(&self) -> &[usize] {
        &self.protected
    }

    pub fn bounding(&self) -> &AxisBox {
        &self.bounding
    }

    /// Membership by local re-query; `y` must not be a point of ψ.
    pub fn contains_point(&self, y: &[f64]) -> bool {
        match &self.shape {
            Shape::Knn(v) => v.iter().any(|(c, dk2, q)| {
                let d2 = dist2(c, y);
                d2 < *dk2 || (d2 == *dk2 && lex_cmp(y, q) == Ordering::Less)
            }),
            Shape::Lenses(v) => v.iter().any(|l| l.contains_open(y)),
        }
    }

    /// Exact planar area (the zone is a union of disks up to a null set).
    pub fn exact_area(&self) -> Option<f64> {
        (self.dim == 2).then(|| disk_union_area(&planar_disks(&self.balls)))
    }

    /// Balls whose union agrees with the zone up to a null set.
    pub fn balls(&self) -> &[(Vec<f64>, f64)] {
        &self.balls
    }
}

impl Region for InfluenceZone {
    fn dim(&self) -> usize {
        self.dim
    }
    fn bounding_box(&self) -> AxisBox {
        self.bounding.clone()
    }
    fn contains(&self, y: &[f64]) -> bool {
        !self.psi.contains_point(y) && self.contains_point(y)
    }
    fn signed_distance(&self, y: &[f64]) -> Option<f64> {
        Some(self.balls.iter().map(|(c, r)| dist2(c, y).sqrt() - r).fold(f64::INFINITY, f64::min))
    }
}

pub fn in_influence_zone(pair: &ConfigPair, y: &[f64]) -> Result<bool> {
    if y.len() != pair.psi.dim() {
        return Err(Error::DimensionMismatch { expected: pair.psi.dim(), got: y.len() });
    }
    if pair.psi.contains_point(y) {
        return Err(Error::DuplicatePoint(y.to_vec()));
    }
    Ok(InfluenceZone::new(pair).contains_point(y))
}

/// Reference membership: rebuild ψ ∪ {y} from scratch and compare the out
/// sets of protected nodes as index sets.
pub fn in_influence_zone_recompute(pair: &ConfigPair, y: &[f64]) -> Result<bool> {
    let before = build_adjacency_brute(&pair.psi, &pair.model)?;
    let after = build_adjacency_brute(&pair.psi.with_point(y)?, &pair.model)?;
    let protected = protected_nodes(&before, &pair.phi);
    Ok(protected.iter().any(|&x| before.out(x).iter().any(|z| !after.has_arc(x, *z))))
}

pub fn influence_bounding(pair: &ConfigPair) -> AxisBox {
    InfluenceZone::new(pair).bounding
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum InfluenceMethod {
    /// Exact in d = 1, quadrature (rel. tol. 1e-4) in d = 2, Monte Carlo otherwise.
    Auto,
    Mc { samples: u64, seed: Seed },
    Quadrature { rel_tol: f64 },
    /// Reduced objective |∪_{x∈φ} B_{D_1(ψ−x)}(x)|.
    NngBalls,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InfluenceEstimate {
    pub volume: VolumeEstimate,
    pub bounding: AxisBox,
    pub protected_nodes: Vec<usize>,
}

const AUTO_REL_TOL: f64 = 1e-4;
const AUTO_MC_SAMPLES: u64 = 1 << 20;

pub fn influence_volume(pair: &ConfigPair, method: InfluenceMethod) -> Result<InfluenceEstimate> {
    let zone = InfluenceZone::new(pair);
    let volume = match method {
        InfluenceMethod::NngBalls => {
            if !pair.model.is_nng() {
                return Err(Error::Unsupported(format!("nng_balls objective for {}", pair.model.label())));
            }
            let adj = pair.adjacency();
            let balls: Vec<(Vec<f64>, f64)> = pair
                .phi
                .iter()
                .map(|&x| (pair.psi.point(x).to_vec(), dist2(pair.psi.point(x), pair.psi.point(adj.out(x)[0])).sqrt()))
                .collect();
            ball_union_volume(pair.model.dim, balls)?
        }
        InfluenceMethod::Quadrature { rel_tol } => zone_quadrature(&zone, rel_tol)?,
        InfluenceMethod::Mc { samples, seed } => region_volume_mc(&zone, samples, seed)?,
        InfluenceMethod::Auto => match (pair.model.dim, &pair.model.kind) {
            (1, ModelKind::Knn { .. }) => interval_union_length(zone.balls()),
            (2, _) => zone_quadrature(&zone, AUTO_REL_TOL)?,
            _ => region_volume_mc(&zone, AUTO_MC_SAMPLES, Seed::new(0))?,
        },
    };
    Ok(InfluenceEstimate { volume, bounding: zone.bounding.clone(), protected_nodes: zone.protected.clone() })
}

/// Volume of a union of balls: closed form for one ball, exact in d = 1,
/// quadrature in d = 2, Monte Carlo with a fixed stream otherwise.
pub fn ball_union_volume(dim: usize, balls: Vec<(Vec<f64>, f64)>) -> Result<VolumeEstimate> {
    if balls.len() == 1 {
        return Ok(VolumeEstimate::closed_form(crate::geometry::ball_volume(dim, balls[0].1)?));
    }
    match dim {
        1 => Ok(interval_union_length(&balls)),
        2 => ball_union_quadrature(balls, AUTO_REL_TOL),
        _ => region_volume_mc(&BallUnion::new(dim, balls), AUTO_MC_SAMPLES, Seed::new(0)),
    }
}

pub fn planar_disks(balls: &[(Vec<f64>, f64)]) -> Vec<([f64; 2], f64)> {
    balls.iter().map(|(c, r)| ([c[0], c[1]], *r)).collect()
}

/// Planar zone area, integrated cluster by cluster.
pub fn zone_quadrature(zone: &InfluenceZone, rel_tol: f64) -> Result<VolumeEstimate> {
    ball_cover_quadrature(zone, zone.balls(), QuadratureOptions { rel_tol, ..Default::default() })
}

pub fn ball_union_quadrature(balls: Vec<(Vec<f64>, f64)>, rel_tol: f64) -> Result<VolumeEstimate> {
    let union = BallUnion::new(2, balls);
    ball_cover_quadrature(&union, &union.balls, QuadratureOptions { rel_tol, ..Default::default() })
}

fn interval_union_length(balls: &[(Vec<f64>, f64)]) -> VolumeEstimate {
    let mut iv: Vec<(f64, f64)> = balls.iter().map(|(c, r)| (c[0] - r, c[0] + r)).collect();
    iv.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut total = 0.0;
    let mut cur: Option<(f64, f64)> = None;
    for (a, b) in iv {
        cur = match cur {
            Some((s, e)) if a <= e => Some((s, e.max(b))),
            Some((s, e)) => {
                total += e - s;
                Some((a, b))
            }
            None => Some((a, b)),
        };
    }
    if let Some((s, e)) = cur {
        total += e - s;
    }
    VolumeEstimate { value: total, std_error: 0.0, method: VolumeMethod::ClosedForm, samples_or_depth: 0, bracket: None }
}

/// y ∈ K(φ,ψ): some protected node's open nearest-neighbor ball contains y.
pub fn nng_k_set_contains(pair: &ConfigPair, y: &[f64]) -> bool {
    let adj = pair.adjacency();
    protected_nodes(&adj, &pair.phi).iter().any(|&x| {
        let p = pair.psi.point(x);
        dist2(p, y) < dist2(p, pair.psi.point(adj.out(x)[0]))
    })
}
