//! Executable checkers for the structural conditions on the out-neighbor map:
//! scale invariance, bounded insertion effect (FIN), bounded long-edge
//! density (FIN2), cone stabilization (STA), continuity (CON) and insertion
//! monotonicity (INF).
//!
//! Every checker rebuilds adjacencies with the brute-force oracle, so its
//! verdict does not depend on the indexed construction.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dist, dist2, unit_ball_volume, AxisBox, Cone};
use crate::graphs::{build_adjacency_brute, out_set_brute, DirectedAdjacency, GraphModel, ModelKind};
use crate::point_process::{sample_poisson, PointConfig};
use crate::rng::Seed;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StabilizationRadii {
    pub per_cone: Vec<f64>,
    pub overall: f64,
    pub c_sta: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ConditionKind {
    Fin,
    Fin2,
    Sta,
    Con,
    Inf,
    Scale,
}

impl std::str::FromStr for ConditionKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fin" => Ok(ConditionKind::Fin),
            "fin2" => Ok(ConditionKind::Fin2),
            "sta" => Ok(ConditionKind::Sta),
            "con" => Ok(ConditionKind::Con),
            "inf" => Ok(ConditionKind::Inf),
            "scale" => Ok(ConditionKind::Scale),
            _ => Err(Error::Parse(format!("unknown condition {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub condition: ConditionKind,
    pub trials: u64,
    pub worst_observed: f64,
    pub bound_claimed: f64,
    pub violations: u64,
    pub params: BTreeMap<String, serde_json::Value>,
}

impl ConditionReport {
    fn new(condition: ConditionKind, bound_claimed: f64) -> Self {
        ConditionReport { condition, trials: 0, worst_observed: 0.0, bound_claimed, violations: 0, params: BTreeMap::new() }
    }

    /// Records one trial; a trial violates when its observation exceeds the bound.
    fn observe(&mut self, value: f64) {
        self.trials += 1;
        if value > self.worst_observed {
            self.worst_observed = value;
        }
        if value > self.bound_claimed {
            self.violations += 1;
        }
    }

    fn param(&mut self, key: &str, v: impl Into<serde_json::Value>) {
        self.params.insert(key.to_string(), v.into());
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Number of existing nodes whose out set changes when `y` is inserted.
pub fn affected_nodes_on_insert(config: &PointConfig, model: &GraphModel, y: &[f64]) -> Result<usize> {
    let extended = config.with_point(y)?;
    let before = build_adjacency_brute(config, model)?;
    let after = build_adjacency_brute(&extended, model)?;
    Ok((0..config.len()).filter(|&x| before.out(x) != after.out(x)).count())
}

/// #{x ∈ φ ∩ B_M(0) : some out-edge of x is longer than M}.
pub fn long_edge_count(config: &PointConfig, model: &GraphModel, m: f64) -> Result<usize> {
    if !(m > 0.0) {
        return Err(Error::Domain(format!("M must be positive, got {m}")));
    }
    let adj = build_adjacency_brute(config, model)?;
    Ok(long_edge_count_in(&adj, m))
}

fn long_edge_count_in(adj: &DirectedAdjacency, m: f64) -> usize {
    let cfg = adj.config();
    let origin = vec![0.0; cfg.dim()];
    (0..adj.len())
        .filter(|&x| {
            let p = cfg.point(x);
            dist2(p, &origin) <= m * m && adj.out(x).iter().any(|&y| dist(p, cfg.point(y)) > m)
        })
        .count()
}

/// Cone radii around node `x`: cone i reaches `c_sta` configuration points
/// (the apex counts as one of them) at radius ρ_i, giving `c_sta * ρ_i`.
pub fn stabilization_radii(config: &PointConfig, x: usize, cones: &[Cone], c_sta: usize) -> Result<StabilizationRadii> {
    if c_sta == 0 {
        return Err(Error::Domain("c_sta must be >= 1".into()));
    }
    if x >= config.len() {
        return Err(Error::UnknownNode { index: x, len: config.len() });
    }
    let apex = config.point(x);
    let needed_others = c_sta - 1;
    let mut per_cone = Vec::with_capacity(cones.len());
    for cone in cones {
        let shifted = cone.translated(apex);
        let mut d: Vec<f64> =
            (0..config.len()).filter(|&j| j != x && shifted.contains(config.point(j))).map(|j| dist(apex, config.point(j))).collect();
        let rho = if needed_others == 0 {
            0.0
        } else if d.len() < needed_others {
            f64::INFINITY
        } else {
            d.select_nth_unstable_by(needed_others - 1, f64::total_cmp);
            d[needed_others - 1]
        };
        per_cone.push(c_sta as f64 * rho);
    }
    let overall = per_cone.iter().cloned().fold(0.0, f64::max);
    Ok(StabilizationRadii { per_cone, overall, c_sta })
}

/// In- and out-neighbors of `x` as coordinate tuples, sorted.
fn e0_points(config: &PointConfig, model: &GraphModel, x: usize) -> Vec<Vec<f64>> {
    let mut s: Vec<usize> = out_set_brute(config, model, x);
    s.extend((0..config.len()).filter(|&y| y != x && out_set_brute(config, model, y).contains(&x)));
    s.sort_unstable();
    s.dedup();
    let mut pts: Vec<Vec<f64>> = s.into_iter().map(|i| config.point(i).to_vec()).collect();
    pts.sort_by(|a, b| crate::geometry::lex_cmp(a, b));
    pts
}

/// Checks E_0(x) = E_0((config ∩ B_R(x)) ∪ A) for the given far additions
/// (points of `additions` inside the closed ball are skipped).
pub fn stabilization_holds(
    config: &PointConfig,
    model: &GraphModel,
    x: usize,
    radius: f64,
    additions: &[Vec<f64>],
) -> Result<bool> {
    if !radius.is_finite() {
        return Ok(true);
    }
    let apex = config.point(x).to_vec();
    let mut kept: Vec<usize> = (0..config.len()).filter(|&j| dist(&apex, config.point(j)) <= radius).collect();
    kept.sort_unstable();
    let mut reduced = config.select(&kept);
    let new_x = kept.iter().position(|&j| j == x).expect("apex kept");
    for a in additions {
        if dist(&apex, a) > radius && !reduced.contains_point(a) {
            reduced.push(a)?;
        }
    }
    Ok(e0_points(config, model, x) == e0_points(&reduced, model, new_x))
}

/// Jitters every node by an independent vector in B_δ(0) and reports how
/// often the arc relation changes.
pub fn continuity_probe(config: &PointConfig, model: &GraphModel, delta: f64, trials: u64, seed: Seed) -> Result<ConditionReport> {
    if !(delta >= 0.0) {
        return Err(Error::Domain(format!("delta must be nonnegative, got {delta}")));
    }
    let base = build_adjacency_brute(config, model)?;
    let flips = |delta: f64, seed: Seed| -> Result<Vec<usize>> {
        (0..trials)
            .map(|t| {
                if delta == 0.0 {
                    return Ok(0);
                }
                let jittered = jitter(config, delta, seed.child(t))?;
                let adj = build_adjacency_brute(&jittered, model)?;
                Ok((0..config.len()).map(|i| sym_diff(base.out(i), adj.out(i))).sum())
            })
            .collect()
    };
    let mut report = ConditionReport::new(ConditionKind::Con, 0.0);
    for f in flips(delta, seed)? {
        report.observe(f as f64);
    }
    // largest stable scale on a decade ladder below delta
    let mut largest_stable = 0.0;
    let mut scale = delta;
    for level in 0..8u64 {
        if scale == 0.0 {
            break;
        }
        if flips(scale, seed.fork(level + 1))?.iter().all(|&f| f == 0) {
            largest_stable = scale;
            break;
        }
        scale /= 10.0;
    }
    report.param("delta", delta);
    report.param("largest_stable_delta", largest_stable);
    report.param("nodes", config.len() as u64);
    Ok(report)
}

/// True when `trials` independent jitters of size `delta` leave every out set unchanged.
pub fn jitter_stable(config: &PointConfig, model: &GraphModel, delta: f64, trials: u64, seed: Seed) -> Result<bool> {
    let base = build_adjacency_brute(config, model)?;
    for t in 0..trials {
        let adj = build_adjacency_brute(&jitter(config, delta, seed.child(t))?, model)?;
        if (0..config.len()).any(|i| base.out(i) != adj.out(i)) {
            return Ok(false);
        }
    }
    Ok(true)
}

fn sym_diff(a: &[usize], b: &[usize]) -> usize {
    a.iter().filter(|v| !b.contains(v)).count() + b.iter().filter(|v| !a.contains(v)).count()
}

/// Moves each point by a uniform draw from the ball of radius `delta`.
pub fn jitter(config: &PointConfig, delta: f64, seed: Seed) -> Result<PointConfig> {
    let d = config.dim();
    let mut rng = seed.rng();
    let mut coords = Vec::with_capacity(config.coords().len());
    for p in config.points() {
        let dir: Vec<f64> = (0..d).map(|_| StandardNormal.sample(&mut rng)).collect();
        let n = dir.iter().map(|v: &f64| v * v).sum::<f64>().sqrt().max(1e-300);
        let r = delta * rng.random::<f64>().powf(1.0 / d as f64);
        coords.extend(p.iter().zip(&dir).map(|(c, u)| c + r * u / n));
    }
    PointConfig::new(d, coords)
}

/// Both sides of the insertion-monotonicity equivalence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct InfSides {
    /// 𝓔(ψ) ⊆ 𝓔(ψ ∪ θ) at every base node.
    pub whole_set_keeps_edges: bool,
    /// 𝓔(ψ) ⊆ 𝓔(ψ ∪ {y}) at every base node, for every y ∈ θ.
    pub each_point_keeps_edges: bool,
}

impl InfSides {
    pub fn holds(&self) -> bool {
        self.whole_set_keeps_edges == self.each_point_keeps_edges
    }
}

fn keeps_edges(before: &DirectedAdjacency, after: &DirectedAdjacency) -> bool {
    (0..before.len()).all(|x| before.out(x).iter().all(|y| after.has_arc(x, *y)))
}

pub fn inf_condition_sides(psi: &PointConfig, theta: &PointConfig, model: &GraphModel) -> Result<InfSides> {
    if psi.len() < model.c_inf() {
        return Err(Error::Precondition(format!("#psi = {} below c_INF = {}", psi.len(), model.c_inf())));
    }
    let base = build_adjacency_brute(psi, model)?;
    let mut all = psi.clone();
    for y in theta.points() {
        all.push(y)?;
    }
    let whole = keeps_edges(&base, &build_adjacency_brute(&all, model)?);
    let mut each = true;
    for y in theta.points() {
        if !keeps_edges(&base, &build_adjacency_brute(&psi.with_point(y)?, model)?) {
            each = false;
            break;
        }
    }
    Ok(InfSides { whole_set_keeps_edges: whole, each_point_keeps_edges: each })
}

pub fn inf_condition_probe(psi: &PointConfig, theta: &PointConfig, model: &GraphModel) -> Result<bool> {
    Ok(inf_condition_sides(psi, theta, model)?.holds())
}

// ---------------------------------------------------------------------------
// Constants

/// Number of cones in the default planar cover (half-angle π/8).
pub const PLANAR_CONES: usize = 8;

fn cone_count(d: usize) -> Option<usize> {
    match d {
        1 => Some(2),
        2 => Some(PLANAR_CONES),
        _ => None,
    }
}

/// kNN long-edge constant k 4^d.
pub fn knn_c_fin2(k: usize, d: usize) -> f64 {
    k as f64 * 4f64.powi(d as i32)
}

/// β-skeleton angle γ = arcsin(1/β) and τ = arccos(1/β).
pub fn beta_angles(beta: f64) -> (f64, f64) {
    ((1.0 / beta).asin(), (1.0 / beta).acos())
}

/// Whether the default π/8 planar cones are thin enough for the
/// β-skeleton stabilization argument: half-angle below arccos(1/β).
pub fn default_cones_valid_for_beta(beta: f64) -> bool {
    beta > 1.0 && crate::geometry::DEFAULT_CONE_HALF_ANGLE < beta_angles(beta).1
}

fn dist_point_segment(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (vx, vy) = (b[0] - a[0], b[1] - a[1]);
    let t = (((p[0] - a[0]) * vx + (p[1] - a[1]) * vy) / (vx * vx + vy * vy)).clamp(0.0, 1.0);
    dist(&p, &[a[0] + t * vx, a[1] + t * vy])
}

/// Rhombus e1, M+, e2, M- around an edge from (0,0) to (len,0).
fn rhombus(len: f64, beta: f64) -> [[f64; 2]; 4] {
    let h = (len / 2.0) * (beta * beta - 1.0).sqrt();
    [[0.0, 0.0], [len / 2.0, h], [len, 0.0], [len / 2.0, -h]]
}

/// Numerically certified disjointness constant: the largest c such that every
/// disk of radius c·a centered on an edge of length ≥ a, at least a/2 from
/// both ends, stays 2c·a away from the edge's rhombus boundary. Minimizes
/// over edge lengths in [a, 20a] and center positions, then shaves 0.1%.
pub fn certify_c_disj(beta: f64) -> f64 {
    let a = 1.0;
    let mut worst = f64::INFINITY;
    for li in 0..=200 {
        let len = a * (1.0 + 19.0 * li as f64 / 200.0);
        let r = rhombus(len, beta);
        let steps = 400;
        for mi in 0..=steps {
            let m = a / 2.0 + (len - a) * mi as f64 / steps as f64;
            let p = [m, 0.0];
            let dmin = (0..4).map(|s| dist_point_segment(p, r[s], r[(s + 1) % 4])).fold(f64::INFINITY, f64::min);
            worst = worst.min(dmin);
        }
    }
    0.999 * worst / (2.0 * a)
}

/// c_edges(β) = 1 + 2|B_{2 tan τ + β/2}(0)| / (π c_disj² tan² τ).
pub fn beta_c_edges(beta: f64, c_disj: f64) -> f64 {
    let t = beta_angles(beta).1.tan();
    let r = 2.0 * t + beta / 2.0;
    1.0 + 2.0 * PI * r * r / (PI * c_disj * c_disj * t * t)
}

/// Bound on nodes affected by one insertion in the β-skeleton: c_edges 2π/γ.
pub fn beta_fin_bound(beta: f64, c_disj: f64) -> f64 {
    beta_c_edges(beta, c_disj) * 2.0 * PI / beta_angles(beta).0
}

/// c_max = max{c_DEG, c_FIN, c_FIN2, c_STA, c_INF} for the models in scope.
pub fn c_max(model: &GraphModel) -> Result<f64> {
    let cones = cone_count(model.dim).ok_or(Error::UnsupportedDimension { dim: model.dim, what: "c_max" })? as f64;
    let c_sta = model.c_sta() as f64;
    let c_deg = cones * c_sta;
    Ok(match model.kind {
        ModelKind::Knn { k } => c_deg.max(knn_c_fin2(k, model.dim)).max(c_sta).max(model.c_inf() as f64),
        ModelKind::BetaSkeleton { beta } => {
            if beta <= 1.0 {
                return Err(Error::Unsupported("c_max requires β > 1".into()));
            }
            let c = certify_c_disj(beta);
            let c_fin2 = 4.0 / (c * c);
            c_deg.max(beta_fin_bound(beta, c) + c_deg).max(c_fin2)
        }
    })
}

/// Positivity floor κ_d / (2^d (c_max + 1)²).
pub fn positivity_floor(model: &GraphModel) -> Result<f64> {
    let c = c_max(model)?;
    Ok(unit_ball_volume(model.dim) / (2f64.powi(model.dim as i32) * (c + 1.0) * (c + 1.0)))
}

// ---------------------------------------------------------------------------
// Planar β-skeleton geometric checks

/// Both disk centers M(e) of an edge.
pub fn lens_centers(e1: [f64; 2], e2: [f64; 2], beta: f64) -> [[f64; 2]; 2] {
    crate::geometry::Lens::new(&e1, &e2, beta).centers
}

fn orient(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn segments_intersect(p1: [f64; 2], p2: [f64; 2], q1: [f64; 2], q2: [f64; 2]) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

fn point_in_triangle(p: [f64; 2], t: &[[f64; 2]; 3]) -> bool {
    let s1 = orient(t[0], t[1], p);
    let s2 = orient(t[1], t[2], p);
    let s3 = orient(t[2], t[0], p);
    (s1 > 0.0 && s2 > 0.0 && s3 > 0.0) || (s1 < 0.0 && s2 < 0.0 && s3 < 0.0)
}

/// Whether the open segment [f1, f2] meets the interior of the triangle.
pub fn segment_meets_triangle(f1: [f64; 2], f2: [f64; 2], t: &[[f64; 2]; 3]) -> bool {
    point_in_triangle(f1, t)
        || point_in_triangle(f2, t)
        || (0..3).any(|i| segments_intersect(f1, f2, t[i], t[(i + 1) % 3]))
}

/// For an edge `e` of length `e_len` and its lens disk centered at M(e),
/// constructs the edge `f` whose endpoints lie on that disk's circle and
/// whose segments [M(f), f_i] are tangent to it. Returns |f|.
///
/// The symmetric configuration is parameterized by the half-opening φ of f
/// seen from M(e); tangency (f_1 - M(e)) · (M(f) - f_1) = 0 is solved by
/// bisection.
pub fn tangent_edge_length(beta: f64, e_len: f64) -> f64 {
    let radius = beta * e_len / 2.0;
    let m_e = [0.0, 0.0];
    let residual = |phi: f64| -> f64 {
        let f1 = [m_e[0] - radius * phi.sin(), m_e[1] - radius * phi.cos()];
        let f_len = 2.0 * radius * phi.sin();
        let mid_y = m_e[1] - radius * phi.cos();
        let h = (f_len / 2.0) * (beta * beta - 1.0).sqrt();
        let m_f = [0.0, mid_y - h];
        let r = [f1[0] - m_e[0], f1[1] - m_e[1]];
        let t = [m_f[0] - f1[0], m_f[1] - f1[1]];
        (r[0] * t[0] + r[1] * t[1]) / (radius * radius)
    };
    let (mut lo, mut hi) = (1e-9, PI / 2.0 - 1e-9);
    let (flo, _fhi) = (residual(lo), residual(hi));
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (residual(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    2.0 * radius * (0.5 * (lo + hi)).sin()
}

/// Random planar β-skeleton trials: returns (checked, violations) for the
/// statement that an edge f never meets the triangle spanned by an edge e
/// and either of its disk centers, over 4-point configs where both are edges.
pub fn check_disjoint_triangles(beta: f64, wanted: usize, seed: Seed) -> Result<(usize, usize)> {
    let model = GraphModel::beta_skeleton(beta)?;
    let mut rng = seed.rng();
    let (mut checked, mut violations, mut attempts) = (0, 0, 0u64);
    while checked < wanted {
        attempts += 1;
        if attempts > 10_000_000 {
            return Err(Error::Infeasible("could not generate enough admissible 4-point configs".into()));
        }
        let mut pts = [[0.0f64; 2]; 4];
        for p in pts.iter_mut() {
            *p = [rng.random::<f64>() * 4.0, rng.random::<f64>() * 4.0];
        }
        let cfg = PointConfig::from_points(2, &pts)?;
        let adj = build_adjacency_brute(&cfg, &model)?;
        if !(adj.has_arc(0, 1) && adj.has_arc(2, 3)) {
            continue;
        }
        checked += 1;
        let mut bad = false;
        for (e, f) in [((0, 1), (2, 3)), ((2, 3), (0, 1))] {
            for m in lens_centers(pts[e.0], pts[e.1], beta) {
                if segment_meets_triangle(pts[f.0], pts[f.1], &[pts[e.0], pts[e.1], m]) {
                    bad = true;
                }
            }
        }
        violations += bad as usize;
    }
    Ok((checked, violations))
}

// ---------------------------------------------------------------------------
// Randomized trial drivers

fn poisson_around_origin(d: usize, side: f64, intensity: f64, seed: Seed) -> Result<PointConfig> {
    sample_poisson(&AxisBox::centered_cube(d, side), intensity, seed)
}

/// FIN2 trials: Poisson configurations at several densities, `M` over `ms`.
pub fn check_fin2(model: &GraphModel, ms: &[f64], trials: u64, seed: Seed) -> Result<ConditionReport> {
    let bound = match model.kind {
        ModelKind::Knn { k } => knn_c_fin2(k, model.dim),
        ModelKind::BetaSkeleton { beta } => 4.0 / certify_c_disj(beta).powi(2),
    };
    let mut report = ConditionReport::new(ConditionKind::Fin2, bound);
    let densities = [1.0, 0.25, 0.05];
    for t in 0..trials {
        let m = ms[t as usize % ms.len()];
        let lambda = densities[(t as usize / ms.len()) % densities.len()];
        let cfg = poisson_around_origin(model.dim, 4.0 * m + 2.0, lambda, seed.child(t))?;
        if cfg.is_empty() {
            report.observe(0.0);
            continue;
        }
        report.observe(long_edge_count(&cfg, model, m)? as f64);
    }
    report.param("model", model.label());
    report.param("M", serde_json::json!(ms));
    Ok(report)
}

/// FIN trials: insert a uniform point near the center of a Poisson sample.
pub fn check_fin(model: &GraphModel, side: f64, trials: u64, seed: Seed) -> Result<ConditionReport> {
    let bound = match model.kind {
        ModelKind::Knn { .. } => cone_count(model.dim).map(|c| (c * model.c_sta()) as f64).unwrap_or(f64::INFINITY),
        ModelKind::BetaSkeleton { beta } => beta_fin_bound(beta, certify_c_disj(beta)),
    };
    let mut report = ConditionReport::new(ConditionKind::Fin, bound);
    for t in 0..trials {
        let s = seed.child(t);
        let cfg = poisson_around_origin(model.dim, side, 1.0, s)?;
        let mut rng = s.fork(1).rng();
        let y: Vec<f64> = (0..model.dim).map(|_| (rng.random::<f64>() - 0.5) * side / 2.0).collect();
        if cfg.contains_point(&y) {
            continue;
        }
        report.observe(affected_nodes_on_insert(&cfg, model, &y)? as f64);
    }
    report.param("model", model.label());
    report.param("side", side);
    Ok(report)
}

/// STA trials: radius at the node nearest the center, then deletion beyond
/// the radius plus `additions` random far points.
pub fn check_sta(model: &GraphModel, cones: &[Cone], side: f64, trials: u64, additions: usize, seed: Seed) -> Result<ConditionReport> {
    let mut report = ConditionReport::new(ConditionKind::Sta, 0.0);
    let mut worst_radius: f64 = 0.0;
    for t in 0..trials {
        let s = seed.child(t);
        let cfg = poisson_around_origin(model.dim, side, 1.0, s)?;
        if cfg.len() < 2 {
            continue;
        }
        let origin = vec![0.0; model.dim];
        let x = (0..cfg.len()).min_by(|&a, &b| dist2(cfg.point(a), &origin).total_cmp(&dist2(cfg.point(b), &origin))).unwrap();
        let radii = stabilization_radii(&cfg, x, cones, model.c_sta())?;
        if !radii.overall.is_finite() {
            report.observe(0.0);
            continue;
        }
        worst_radius = worst_radius.max(radii.overall);
        let mut rng = s.fork(2).rng();
        let apex = cfg.point(x).to_vec();
        let adds: Vec<Vec<f64>> = (0..additions)
            .map(|_| {
                let dir: Vec<f64> = (0..model.dim).map(|_| StandardNormal.sample(&mut rng)).collect();
                let n = dir.iter().map(|v: &f64| v * v).sum::<f64>().sqrt();
                let r = radii.overall * (1.0 + 1e-9 + rng.random::<f64>());
                apex.iter().zip(&dir).map(|(a, u)| a + r * u / n).collect()
            })
            .collect();
        let ok = stabilization_holds(&cfg, model, x, radii.overall, &adds)?;
        report.observe(if ok { 0.0 } else { 1.0 });
    }
    report.param("model", model.label());
    report.param("max_radius", worst_radius);
    report.param("additions", additions as u64);
    Ok(report)
}

/// INF trials: random ψ, θ pairs; a violation is a broken equivalence.
pub fn check_inf(model: &GraphModel, trials: u64, seed: Seed) -> Result<ConditionReport> {
    let mut report = ConditionReport::new(ConditionKind::Inf, 0.0);
    let bx = AxisBox::centered_cube(model.dim, 3.0);
    for t in 0..trials {
        let s = seed.child(t);
        let mut rng = s.rng();
        let m = model.c_inf() + rng.random_range(0..5);
        let psi = crate::point_process::sample_binomial(&bx, m, s.fork(1))?;
        let q = 1 + rng.random_range(0..3);
        let theta = crate::point_process::sample_binomial(&bx.inflated(1.0, 0.0), q, s.fork(2))?;
        if theta.points().any(|y| psi.contains_point(y)) {
            continue;
        }
        let ok = inf_condition_probe(&psi, &theta, model)?;
        report.observe(if ok { 0.0 } else { 1.0 });
    }
    report.param("model", model.label());
    Ok(report)
}

/// Scale-invariance trials: arcs of τ·φ versus arcs of φ.
pub fn check_scale(model: &GraphModel, taus: &[f64], trials: u64, seed: Seed) -> Result<ConditionReport> {
    let mut report = ConditionReport::new(ConditionKind::Scale, 0.0);
    for t in 0..trials {
        let cfg = poisson_around_origin(model.dim, 6.0, 1.0, seed.child(t))?;
        let base = build_adjacency_brute(&cfg, model)?;
        for &tau in taus {
            let scaled = build_adjacency_brute(&cfg.scaled(tau), model)?;
            let diff: usize = (0..cfg.len()).map(|i| sym_diff(base.out(i), scaled.out(i))).sum();
            report.observe(diff as f64);
        }
    }
    report.param("model", model.label());
    report.param("tau", serde_json::json!(taus));
    Ok(report)
}
