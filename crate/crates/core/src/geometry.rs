//! Dimension-generic geometric primitives and volume engines.
//!
//! Balls and lenses are closed sets. The `*_open` variants exist for the
//! places where the graph constructions need strict interiors.

use std::f64::consts::PI;
use std::ops::Deref;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::Seed;
use rand::Rng;

/// A point in R^d with finite coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::Domain("point must have dimension >= 1".into()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain(format!("non-finite coordinate in {coords:?}")));
        }
        Ok(Point(coords))
    }

    pub fn origin(dim: usize) -> Self {
        Point(vec![0.0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Point {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<[f64; 2]> for Point {
    fn from(c: [f64; 2]) -> Self {
        Point(c.to_vec())
    }
}

pub fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist2(a, b).sqrt()
}

pub fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Lexicographic comparison of coordinate tuples.
pub fn lex_cmp(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Equal => continue,
            o => return o,
        }
    }
    std::cmp::Ordering::Equal
}

/// Axis-aligned box `[lower, upper]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisBox {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl AxisBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.len() != upper.len() || lower.is_empty() {
            return Err(Error::Domain("box corners must share a dimension >= 1".into()));
        }
        if lower.iter().chain(&upper).any(|c| !c.is_finite()) {
            return Err(Error::Domain("box corners must be finite".into()));
        }
        if lower.iter().zip(&upper).any(|(l, u)| l > u) {
            return Err(Error::Domain(format!("inverted box {lower:?} > {upper:?}")));
        }
        Ok(AxisBox { lower, upper })
    }

    /// The centered cube `[-side/2, side/2]^d`.
    pub fn centered_cube(dim: usize, side: f64) -> Self {
        let h = side / 2.0;
        AxisBox { lower: vec![-h; dim], upper: vec![h; dim] }
    }

    /// Bounding box of a set of closed balls `(center, radius)`.
    pub fn around_balls<'a>(dim: usize, balls: impl IntoIterator<Item = (&'a [f64], f64)>) -> Option<Self> {
        let mut lower = vec![f64::INFINITY; dim];
        let mut upper = vec![f64::NEG_INFINITY; dim];
        let mut any = false;
        for (c, r) in balls {
            any = true;
            for i in 0..dim {
                lower[i] = lower[i].min(c[i] - r);
                upper[i] = upper[i].max(c[i] + r);
            }
        }
        any.then_some(AxisBox { lower, upper })
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn side(&self, i: usize) -> f64 {
        self.upper[i] - self.lower[i]
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|i| self.side(i)).product()
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        y.iter().zip(self.lower.iter().zip(&self.upper)).all(|(v, (l, u))| *l <= *v && *v <= *u)
    }

    pub fn contains_box(&self, other: &AxisBox) -> bool {
        self.contains(&other.lower) && self.contains(&other.upper)
    }

    /// Grow every side by `frac` of its length (half on each end), plus `abs` on each end.
    pub fn inflated(&self, frac: f64, abs: f64) -> AxisBox {
        let mut b = self.clone();
        for i in 0..self.dim() {
            let pad = self.side(i) * frac / 2.0 + abs;
            b.lower[i] -= pad;
            b.upper[i] += pad;
        }
        b
    }

    pub fn union(&self, other: &AxisBox) -> AxisBox {
        AxisBox {
            lower: self.lower.iter().zip(&other.lower).map(|(a, b)| a.min(*b)).collect(),
            upper: self.upper.iter().zip(&other.upper).map(|(a, b)| a.max(*b)).collect(),
        }
    }

    pub fn scaled(&self, tau: f64) -> AxisBox {
        AxisBox {
            lower: self.lower.iter().map(|v| v * tau).collect(),
            upper: self.upper.iter().map(|v| v * tau).collect(),
        }
    }
}

/// Volume of the unit ball in R^d, κ_d = π^{d/2} / Γ(d/2 + 1).
pub fn unit_ball_volume(d: usize) -> f64 {
    // κ_0 = 1, κ_1 = 2, κ_d = κ_{d-2} 2π/d
    let mut k = if d % 2 == 0 { 1.0 } else { 2.0 };
    let mut j = if d % 2 == 0 { 2 } else { 3 };
    while j <= d {
        k *= 2.0 * PI / j as f64;
        j += 2;
    }
    k
}

pub fn ball_volume(d: usize, r: f64) -> Result<f64> {
    if d == 0 {
        return Err(Error::Domain("dimension must be >= 1".into()));
    }
    if !(r >= 0.0) {
        return Err(Error::Domain(format!("negative radius {r}")));
    }
    Ok(unit_ball_volume(d) * r.powi(d as i32))
}

/// Angle ∠xyz at `y`, in `[0, π]`.
pub fn angle_at(x: &[f64], y: &[f64], z: &[f64]) -> Result<f64> {
    let u: Vec<f64> = x.iter().zip(y).map(|(a, b)| a - b).collect();
    let v: Vec<f64> = z.iter().zip(y).map(|(a, b)| a - b).collect();
    let (nu, nv) = (norm(&u), norm(&v));
    if nu == 0.0 || nv == 0.0 {
        return Err(Error::Domain("angle at a vertex coinciding with an endpoint".into()));
    }
    let c = u.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>() / (nu * nv);
    Ok(c.clamp(-1.0, 1.0).acos())
}

/// The β-skeleton lens C(e1, e2): union of the two disks of radius β|e|/2
/// passing through both endpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct Lens {
    pub centers: [[f64; 2]; 2],
    pub radius: f64,
}

impl Lens {
    pub fn new(e1: &[f64], e2: &[f64], beta: f64) -> Self {
        let (dx, dy) = (e2[0] - e1[0], e2[1] - e1[1]);
        let len = (dx * dx + dy * dy).sqrt();
        let radius = beta * len / 2.0;
        let h = (len / 2.0) * (beta * beta - 1.0).max(0.0).sqrt();
        let (mx, my) = ((e1[0] + e2[0]) / 2.0, (e1[1] + e2[1]) / 2.0);
        let (nx, ny) = if len > 0.0 { (-dy / len, dx / len) } else { (0.0, 0.0) };
        Lens { centers: [[mx + h * nx, my + h * ny], [mx - h * nx, my - h * ny]], radius }
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        let r2 = self.radius * self.radius;
        self.centers.iter().any(|c| dist2(c, y) <= r2)
    }

    /// Strict interior.
    pub fn contains_open(&self, y: &[f64]) -> bool {
        let r2 = self.radius * self.radius;
        self.centers.iter().any(|c| dist2(c, y) < r2)
    }

    pub fn bounding_box(&self) -> AxisBox {
        AxisBox::around_balls(2, self.centers.iter().map(|c| (&c[..], self.radius))).expect("two disks")
    }

    pub fn signed_distance(&self, y: &[f64]) -> f64 {
        self.centers.iter().map(|c| dist(c, y) - self.radius).fold(f64::INFINITY, f64::min)
    }
}

/// Closed-lens membership for the planar β-skeleton lens through `e1`, `e2`.
pub fn lens_contains(e1: &[f64], e2: &[f64], beta: f64, y: &[f64]) -> bool {
    Lens::new(e1, e2, beta).contains(y)
}

/// Cone with apex, unit axis and half-angle in (0, π/2).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cone {
    pub apex: Vec<f64>,
    pub axis: Vec<f64>,
    pub half_angle: f64,
}

impl Cone {
    pub fn new(apex: Vec<f64>, axis: Vec<f64>, half_angle: f64) -> Result<Self> {
        let n = norm(&axis);
        if n == 0.0 || apex.len() != axis.len() {
            return Err(Error::Domain("cone axis must be nonzero and match the apex dimension".into()));
        }
        if !(half_angle > 0.0 && half_angle < PI / 2.0) {
            return Err(Error::Domain(format!("cone half-angle {half_angle} outside (0, π/2)")));
        }
        Ok(Cone { apex, axis: axis.iter().map(|a| a / n).collect(), half_angle })
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        let v: Vec<f64> = y.iter().zip(&self.apex).map(|(a, b)| a - b).collect();
        let nv = norm(&v);
        if nv == 0.0 {
            return true;
        }
        let c = v.iter().zip(&self.axis).map(|(a, b)| a * b).sum::<f64>() / nv;
        c.clamp(-1.0, 1.0).acos() <= self.half_angle + 1e-12
    }

    pub fn translated(&self, apex: &[f64]) -> Cone {
        Cone { apex: apex.to_vec(), axis: self.axis.clone(), half_angle: self.half_angle }
    }
}

pub const DEFAULT_CONE_HALF_ANGLE: f64 = PI / 8.0;
pub const DEFAULT_CONE_OFFSET: f64 = 0.1;

/// Cones with apex 0 covering R^d (d ∈ {1, 2}).
///
/// In the plane the sectors have opening `2 * half_angle` and their boundary
/// rays start at angle `offset`; no boundary ray may be axis-parallel.
pub fn cone_cover(d: usize, half_angle: f64, offset: f64) -> Result<Vec<Cone>> {
    match d {
        1 => Ok(vec![
            Cone::new(vec![0.0], vec![1.0], PI / 4.0)?,
            Cone::new(vec![0.0], vec![-1.0], PI / 4.0)?,
        ]),
        2 => {
            if !(half_angle > 0.0 && half_angle < PI / 2.0) {
                return Err(Error::Domain(format!("half-angle {half_angle} outside (0, π/2)")));
            }
            let count = (PI / half_angle - 1e-9).ceil() as usize;
            let step = 2.0 * PI / count as f64;
            let mut cones = Vec::with_capacity(count);
            for i in 0..count {
                let start = offset + i as f64 * step;
                let quarter = start.rem_euclid(PI / 2.0);
                if quarter < 1e-9 || PI / 2.0 - quarter < 1e-9 {
                    return Err(Error::Domain(format!("cone boundary at angle {start} is axis-parallel")));
                }
                let mid = start + step / 2.0;
                // Opening `step` may exceed 2*half_angle when π/half_angle is not an integer.
                cones.push(Cone::new(vec![0.0, 0.0], vec![mid.cos(), mid.sin()], (step / 2.0).min(PI / 2.0 - 1e-12))?);
            }
            Ok(cones)
        }
        _ => Err(Error::UnsupportedDimension { dim: d, what: "cone_cover" }),
    }
}

/// Boundary ray directions of a planar cone.
pub fn cone_boundary_rays(cone: &Cone) -> [[f64; 2]; 2] {
    let a = cone.axis[1].atan2(cone.axis[0]);
    let (l, r) = (a - cone.half_angle, a + cone.half_angle);
    [[l.cos(), l.sin()], [r.cos(), r.sin()]]
}

/// A measurable set with a bounding box.
///
/// `signed_distance`, when provided, must be negative inside, positive
/// outside, and bounded in absolute value by the true distance to the
/// boundary.
pub trait Region: Sync {
    fn dim(&self) -> usize;
    fn bounding_box(&self) -> AxisBox;
    fn contains(&self, y: &[f64]) -> bool;
    fn signed_distance(&self, _y: &[f64]) -> Option<f64> {
        None
    }
}

/// Union of closed balls.
#[derive(Debug, Clone, PartialEq)]
pub struct BallUnion {
    pub dim: usize,
    pub balls: Vec<(Vec<f64>, f64)>,
}

impl BallUnion {
    pub fn new(dim: usize, balls: Vec<(Vec<f64>, f64)>) -> Self {
        BallUnion { dim, balls }
    }
}

impl Region for BallUnion {
    fn dim(&self) -> usize {
        self.dim
    }

    fn bounding_box(&self) -> AxisBox {
        AxisBox::around_balls(self.dim, self.balls.iter().map(|(c, r)| (&c[..], *r)))
            .unwrap_or_else(|| AxisBox::centered_cube(self.dim, 0.0))
    }

    fn contains(&self, y: &[f64]) -> bool {
        self.balls.iter().any(|(c, r)| dist2(c, y) <= r * r)
    }

    fn signed_distance(&self, y: &[f64]) -> Option<f64> {
        Some(self.balls.iter().map(|(c, r)| dist(c, y) - r).fold(f64::INFINITY, f64::min))
    }
}

/// Region given by a closure; no signed-distance hint.
pub struct FnRegion<F> {
    pub dim: usize,
    pub bounds: AxisBox,
    pub predicate: F,
}

impl<F: Fn(&[f64]) -> bool + Sync> Region for FnRegion<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn bounding_box(&self) -> AxisBox {
        self.bounds.clone()
    }
    fn contains(&self, y: &[f64]) -> bool {
        self.bounds.contains(y) && (self.predicate)(y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VolumeMethod {
    Quadrature,
    MonteCarlo,
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub value: f64,
    pub std_error: f64,
    pub method: VolumeMethod,
    /// Sample count for Monte Carlo, final refinement depth for quadrature.
    pub samples_or_depth: u64,
    /// Quadrature only: `[resolved-inside area, inside + unresolved boundary area]`.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub bracket: Option<(f64, f64)>,
}

impl VolumeEstimate {
    pub fn closed_form(value: f64) -> Self {
        VolumeEstimate { value, std_error: 0.0, method: VolumeMethod::ClosedForm, samples_or_depth: 0, bracket: None }
    }

    pub fn bracket_width(&self) -> f64 {
        self.bracket.map(|(lo, hi)| hi - lo).unwrap_or(0.0)
    }

    pub fn scaled(&self, factor: f64) -> Self {
        VolumeEstimate {
            value: self.value * factor,
            std_error: self.std_error * factor,
            bracket: self.bracket.map(|(lo, hi)| (lo * factor, hi * factor)),
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureOptions {
    pub rel_tol: f64,
    pub max_depth: u32,
    /// Levels refined unconditionally when no signed distance is available.
    pub min_depth: u32,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions { rel_tol: 1e-3, max_depth: 12, min_depth: 5 }
    }
}

pub fn region_volume_quadrature(region: &dyn Region, rel_tol: f64) -> Result<VolumeEstimate> {
    region_volume_quadrature_with(region, QuadratureOptions { rel_tol, ..Default::default() })
}

enum CellClass {
    Inside,
    Outside,
    Boundary,
}

/// Adaptive quadtree area of a planar region.
///
/// Cells are classified inside/outside by the signed-distance hint when the
/// region has one, otherwise by sampling the four corners and the center.
/// Refinement continues on boundary cells until their total area drops below
/// `rel_tol` times the running estimate or `max_depth` is reached. Leftover
/// boundary cells are counted by their center sample.
pub fn region_volume_quadrature_with(region: &dyn Region, opts: QuadratureOptions) -> Result<VolumeEstimate> {
    if region.dim() != 2 {
        return Err(Error::UnsupportedDimension { dim: region.dim(), what: "quadrature" });
    }
    let bb = region.bounding_box();
    let (x0, y0) = (bb.lower[0], bb.lower[1]);
    let (w0, h0) = (bb.side(0), bb.side(1));
    if !(w0 > 0.0 && h0 > 0.0) {
        return Ok(VolumeEstimate { value: 0.0, std_error: 0.0, method: VolumeMethod::Quadrature, samples_or_depth: 0, bracket: Some((0.0, 0.0)) });
    }
    let has_sdf = region.signed_distance(&[x0, y0]).is_some();

    let mut inside_area = 0.0;
    let mut cells: Vec<(u32, u32)> = vec![(0, 0)];
    let mut depth = 0u32;
    loop {
        let scale = (1u64 << depth) as f64;
        let (w, h) = (w0 / scale, h0 / scale);
        let half_diag = 0.5 * (w * w + h * h).sqrt();
        let cell_area = w * h;
        let classify = |&(i, j): &(u32, u32)| -> CellClass {
            let cx = x0 + (i as f64 + 0.5) * w;
            let cy = y0 + (j as f64 + 0.5) * h;
            if has_sdf {
                let s = region.signed_distance(&[cx, cy]).unwrap_or(0.0);
                if s < -half_diag {
                    CellClass::Inside
                } else if s > half_diag {
                    CellClass::Outside
                } else {
                    CellClass::Boundary
                }
            } else if depth < opts.min_depth {
                CellClass::Boundary
            } else {
                let xs = [x0 + i as f64 * w, x0 + (i + 1) as f64 * w];
                let ys = [y0 + j as f64 * h, y0 + (j + 1) as f64 * h];
                let probes = [[xs[0], ys[0]], [xs[1], ys[0]], [xs[0], ys[1]], [xs[1], ys[1]], [cx, cy]];
                let hits = probes.iter().filter(|p| region.contains(&p[..])).count();
                match hits {
                    0 => CellClass::Outside,
                    5 => CellClass::Inside,
                    _ => CellClass::Boundary,
                }
            }
        };
        let classes: Vec<CellClass> = if cells.len() > 4096 {
            cells.par_iter().map(classify).collect()
        } else {
            cells.iter().map(classify).collect()
        };
        let mut boundary = Vec::new();
        for (c, cl) in cells.iter().zip(classes) {
            match cl {
                CellClass::Inside => inside_area += cell_area,
                CellClass::Outside => {}
                CellClass::Boundary => boundary.push(*c),
            }
        }
        let unresolved = boundary.len() as f64 * cell_area;
        let forced = !has_sdf && depth < opts.min_depth;
        let estimate = inside_area + unresolved / 2.0;
        let converged = !forced && unresolved <= opts.rel_tol * estimate;
        if boundary.is_empty() || converged || depth >= opts.max_depth {
            let center_in = |&(i, j): &(u32, u32)| {
                let p = [x0 + (i as f64 + 0.5) * w, y0 + (j as f64 + 0.5) * h];
                region.contains(&p) as u64
            };
            let hits: u64 = if boundary.len() > 4096 {
                boundary.par_iter().map(center_in).sum()
            } else {
                boundary.iter().map(center_in).sum()
            };
            return Ok(VolumeEstimate {
                value: inside_area + hits as f64 * cell_area,
                std_error: 0.0,
                method: VolumeMethod::Quadrature,
                samples_or_depth: depth as u64,
                bracket: Some((inside_area, inside_area + unresolved)),
            });
        }
        cells = boundary
            .into_iter()
            .flat_map(|(i, j)| [(2 * i, 2 * j), (2 * i + 1, 2 * j), (2 * i, 2 * j + 1), (2 * i + 1, 2 * j + 1)])
            .collect();
        depth += 1;
    }
}

/// Part of a region inside one connected cluster of its covering balls.
struct Cluster<'a> {
    region: &'a dyn Region,
    balls: Vec<(Vec<f64>, f64)>,
    bounds: AxisBox,
}

impl Region for Cluster<'_> {
    fn dim(&self) -> usize {
        self.region.dim()
    }
    fn bounding_box(&self) -> AxisBox {
        self.bounds.clone()
    }
    fn contains(&self, y: &[f64]) -> bool {
        self.balls.iter().any(|(c, r)| dist2(c, y) <= r * r) && self.region.contains(y)
    }
    fn signed_distance(&self, y: &[f64]) -> Option<f64> {
        Some(self.balls.iter().map(|(c, r)| dist(c, y) - r).fold(f64::INFINITY, f64::min))
    }
}

/// Quadrature of a planar region contained in (and, up to a null set,
/// equal to) a union of balls. Overlapping balls are grouped into clusters
/// and each cluster is refined on its own bounding box, so distant pieces
/// do not share one coarse grid.
pub fn ball_cover_quadrature(region: &dyn Region, balls: &[(Vec<f64>, f64)], opts: QuadratureOptions) -> Result<VolumeEstimate> {
    let n = balls.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            let (ci, ri) = (&balls[i].0, balls[i].1);
            let (cj, rj) = (&balls[j].0, balls[j].1);
            if dist(ci, cj) <= ri + rj {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                parent[a.max(b)] = a.min(b);
            }
        }
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut slot = vec![usize::MAX; n];
    for i in 0..n {
        let root = find(&mut parent, i);
        if slot[root] == usize::MAX {
            slot[root] = groups.len();
            groups.push(Vec::new());
        }
        groups[slot[root]].push(i);
    }
    let mut total = VolumeEstimate { value: 0.0, std_error: 0.0, method: VolumeMethod::Quadrature, samples_or_depth: 0, bracket: Some((0.0, 0.0)) };
    for g in groups {
        let cb: Vec<(Vec<f64>, f64)> = g.iter().map(|&i| balls[i].clone()).collect();
        let bounds = AxisBox::around_balls(region.dim(), cb.iter().map(|(c, r)| (&c[..], *r)))
            .expect("nonempty cluster")
            .inflated(0.01, 0.0);
        let part = region_volume_quadrature_with(&Cluster { region, balls: cb, bounds }, opts)?;
        let (lo, hi) = part.bracket.unwrap_or((part.value, part.value));
        let (tlo, thi) = total.bracket.unwrap();
        total.value += part.value;
        total.bracket = Some((tlo + lo, thi + hi));
        total.samples_or_depth = total.samples_or_depth.max(part.samples_or_depth);
    }
    Ok(total)
}

const MC_BLOCK: u64 = 1 << 15;

/// Hit-or-miss Monte Carlo volume over the region's bounding box.
///
/// Samples are drawn in fixed-size blocks, each from its own child stream,
/// so the result does not depend on the number of worker threads.
pub fn region_volume_mc(region: &dyn Region, samples: u64, seed: Seed) -> Result<VolumeEstimate> {
    if samples == 0 {
        return Err(Error::Domain("samples must be >= 1".into()));
    }
    let bb = region.bounding_box();
    let vol = bb.volume();
    let d = region.dim();
    let blocks = samples.div_ceil(MC_BLOCK);
    let hits: u64 = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let n = MC_BLOCK.min(samples - b * MC_BLOCK);
            let mut rng = seed.child(b).rng();
            let mut y = vec![0.0; d];
            let mut h = 0u64;
            for _ in 0..n {
                for (i, v) in y.iter_mut().enumerate() {
                    *v = bb.lower[i] + rng.random::<f64>() * bb.side(i);
                }
                if region.contains(&y) {
                    h += 1;
                }
            }
            h
        })
        .sum();
    let p = hits as f64 / samples as f64;
    Ok(VolumeEstimate {
        value: vol * p,
        std_error: vol * (p * (1.0 - p) / samples as f64).sqrt(),
        method: VolumeMethod::MonteCarlo,
        samples_or_depth: samples,
        bracket: None,
    })
}

/// Exact area of a union of planar disks `(center, radius)`.
///
/// Sums (1/2)∮(x dy − y dx) over the arcs of each circle that are not
/// covered by another disk. Repeated disks are counted once.
pub fn disk_union_area(disks: &[([f64; 2], f64)]) -> f64 {
    let mut uniq: Vec<([f64; 2], f64)> = Vec::with_capacity(disks.len());
    for d in disks {
        if d.1 > 0.0 && !uniq.contains(d) {
            uniq.push(*d);
        }
    }
    let tau = 2.0 * PI;
    let mut area = 0.0;
    for (i, &(c, r)) in uniq.iter().enumerate() {
        let mut cuts = vec![0.0, tau];
        let mut swallowed = false;
        for (j, &(o, s)) in uniq.iter().enumerate() {
            if i == j {
                continue;
            }
            let (dx, dy) = (o[0] - c[0], o[1] - c[1]);
            let dd = (dx * dx + dy * dy).sqrt();
            if dd + r <= s {
                swallowed = true;
                break;
            }
            if dd >= r + s || dd + s <= r {
                continue;
            }
            let base = dy.atan2(dx);
            let half = ((r * r + dd * dd - s * s) / (2.0 * r * dd)).clamp(-1.0, 1.0).acos();
            for a in [base - half, base + half] {
                cuts.push(a.rem_euclid(tau));
            }
        }
        if swallowed {
            continue;
        }
        cuts.sort_by(f64::total_cmp);
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b - a <= 0.0 {
                continue;
            }
            let mid = 0.5 * (a + b);
            let p = [c[0] + r * mid.cos(), c[1] + r * mid.sin()];
            let covered = uniq.iter().enumerate().any(|(j, &(o, s))| j != i && dist2(&o, &p) < s * s);
            if !covered {
                area += r * r * (b - a) + c[0] * r * (b.sin() - a.sin()) - c[1] * r * (b.cos() - a.cos());
            }
        }
    }
    0.5 * area
}

/// Area of the union of two planar disks of radius `r` whose centers are `s` apart.
pub fn two_disk_union_area(r: f64, s: f64) -> f64 {
    let single = PI * r * r;
    if s >= 2.0 * r {
        return 2.0 * single;
    }
    let lens = 2.0 * r * r * (s / (2.0 * r)).acos() - 0.5 * s * (4.0 * r * r - s * s).sqrt();
    2.0 * single - lens
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn ball_volume_examples() {
        assert!(close(ball_volume(2, 1.0).unwrap(), PI, 1e-12));
        assert!(close(ball_volume(3, 1.0).unwrap(), 4.0 * PI / 3.0, 1e-12));
        assert!(close(ball_volume(1, 2.0).unwrap(), 4.0, 1e-12));
        assert!(ball_volume(2, -1.0).is_err());
    }

    #[test]
    fn unit_ball_matches_gamma_formula() {
        for d in 1..=8 {
            let g = statrs::function::gamma::gamma(d as f64 / 2.0 + 1.0);
            let want = PI.powf(d as f64 / 2.0) / g;
            assert!((unit_ball_volume(d) - want).abs() < 1e-12 * want, "d={d}");
        }
    }

    #[test]
    fn angle_examples() {
        let o = [0.0, 0.0];
        assert!(close(angle_at(&[1.0, 0.0], &o, &[0.0, 1.0]).unwrap(), PI / 2.0, 1e-12));
        assert!(close(angle_at(&[1.0, 0.0], &o, &[2.0, 0.0]).unwrap(), 0.0, 1e-12));
        assert!(close(angle_at(&[1.0, 0.0], &o, &[-1.0, 0.0]).unwrap(), PI, 1e-12));
        assert!(angle_at(&o, &o, &[1.0, 0.0]).is_err());
    }

    #[test]
    fn lens_examples() {
        let (e1, e2) = ([0.0, 0.0], [2.0, 0.0]);
        assert!(lens_contains(&e1, &e2, 1.2, &[1.0, 0.0]));
        assert!(!lens_contains(&e1, &e2, 1.2, &[50.0, 50.0]));
        // β = 2: radius 2, centers at (1, ±√3). Top of the upper circle sees e at angle π/6.
        let lens = Lens::new(&e1, &e2, 2.0);
        assert!(close(lens.radius, 2.0, 1e-12));
        let c = lens.centers[0];
        let top = [c[0], c[1] + 2.0];
        assert!(close(angle_at(&e1, &top, &e2).unwrap(), (0.5f64).asin(), 1e-12));
        assert!(lens.contains(&top));
        assert!(!lens.contains_open(&top));
    }

    #[test]
    fn cone_cover_default_layout() {
        let cones = cone_cover(2, PI / 8.0, 0.1).unwrap();
        assert_eq!(cones.len(), 8);
        for c in &cones {
            for ray in cone_boundary_rays(c) {
                assert!(ray[0].abs() > 1e-6 && ray[1].abs() > 1e-6);
            }
        }
        for i in 0..720 {
            let t = i as f64 * PI / 360.0 + 0.001;
            let y = [t.cos(), t.sin()];
            assert!(cones.iter().any(|c| c.contains(&y)));
        }
        assert_eq!(cone_cover(1, 0.3, 0.0).unwrap().len(), 2);
        assert!(cone_cover(3, PI / 8.0, 0.1).is_err());
        assert!(cone_cover(2, PI / 8.0, 0.0).is_err());
    }

    #[test]
    fn disk_union_exact() {
        assert!(close(disk_union_area(&[([0.0, 0.0], 1.0)]), PI, 1e-12));
        assert!(close(disk_union_area(&[([0.0, 0.0], 1.0), ([1.0, 0.0], 1.0)]), two_disk_union_area(1.0, 1.0), 1e-12));
        assert!(close(disk_union_area(&[([0.0, 0.0], 1.0), ([5.0, 0.0], 1.0)]), 2.0 * PI, 1e-12));
        assert!(close(disk_union_area(&[([0.0, 0.0], 2.0), ([0.5, 0.0], 1.0)]), 4.0 * PI, 1e-12));
        assert!(close(disk_union_area(&[([0.0, 0.0], 1.0), ([0.0, 0.0], 1.0)]), PI, 1e-12));
        let disks = [([0.0, 0.0], 1.0), ([1.2, 0.3], 0.7), ([0.4, -0.9], 0.5), ([0.6, 0.1], 0.2)];
        let balls: Vec<(Vec<f64>, f64)> = disks.iter().map(|(c, r)| (c.to_vec(), *r)).collect();
        let q = region_volume_quadrature(&BallUnion::new(2, balls), 1e-4).unwrap();
        let (lo, hi) = q.bracket.unwrap();
        let exact = disk_union_area(&disks);
        assert!(lo <= exact && exact <= hi, "{lo} {exact} {hi}");
    }

    #[test]
    fn quadrature_disk_and_two_disks() {
        let disk = BallUnion::new(2, vec![(vec![0.0, 0.0], 1.0)]);
        let v = region_volume_quadrature(&disk, 1e-3).unwrap();
        assert!((v.value - PI).abs() < 1e-3 * PI, "{v:?}");
        assert_eq!(v.std_error, 0.0);
        let two = BallUnion::new(2, vec![(vec![0.0, 0.0], 1.0), (vec![1.0, 0.0], 1.0)]);
        let want = 4.0 * PI / 3.0 + 3f64.sqrt() / 2.0;
        assert!(close(two_disk_union_area(1.0, 1.0), want, 1e-12));
        let v = region_volume_quadrature(&two, 1e-4).unwrap();
        assert!((v.value - want).abs() < 1e-3, "{} vs {want}", v.value);
    }

    #[test]
    fn quadrature_without_hint() {
        let disk = BallUnion::new(2, vec![(vec![0.0, 0.0], 1.0)]);
        let fr = FnRegion { dim: 2, bounds: disk.bounding_box(), predicate: |y: &[f64]| disk.contains(y) };
        let v = region_volume_quadrature(&fr, 1e-3).unwrap();
        assert!((v.value - PI).abs() < 2e-3 * PI, "{v:?}");
        let empty = FnRegion { dim: 2, bounds: AxisBox::centered_cube(2, 2.0), predicate: |_: &[f64]| false };
        assert_eq!(region_volume_quadrature(&empty, 1e-3).unwrap().value, 0.0);
        let three = FnRegion { dim: 3, bounds: AxisBox::centered_cube(3, 2.0), predicate: |_: &[f64]| true };
        assert!(matches!(region_volume_quadrature(&three, 1e-3), Err(Error::UnsupportedDimension { .. })));
    }

    #[test]
    fn mc_disk_and_empty() {
        let disk = BallUnion::new(2, vec![(vec![0.0, 0.0], 1.0)]);
        let v = region_volume_mc(&disk, 1_000_000, Seed::new(3)).unwrap();
        assert!((v.value - PI).abs() < 3.0 * v.std_error, "{v:?}");
        let again = region_volume_mc(&disk, 1_000_000, Seed::new(3)).unwrap();
        assert_eq!(v, again);
        let empty = FnRegion { dim: 2, bounds: AxisBox::centered_cube(2, 2.0), predicate: |_: &[f64]| false };
        let e = region_volume_mc(&empty, 1000, Seed::new(1)).unwrap();
        assert_eq!(e.value, 0.0);
    }
}
