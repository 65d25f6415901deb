//! Point configurations and seeded Poisson / binomial sampling.

use std::fmt::Write as _;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{lex_cmp, AxisBox};
use crate::rng::Seed;

/// A finite simple configuration of points in R^d, stored flat.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointConfig {
    dim: usize,
    coords: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<i64>>,
}

impl PointConfig {
    pub fn empty(dim: usize) -> Self {
        PointConfig { dim, coords: Vec::new(), labels: None }
    }

    /// Builds a configuration from flat coordinates, rejecting non-finite
    /// values and duplicate points.
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Domain("dimension must be >= 1".into()));
        }
        if coords.len() % dim != 0 {
            return Err(Error::Domain(format!("{} coordinates do not split into points of dimension {dim}", coords.len())));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::Domain("non-finite coordinate".into()));
        }
        let cfg = PointConfig { dim, coords, labels: None };
        if let Some(i) = cfg.first_duplicate() {
            return Err(Error::DuplicatePoint(cfg.point(i).to_vec()));
        }
        Ok(cfg)
    }

    pub fn from_points<P: AsRef<[f64]>>(dim: usize, points: &[P]) -> Result<Self> {
        let mut coords = Vec::with_capacity(points.len() * dim);
        for p in points {
            let p = p.as_ref();
            if p.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: p.len() });
            }
            coords.extend_from_slice(p);
        }
        PointConfig::new(dim, coords)
    }

    pub fn with_labels(mut self, labels: Vec<i64>) -> Result<Self> {
        if labels.len() != self.len() {
            return Err(Error::Domain("label count must match point count".into()));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn labels(&self) -> Option<&[i64]> {
        self.labels.as_deref()
    }

    pub fn contains_point(&self, y: &[f64]) -> bool {
        self.points().any(|p| p == y)
    }

    /// Index of some point that equals an earlier point, if any.
    fn first_duplicate(&self) -> Option<usize> {
        let mut idx: Vec<usize> = (0..self.len()).collect();
        idx.sort_unstable_by(|&a, &b| lex_cmp(self.point(a), self.point(b)));
        idx.windows(2).find(|w| self.point(w[0]) == self.point(w[1])).map(|w| w[1])
    }

    /// Appends `y`, failing on duplicates. Returns the new node index.
    pub fn push(&mut self, y: &[f64]) -> Result<usize> {
        if y.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: y.len() });
        }
        if self.contains_point(y) {
            return Err(Error::DuplicatePoint(y.to_vec()));
        }
        self.coords.extend_from_slice(y);
        if let Some(l) = self.labels.as_mut() {
            l.push(0);
        }
        Ok(self.len() - 1)
    }

    /// Copy with `y` appended (no label).
    pub fn with_point(&self, y: &[f64]) -> Result<PointConfig> {
        let mut c = PointConfig { dim: self.dim, coords: self.coords.clone(), labels: None };
        c.push(y)?;
        Ok(c)
    }

    pub fn scaled(&self, tau: f64) -> PointConfig {
        PointConfig { dim: self.dim, coords: self.coords.iter().map(|c| c * tau).collect(), labels: self.labels.clone() }
    }

    pub fn translated(&self, shift: &[f64]) -> PointConfig {
        let coords = self.coords.chunks_exact(self.dim).flat_map(|p| p.iter().zip(shift).map(|(a, b)| a + b)).collect();
        PointConfig { dim: self.dim, coords, labels: self.labels.clone() }
    }

    /// Planar rotation by `theta` about the origin.
    pub fn rotated2(&self, theta: f64) -> PointConfig {
        assert_eq!(self.dim, 2, "rotated2 requires d = 2");
        let (s, c) = theta.sin_cos();
        let coords = self.coords.chunks_exact(2).flat_map(|p| [c * p[0] - s * p[1], s * p[0] + c * p[1]]).collect();
        PointConfig { dim: 2, coords, labels: self.labels.clone() }
    }

    /// Subconfiguration with the given node indices, in order.
    pub fn select(&self, nodes: &[usize]) -> PointConfig {
        let coords = nodes.iter().flat_map(|&i| self.point(i).iter().copied()).collect();
        PointConfig { dim: self.dim, coords, labels: None }
    }

    pub fn bounding_box(&self) -> Option<AxisBox> {
        if self.is_empty() {
            return None;
        }
        AxisBox::around_balls(self.dim, self.points().map(|p| (p, 0.0)))
    }

    /// CSV: `dim=<d>` header, then one point per line with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = format!("dim={}\n", self.dim);
        for p in self.points() {
            let row: Vec<String> = p.iter().map(|v| format!("{v:.16e}")).collect();
            let _ = writeln!(s, "{}", row.join(","));
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<PointConfig> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty point file".into()))?;
        let dim: usize = header
            .trim()
            .strip_prefix("dim=")
            .and_then(|d| d.parse().ok())
            .ok_or_else(|| Error::Parse(format!("bad header {header:?}, expected dim=<d>")))?;
        let mut coords = Vec::new();
        for (no, line) in lines.enumerate() {
            let row: Vec<f64> = line
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", no + 2)))?;
            if row.len() != dim {
                return Err(Error::Parse(format!("line {}: expected {dim} coordinates, got {}", no + 2, row.len())));
            }
            coords.extend(row);
        }
        PointConfig::new(dim, coords)
    }
}

fn uniform_points(bx: &AxisBox, m: usize, rng: &mut impl Rng) -> Vec<f64> {
    let d = bx.dim();
    let mut coords = Vec::with_capacity(m * d);
    for _ in 0..m {
        for i in 0..d {
            coords.push(bx.lower[i] + rng.random::<f64>() * bx.side(i));
        }
    }
    coords
}

/// Redraws exact duplicates (probability zero, but the invariant is enforced).
fn make_simple(bx: &AxisBox, mut cfg: PointConfig, rng: &mut impl Rng) -> PointConfig {
    while let Some(i) = cfg.first_duplicate() {
        let fresh = uniform_points(bx, 1, rng);
        cfg.coords[i * cfg.dim..(i + 1) * cfg.dim].copy_from_slice(&fresh);
    }
    cfg
}

/// Homogeneous Poisson process of the given intensity in `bx`.
pub fn sample_poisson(bx: &AxisBox, intensity: f64, seed: Seed) -> Result<PointConfig> {
    if !(intensity > 0.0) || !intensity.is_finite() {
        return Err(Error::Domain(format!("intensity must be positive, got {intensity}")));
    }
    let mean = intensity * bx.volume();
    if !(mean > 0.0) {
        return Err(Error::Domain("box must be nondegenerate".into()));
    }
    let mut rng = seed.rng();
    let count = Poisson::new(mean).map_err(|e| Error::Domain(e.to_string()))?.sample(&mut rng) as usize;
    let cfg = PointConfig { dim: bx.dim(), coords: uniform_points(bx, count, &mut rng), labels: None };
    Ok(make_simple(bx, cfg, &mut rng))
}

/// Exactly `m` i.i.d. uniform points in `bx`.
pub fn sample_binomial(bx: &AxisBox, m: usize, seed: Seed) -> Result<PointConfig> {
    let mut rng = seed.rng();
    let cfg = PointConfig { dim: bx.dim(), coords: uniform_points(bx, m, &mut rng), labels: None };
    Ok(make_simple(bx, cfg, &mut rng))
}
