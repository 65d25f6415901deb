//! Out-neighbor maps for k-nearest-neighbor graphs and planar β-skeletons.
//!
//! Every construction exists twice: an O(n²) (kNN) / O(n³) (β-skeleton)
//! brute-force oracle and a grid-indexed fast path. Both evaluate the same
//! predicates in the same floating-point order, so they agree exactly.

use std::cmp::Ordering;
use std::f64::consts::PI;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{dist, dist2, lex_cmp, Lens, DEFAULT_CONE_OFFSET};
use crate::point_process::PointConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ModelKind {
    Knn { k: usize },
    BetaSkeleton { beta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GraphModel {
    pub kind: ModelKind,
    pub dim: usize,
}

impl GraphModel {
    pub fn knn(dim: usize, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Domain("kNN requires k >= 1".into()));
        }
        if dim == 0 {
            return Err(Error::Domain("dimension must be >= 1".into()));
        }
        Ok(GraphModel { kind: ModelKind::Knn { k }, dim })
    }

    /// Nearest-neighbor graph, the kNN with k = 1.
    pub fn nng(dim: usize) -> Self {
        GraphModel { kind: ModelKind::Knn { k: 1 }, dim }
    }

    pub fn beta_skeleton(beta: f64) -> Result<Self> {
        if !(beta >= 1.0) || !beta.is_finite() {
            return Err(Error::Domain(format!("β-skeleton requires β >= 1, got {beta}")));
        }
        Ok(GraphModel { kind: ModelKind::BetaSkeleton { beta }, dim: 2 })
    }

    pub fn is_nng(&self) -> bool {
        matches!(self.kind, ModelKind::Knn { k: 1 })
    }

    /// Minimal #ψ for the insertion-monotonicity condition: k + 1 for kNN, 1 for β-skeletons.
    pub fn c_inf(&self) -> usize {
        match self.kind {
            ModelKind::Knn { k } => k + 1,
            ModelKind::BetaSkeleton { .. } => 1,
        }
    }

    /// Points per cone in the stabilization radius: k + 1 for kNN, 2 for β-skeletons.
    pub fn c_sta(&self) -> usize {
        match self.kind {
            ModelKind::Knn { k } => k + 1,
            ModelKind::BetaSkeleton { .. } => 2,
        }
    }

    pub fn label(&self) -> String {
        match self.kind {
            ModelKind::Knn { k } => format!("knn(k={k},d={})", self.dim),
            ModelKind::BetaSkeleton { beta } => format!("beta_skeleton(beta={beta})"),
        }
    }
}

/// Directed adjacency in compressed row form. Out lists are sorted by node index.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectedAdjacency {
    config: PointConfig,
    offsets: Vec<usize>,
    targets: Vec<usize>,
}

impl DirectedAdjacency {
    fn from_lists(config: PointConfig, lists: Vec<Vec<usize>>) -> Self {
        let mut offsets = Vec::with_capacity(lists.len() + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for mut l in lists {
            l.sort_unstable();
            targets.extend(l);
            offsets.push(targets.len());
        }
        DirectedAdjacency { config, offsets, targets }
    }

    pub fn config(&self) -> &PointConfig {
        &self.config
    }

    pub fn len(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Out set of `x`; panics on an unknown node.
    pub fn out(&self, x: usize) -> &[usize] {
        &self.targets[self.offsets[x]..self.offsets[x + 1]]
    }

    pub fn has_arc(&self, from: usize, to: usize) -> bool {
        self.out(from).binary_search(&to).is_ok()
    }

    pub fn out_neighbors(&self, x: usize) -> Result<&[usize]> {
        self.check(x)?;
        Ok(self.out(x))
    }

    /// Union of out- and in-neighbors of `x`, sorted.
    pub fn in_out_neighbors(&self, x: usize) -> Result<Vec<usize>> {
        self.check(x)?;
        let mut s: Vec<usize> = self.out(x).to_vec();
        s.extend((0..self.len()).filter(|&y| y != x && self.has_arc(y, x)));
        s.sort_unstable();
        s.dedup();
        Ok(s)
    }

    fn check(&self, x: usize) -> Result<()> {
        if x < self.len() {
            Ok(())
        } else {
            Err(Error::UnknownNode { index: x, len: self.len() })
        }
    }

    pub fn arcs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.len()).flat_map(move |i| self.out(i).iter().map(move |&j| (i, j)))
    }

    pub fn arc_count(&self) -> usize {
        self.targets.len()
    }

    pub fn max_in_degree(&self) -> usize {
        let mut indeg = vec![0usize; self.len()];
        for &t in &self.targets {
            indeg[t] += 1;
        }
        indeg.into_iter().max().unwrap_or(0)
    }

    /// `src_index,dst_index,length` per arc, with a header line.
    pub fn to_edge_csv(&self) -> String {
        let mut s = String::from("src_index,dst_index,length\n");
        for (i, j) in self.arcs() {
            let _ = writeln!(s, "{i},{j},{:.16e}", dist(self.config.point(i), self.config.point(j)));
        }
        s
    }
}

/// Ordering key of candidate `j` as seen from a query point: distance, then
/// lexicographically smallest coordinates.
fn knn_key_cmp(cfg: &PointConfig, a: (f64, usize), b: (f64, usize)) -> Ordering {
    a.0.total_cmp(&b.0).then_with(|| lex_cmp(cfg.point(a.1), cfg.point(b.1)))
}

/// Insert into a sorted top-k buffer.
fn push_top_k(cfg: &PointConfig, best: &mut Vec<(f64, usize)>, k: usize, cand: (f64, usize)) {
    if best.len() == k && knn_key_cmp(cfg, cand, best[k - 1]) != Ordering::Less {
        return;
    }
    let pos = best.partition_point(|&b| knn_key_cmp(cfg, b, cand) == Ordering::Less);
    best.insert(pos, cand);
    best.truncate(k);
}

/// j-th smallest distance from node `x` to the other nodes (1-based).
pub fn knn_distance(config: &PointConfig, x: usize, j: usize) -> Result<f64> {
    if x >= config.len() {
        return Err(Error::UnknownNode { index: x, len: config.len() });
    }
    if j == 0 || j >= config.len() {
        return Err(Error::Domain(format!("rank {j} outside 1..={}", config.len().saturating_sub(1))));
    }
    let p = config.point(x);
    let mut d: Vec<f64> = (0..config.len()).filter(|&i| i != x).map(|i| dist(p, config.point(i))).collect();
    d.sort_unstable_by(f64::total_cmp);
    Ok(d[j - 1])
}

/// k nearest other nodes of `x` by brute force, sorted by the tie-broken key.
pub fn knn_ranked(config: &PointConfig, x: usize, k: usize) -> Vec<(f64, usize)> {
    let p = config.point(x);
    let mut best = Vec::with_capacity(k + 1);
    for j in 0..config.len() {
        if j != x {
            push_top_k(config, &mut best, k, (dist2(p, config.point(j)), j));
        }
    }
    best
}

/// Lens of the pair, computed with endpoints in index order so that both
/// orientations evaluate identical floating-point values.
pub fn pair_lens(config: &PointConfig, i: usize, j: usize, beta: f64) -> Lens {
    let (a, b) = if i < j { (i, j) } else { (j, i) };
    Lens::new(config.point(a), config.point(b), beta)
}

fn lens_blocked_brute(config: &PointConfig, i: usize, j: usize, beta: f64) -> bool {
    let lens = pair_lens(config, i, j, beta);
    (0..config.len()).any(|l| l != i && l != j && lens.contains_open(config.point(l)))
}

/// Out set of one node, recomputed from scratch.
pub fn out_set_brute(config: &PointConfig, model: &GraphModel, x: usize) -> Vec<usize> {
    let mut out: Vec<usize> = match model.kind {
        ModelKind::Knn { k } => knn_ranked(config, x, k).into_iter().map(|(_, j)| j).collect(),
        ModelKind::BetaSkeleton { beta } => {
            (0..config.len()).filter(|&j| j != x && !lens_blocked_brute(config, x, j, beta)).collect()
        }
    };
    out.sort_unstable();
    out
}

fn check_model(config: &PointConfig, model: &GraphModel) -> Result<()> {
    if config.dim() != model.dim {
        return Err(Error::DimensionMismatch { expected: model.dim, got: config.dim() });
    }
    Ok(())
}

/// O(n²)/O(n³) reference construction.
pub fn build_adjacency_brute(config: &PointConfig, model: &GraphModel) -> Result<DirectedAdjacency> {
    check_model(config, model)?;
    let n = config.len();
    let lists = match model.kind {
        ModelKind::Knn { .. } => (0..n).map(|x| out_set_brute(config, model, x)).collect(),
        ModelKind::BetaSkeleton { beta } => {
            let mut lists = vec![Vec::new(); n];
            for i in 0..n {
                for j in i + 1..n {
                    if !lens_blocked_brute(config, i, j, beta) {
                        lists[i].push(j);
                        lists[j].push(i);
                    }
                }
            }
            lists
        }
    };
    Ok(DirectedAdjacency::from_lists(config.clone(), lists))
}

const BRUTE_FORCE_BELOW: usize = 32;

pub fn build_adjacency(config: &PointConfig, model: &GraphModel) -> Result<DirectedAdjacency> {
    build_adjacency_owned(config.clone(), model)
}

/// Indexed construction; falls back to brute force for small inputs.
pub fn build_adjacency_owned(config: PointConfig, model: &GraphModel) -> Result<DirectedAdjacency> {
    check_model(&config, model)?;
    let n = config.len();
    if n < BRUTE_FORCE_BELOW {
        return build_adjacency_brute(&config, model);
    }
    let lists = match model.kind {
        ModelKind::Knn { k } => {
            let grid = SpatialGrid::new(&config, (k + 1) as f64);
            (0..n).map(|x| grid.knn(&config, x, k).into_iter().map(|(_, j)| j).collect()).collect()
        }
        ModelKind::BetaSkeleton { beta } => beta_skeleton_indexed(&config, beta),
    };
    Ok(DirectedAdjacency::from_lists(config, lists))
}

/// Uniform grid over the bounding box of a configuration.
pub(crate) struct SpatialGrid {
    dim: usize,
    lower: Vec<f64>,
    cell: f64,
    shape: Vec<usize>,
    starts: Vec<u32>,
    items: Vec<u32>,
}

impl SpatialGrid {
    /// `per_cell` is the targeted mean occupancy.
    pub(crate) fn new(config: &PointConfig, per_cell: f64) -> Self {
        let dim = config.dim();
        let n = config.len().max(1);
        let bb = config.bounding_box().expect("non-empty config");
        let extent: Vec<f64> = (0..dim).map(|i| bb.side(i)).collect();
        let max_extent = extent.iter().cloned().fold(0.0, f64::max).max(1e-300);
        let vol: f64 = extent.iter().map(|e| e.max(max_extent * 1e-6)).product();
        let mut cell = (vol * per_cell / n as f64).powf(1.0 / dim as f64);
        if !(cell > 0.0) || !cell.is_finite() {
            cell = max_extent;
        }
        // keep the cell count O(n)
        loop {
            let count: f64 = extent.iter().map(|e| (e / cell).floor() + 1.0).product();
            if count <= 4.0 * n as f64 + 8.0 {
                break;
            }
            cell *= 1.5;
        }
        let shape: Vec<usize> = extent.iter().map(|e| (e / cell).floor() as usize + 1).collect();
        let total: usize = shape.iter().product();
        let mut grid = SpatialGrid { dim, lower: bb.lower.clone(), cell, shape, starts: vec![0; total + 1], items: vec![0; config.len()] };
        let cells: Vec<usize> = config.points().map(|p| grid.flat(&grid.cell_of(p))).collect();
        for &c in &cells {
            grid.starts[c + 1] += 1;
        }
        for i in 0..total {
            grid.starts[i + 1] += grid.starts[i];
        }
        let mut fill = grid.starts.clone();
        for (i, &c) in cells.iter().enumerate() {
            grid.items[fill[c] as usize] = i as u32;
            fill[c] += 1;
        }
        grid
    }

    fn cell_of(&self, p: &[f64]) -> Vec<isize> {
        (0..self.dim)
            .map(|i| (((p[i] - self.lower[i]) / self.cell).floor() as isize).clamp(0, self.shape[i] as isize - 1))
            .collect()
    }

    fn flat(&self, c: &[isize]) -> usize {
        let mut f = 0usize;
        for i in (0..self.dim).rev() {
            f = f * self.shape[i] + c[i] as usize;
        }
        f
    }

    fn max_ring(&self) -> usize {
        self.shape.iter().cloned().max().unwrap_or(1)
    }

    /// Visits every point in cells at Chebyshev cell distance exactly `r` from `center`.
    fn for_each_in_ring(&self, center: &[isize], r: usize, mut f: impl FnMut(usize)) {
        let r = r as isize;
        let lo: Vec<isize> = (0..self.dim).map(|i| (center[i] - r).max(0)).collect();
        let hi: Vec<isize> = (0..self.dim).map(|i| (center[i] + r).min(self.shape[i] as isize - 1)).collect();
        if (0..self.dim).any(|i| lo[i] > hi[i]) {
            return;
        }
        let mut c = lo.clone();
        loop {
            let cheb = (0..self.dim).map(|i| (c[i] - center[i]).abs()).max().unwrap_or(0);
            if cheb == r {
                let fi = self.flat(&c);
                for &it in &self.items[self.starts[fi] as usize..self.starts[fi + 1] as usize] {
                    f(it as usize);
                }
            }
            // odometer increment
            let mut i = 0;
            loop {
                if i == self.dim {
                    return;
                }
                if c[i] < hi[i] {
                    c[i] += 1;
                    break;
                }
                c[i] = lo[i];
                i += 1;
            }
        }
    }

    /// Visits every point whose cell meets the axis box `[lo, hi]`.
    fn for_each_in_box(&self, lo: &[f64], hi: &[f64], mut f: impl FnMut(usize)) {
        let a = self.cell_of(lo);
        let b = self.cell_of(hi);
        let mut c = a.clone();
        loop {
            let fi = self.flat(&c);
            for &it in &self.items[self.starts[fi] as usize..self.starts[fi + 1] as usize] {
                f(it as usize);
            }
            let mut i = 0;
            loop {
                if i == self.dim {
                    return;
                }
                if c[i] < b[i] {
                    c[i] += 1;
                    break;
                }
                c[i] = a[i];
                i += 1;
            }
        }
    }

    /// Ring-expanding k-nearest search with the lexicographic tie rule.
    pub(crate) fn knn(&self, config: &PointConfig, x: usize, k: usize) -> Vec<(f64, usize)> {
        let p = config.point(x);
        let center = self.cell_of(p);
        let mut best: Vec<(f64, usize)> = Vec::with_capacity(k + 1);
        for r in 0..=self.max_ring() {
            self.for_each_in_ring(&center, r, |j| {
                if j != x {
                    push_top_k(config, &mut best, k, (dist2(p, config.point(j)), j));
                }
            });
            // anything not yet visited lies at distance >= r * cell
            let bound = r as f64 * self.cell;
            if best.len() == k && best[k - 1].0 < bound * bound {
                break;
            }
        }
        best
    }
}

/// Number of angular sectors used to prune β-skeleton candidates: the sector
/// half-angle must stay below arccos(1/β) for the nearest point of a sector to
/// block every farther point of it.
fn sector_count(beta: f64) -> Option<usize> {
    let tau = (1.0 / beta).acos();
    if tau < 0.05 {
        return None;
    }
    Some(((PI / (0.9 * tau)).ceil() as usize).max(8))
}

fn beta_skeleton_indexed(config: &PointConfig, beta: f64) -> Vec<Vec<usize>> {
    let n = config.len();
    let grid = SpatialGrid::new(config, 2.0);
    let mut lists = vec![Vec::new(); n];
    let lens_empty = |i: usize, j: usize| -> bool {
        let lens = pair_lens(config, i, j, beta);
        let bb = lens.bounding_box();
        let mut blocked = false;
        grid.for_each_in_box(&bb.lower, &bb.upper, |l| {
            if !blocked && l != i && l != j && lens.contains_open(config.point(l)) {
                blocked = true;
            }
        });
        !blocked
    };
    let Some(sectors) = sector_count(beta) else {
        // near-Gabriel: no sector pruning, test every pair
        for i in 0..n {
            for j in i + 1..n {
                if lens_empty(i, j) {
                    lists[i].push(j);
                    lists[j].push(i);
                }
            }
        }
        return lists;
    };
    let step = 2.0 * PI / sectors as f64;
    let mut candidates: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let p = config.point(i);
        let center = grid.cell_of(p);
        let mut best: Vec<Option<(f64, usize)>> = vec![None; sectors];
        for r in 0..=grid.max_ring() {
            grid.for_each_in_ring(&center, r, |j| {
                if j == i {
                    return;
                }
                let q = config.point(j);
                let theta = (q[1] - p[1]).atan2(q[0] - p[0]) - DEFAULT_CONE_OFFSET;
                let s = ((theta.rem_euclid(2.0 * PI)) / step) as usize % sectors;
                let cand = (dist2(p, q), j);
                let better = match best[s] {
                    None => true,
                    Some(b) => knn_key_cmp(config, cand, b) == Ordering::Less,
                };
                if better {
                    best[s] = Some(cand);
                }
            });
            let bound = r as f64 * grid.cell;
            if best.iter().all(|b| matches!(b, Some((d2, _)) if *d2 < bound * bound)) {
                break;
            }
        }
        candidates[i] = best.into_iter().flatten().map(|(_, j)| j).collect();
    }
    let mut pairs: Vec<(usize, usize)> = candidates
        .iter()
        .enumerate()
        .flat_map(|(i, c)| c.iter().map(move |&j| (i.min(j), i.max(j))))
        .collect();
    pairs.sort_unstable();
    pairs.dedup();
    for (i, j) in pairs {
        if lens_empty(i, j) {
            lists[i].push(j);
            lists[j].push(i);
        }
    }
    lists
}
