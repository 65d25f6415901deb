//! Minimization of the influence-zone volume over admissible pairs.
//!
//! The constraint Σ_{x∈φ} ξ(ψ−x) ≥ 1 is removed by scale invariance: every
//! candidate is rescaled so the sum equals one, and the volume is evaluated
//! on the rescaled pair. The search is simulated annealing over the point
//! set ψ and the φ mask.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::conditions::{jitter_stable, positivity_floor};
use crate::error::{Error, Result};
use crate::geometry::{disk_union_area, dist2, region_volume_mc, VolumeEstimate};
use crate::graphs::{GraphModel, ModelKind};
use crate::influence::{
    ball_union_quadrature, ball_union_volume, influence_volume, planar_disks, zone_quadrature, ConfigPair, InfluenceMethod, InfluenceZone,
};
use crate::point_process::PointConfig;
use crate::rng::Seed;
use crate::scores::{score_unchecked, top_m, ScoreVariant};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    /// |A(φ,ψ)| by the full definition.
    Literal,
    /// |∪_{x∈φ} B_{D_1(ψ−x)}(x)|, nearest-neighbor graph only.
    NngReduced,
}

impl std::str::FromStr for Objective {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "literal" => Ok(Objective::Literal),
            "nng-reduced" | "nng_reduced" => Ok(Objective::NngReduced),
            _ => Err(Error::Parse(format!("unknown objective {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PhiPolicy {
    Free,
    Forced(usize),
}

/// Only candidates with Σ_{i≤m0} Z^(i)(φ,ψ) < 1 − δ are admitted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TopRestriction {
    pub m0: usize,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnealParams {
    pub restarts: usize,
    pub steps_per_restart: u64,
    /// Temperature on the relative volume change.
    pub initial_temp: f64,
    pub cooling: f64,
    /// Probabilities of jitter, add_satellite, remove_point, toggle_phi.
    pub move_mix: [f64; 4],
    pub jitter_scale: f64,
    pub m_max: usize,
    pub seed: Seed,
    pub phi_policy: PhiPolicy,
    pub restriction: Option<TopRestriction>,
    /// Quadrature tolerance while annealing; planar objectives are then
    /// evaluated exactly and this only marks the coarse phase.
    pub coarse_rel_tol: f64,
    /// Quadrature tolerance of the final re-evaluation (d = 2).
    pub final_rel_tol: f64,
    /// Absolute jitter used by the degeneracy probe.
    pub probe_delta: f64,
}

impl AnnealParams {
    pub fn new(seed: Seed) -> Self {
        AnnealParams {
            restarts: 32,
            steps_per_restart: 20_000,
            initial_temp: 0.05,
            cooling: 0.9995,
            move_mix: [0.55, 0.2, 0.15, 0.1],
            jitter_scale: 0.05,
            m_max: 6,
            seed,
            phi_policy: PhiPolicy::Free,
            restriction: None,
            coarse_rel_tol: 1e-2,
            final_rel_tol: 1e-4,
            probe_delta: 1e-7,
        }
    }

    pub fn validate(&self, model: &GraphModel) -> Result<()> {
        let total: f64 = self.move_mix.iter().sum();
        if self.move_mix.iter().any(|p| *p < 0.0) || (total - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!("move probabilities must be nonnegative and sum to 1, got {:?}", self.move_mix)));
        }
        if self.m_max < model.c_inf() {
            return Err(Error::Domain(format!("m_max = {} below c_INF = {}", self.m_max, model.c_inf())));
        }
        if let PhiPolicy::Forced(m) = self.phi_policy {
            if m == 0 || m > self.m_max {
                return Err(Error::Domain(format!("forced phi size {m} outside 1..={}", self.m_max)));
            }
        }
        if self.restarts == 0 || !(self.cooling > 0.0 && self.cooling <= 1.0) || !(self.initial_temp >= 0.0) {
            return Err(Error::Domain("restarts >= 1, cooling in (0,1], temperature >= 0 required".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub pair: ConfigPair,
    pub normalized_volume: f64,
    pub score_sum: f64,
    pub volume: VolumeEstimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptResult {
    pub objective: Objective,
    pub model: GraphModel,
    pub variant: ScoreVariant,
    pub best_volume: f64,
    pub best_bracket: Option<(f64, f64)>,
    pub best_points: Vec<Vec<f64>>,
    pub phi_mask: Vec<bool>,
    pub best: Candidate,
    pub trace_downsampled: Vec<(u64, f64)>,
    pub per_restart_best: Vec<f64>,
    pub evaluated: u64,
    pub min_evaluated_volume: f64,
    pub positivity_floor: f64,
    pub floor_violations: u64,
    pub params: AnnealParams,
    pub seed: Seed,
}

/// Rescales ψ by t = (Σξ)^{-1/α}; returns the scaled pair and t.
pub fn normalized(pair: &ConfigPair) -> Result<(ConfigPair, f64)> {
    let s = pair.score_sum();
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::Infeasible(format!("score sum {s} cannot be normalized")));
    }
    let t = s.powf(-1.0 / pair.variant.alpha);
    if t == 1.0 {
        return Ok((pair.clone(), 1.0));
    }
    Ok((pair.scaled(t), t))
}

/// Normalized candidate with its literal volume (automatic method).
pub fn normalize_pair(pair: &ConfigPair) -> Result<Candidate> {
    let (p, _) = normalized(pair)?;
    let est = influence_volume(&p, InfluenceMethod::Auto)?;
    Ok(Candidate { score_sum: p.score_sum(), normalized_volume: est.volume.value, volume: est.volume, pair: p })
}

const PROBE_TRIALS: u64 = 16;
const ANNEAL_PROBE_TRIALS: u64 = 4;
/// Candidates with a coordinate beyond this (after normalization) are dropped.
const MAX_COORD: f64 = 1e6;
const PROBE_SEED: u64 = 0x5eed_0bad;

/// Cardinality, score sum ≥ 1 and jitter robustness at `probe_delta`.
pub fn admissible(phi: &[usize], psi: &PointConfig, model: &GraphModel, variant: &ScoreVariant, probe_delta: f64) -> bool {
    let Ok(pair) = ConfigPair::new(phi.to_vec(), psi.clone(), *model, *variant) else {
        return false;
    };
    pair.score_sum() >= 1.0 && jitter_stable(psi, model, probe_delta, PROBE_TRIALS, Seed::new(PROBE_SEED)).unwrap_or(false)
}

pub fn rate_function(inf_a: f64, r: f64, d: usize, alpha: f64) -> Result<f64> {
    if !(inf_a >= 0.0) || !(r > 0.0) {
        return Err(Error::Domain(format!("need inf_A >= 0 and r > 0, got {inf_a}, {r}")));
    }
    Ok(inf_a * r.powf(d as f64 / alpha))
}

/// φ-node scores of a normalized pair, largest first.
fn phi_scores(pair: &ConfigPair) -> Vec<f64> {
    let adj = pair.adjacency();
    let s: Vec<f64> = pair.phi.iter().map(|&x| score_unchecked(&adj, x, &pair.variant)).collect();
    top_m(&s, s.len())
}

struct Evaluator<'a> {
    model: GraphModel,
    variant: ScoreVariant,
    objective: Objective,
    params: &'a AnnealParams,
}

#[derive(Clone)]
struct State {
    points: Vec<Vec<f64>>,
    phi: Vec<bool>,
}

struct Evaluated {
    pair: ConfigPair,
    volume: VolumeEstimate,
}

impl Evaluator<'_> {
    /// Objective value. While annealing (`rel_tol` above the final tolerance)
    /// planar zones use the exact disk-union area; the final re-evaluation
    /// uses quadrature so the winner carries a bracket.
    fn volume(&self, pair: &ConfigPair, rel_tol: f64, mc: Option<(u64, Seed)>) -> Result<VolumeEstimate> {
        let d = self.model.dim;
        let exact = rel_tol > self.params.final_rel_tol;
        match self.objective {
            Objective::NngReduced => {
                let adj = pair.adjacency();
                let balls = pair
                    .phi
                    .iter()
                    .map(|&x| {
                        let p = pair.psi.point(x);
                        (p.to_vec(), dist2(p, pair.psi.point(adj.out(x)[0])).sqrt())
                    })
                    .collect::<Vec<_>>();
                if d == 2 && balls.len() > 1 {
                    if exact {
                        Ok(VolumeEstimate::closed_form(disk_union_area(&planar_disks(&balls))))
                    } else {
                        ball_union_quadrature(balls, rel_tol)
                    }
                } else {
                    ball_union_volume(d, balls)
                }
            }
            Objective::Literal => {
                let zone = InfluenceZone::new(pair);
                match (d, mc) {
                    (2, _) if exact => Ok(VolumeEstimate::closed_form(zone.exact_area().expect("planar"))),
                    (2, _) => zone_quadrature(&zone, rel_tol),
                    (1, _) if matches!(self.model.kind, ModelKind::Knn { .. }) => {
                        Ok(influence_volume(pair, InfluenceMethod::Auto)?.volume)
                    }
                    (_, Some((samples, seed))) => region_volume_mc(&zone, samples, seed),
                    _ => Ok(influence_volume(pair, InfluenceMethod::Auto)?.volume),
                }
            }
        }
    }

    /// Builds, validates and normalizes a state; `None` when inadmissible.
    fn evaluate(&self, s: &State, rel_tol: f64, mc: Option<(u64, Seed)>) -> Option<Evaluated> {
        let fine = rel_tol <= self.params.final_rel_tol;
        // translation invariance: center on φ so the protected region stays near the origin
        let d = self.model.dim;
        let m = s.phi.iter().filter(|&&b| b).count().max(1) as f64;
        let shift: Vec<f64> =
            (0..d).map(|i| -s.points.iter().zip(&s.phi).filter(|(_, &f)| f).map(|(p, _)| p[i]).sum::<f64>() / m).collect();
        let psi = PointConfig::from_points(d, &s.points).ok()?.translated(&shift);
        let phi: Vec<usize> = (0..s.phi.len()).filter(|&i| s.phi[i]).collect();
        let pair = ConfigPair::new(phi, psi, self.model, self.variant).ok()?;
        let (pair, _) = normalized(&pair).ok()?;
        if pair.psi.coords().iter().any(|c| c.abs() > MAX_COORD) {
            return None;
        }
        if let Some(TopRestriction { m0, delta }) = self.params.restriction {
            let z = phi_scores(&pair);
            if z.iter().take(m0).sum::<f64>() >= 1.0 - delta {
                return None;
            }
        }
        let trials = if fine { PROBE_TRIALS } else { ANNEAL_PROBE_TRIALS };
        if !jitter_stable(&pair.psi, &self.model, self.params.probe_delta, trials, Seed::new(PROBE_SEED)).ok()? {
            return None;
        }
        let volume = self.volume(&pair, rel_tol, mc).ok()?;
        (volume.value.is_finite() && volume.value > 0.0).then_some(Evaluated { pair, volume })
    }
}

fn state_of(pair: &ConfigPair) -> State {
    let mut phi = vec![false; pair.psi.len()];
    for &i in &pair.phi {
        phi[i] = true;
    }
    State { points: pair.psi.points().map(|p| p.to_vec()).collect(), phi }
}

fn random_state(model: &GraphModel, params: &AnnealParams, rng: &mut ChaCha8Rng) -> State {
    let d = model.dim;
    let lo = model.c_inf().max(match params.phi_policy {
        PhiPolicy::Forced(m) => m,
        PhiPolicy::Free => 1,
    });
    let hi = params.m_max.min(lo + 2).max(lo);
    let m = rng.random_range(lo..=hi);
    let points: Vec<Vec<f64>> = (0..m).map(|_| (0..d).map(|_| rng.random::<f64>() * 2.0 - 1.0).collect()).collect();
    let phi = match params.phi_policy {
        PhiPolicy::Forced(k) => (0..m).map(|i| i < k).collect(),
        PhiPolicy::Free => (0..m).map(|i| i == 0 || rng.random::<f64>() < 0.3).collect(),
    };
    State { points, phi }
}

/// One proposal; `None` when the move does not apply to this state.
fn propose(s: &State, model: &GraphModel, params: &AnnealParams, rng: &mut ChaCha8Rng) -> Option<State> {
    let d = model.dim;
    let mut u = rng.random::<f64>();
    let mut kind = 0;
    while kind < 3 && u >= params.move_mix[kind] {
        u -= params.move_mix[kind];
        kind += 1;
    }
    let mut next = s.clone();
    let m = s.points.len();
    match kind {
        0 => {
            let i = rng.random_range(0..m);
            let scale = params.jitter_scale * 10f64.powf(-2.0 * rng.random::<f64>());
            for v in next.points[i].iter_mut() {
                let g: f64 = StandardNormal.sample(rng);
                *v += scale * g;
            }
        }
        1 => {
            if m >= params.m_max {
                return None;
            }
            let i = rng.random_range(0..m);
            let nn = (0..m).filter(|&j| j != i).map(|j| dist2(&s.points[i], &s.points[j])).fold(f64::INFINITY, f64::min).sqrt();
            let nn = if nn.is_finite() { nn } else { 1.0 };
            let rho = nn * 10f64.powf(-1.0 - 2.0 * rng.random::<f64>());
            let dir: Vec<f64> = (0..d).map(|_| StandardNormal.sample(rng)).collect();
            let norm = dir.iter().map(|v: &f64| v * v).sum::<f64>().sqrt().max(1e-300);
            next.points.push(s.points[i].iter().zip(&dir).map(|(c, g)| c + rho * g / norm).collect());
            next.phi.push(false);
        }
        2 => {
            let free: Vec<usize> = (0..m).filter(|&i| !s.phi[i]).collect();
            if free.is_empty() || m <= model.c_inf() {
                return None;
            }
            let i = free[rng.random_range(0..free.len())];
            next.points.remove(i);
            next.phi.remove(i);
        }
        _ => match params.phi_policy {
            PhiPolicy::Free => {
                let i = rng.random_range(0..m);
                next.phi[i] = !next.phi[i];
                if !next.phi.iter().any(|&b| b) {
                    return None;
                }
            }
            PhiPolicy::Forced(_) => {
                let ins: Vec<usize> = (0..m).filter(|&i| s.phi[i]).collect();
                let outs: Vec<usize> = (0..m).filter(|&i| !s.phi[i]).collect();
                if ins.is_empty() || outs.is_empty() {
                    return None;
                }
                next.phi[ins[rng.random_range(0..ins.len())]] = false;
                next.phi[outs[rng.random_range(0..outs.len())]] = true;
            }
        },
    }
    Some(next)
}

struct RestartOutcome {
    best: State,
    best_volume: f64,
    trace: Vec<f64>,
    evaluated: u64,
    min_volume: f64,
}

const INIT_ATTEMPTS: usize = 1000;
const TRACE_POINTS: u64 = 200;
const MC_COARSE: u64 = 1 << 14;
const MC_FINE: u64 = 1 << 20;

fn run_restart(ev: &Evaluator<'_>, seed: Seed) -> Result<RestartOutcome> {
    let params = ev.params;
    let mut rng = seed.rng();
    let crn = Some((MC_COARSE, seed.fork(7)));
    let mut evaluated = 0u64;
    let mut min_volume = f64::INFINITY;
    let mut init = None;
    for _ in 0..INIT_ATTEMPTS {
        let s = random_state(&ev.model, params, &mut rng);
        evaluated += 1;
        if let Some(e) = ev.evaluate(&s, params.coarse_rel_tol, crn) {
            min_volume = min_volume.min(e.volume.value);
            init = Some((state_of(&e.pair), e.volume.value));
            break;
        }
    }
    let (mut cur, mut cur_v) =
        init.ok_or_else(|| Error::Infeasible(format!("no admissible initial candidate in {INIT_ATTEMPTS} attempts")))?;
    let (mut best, mut best_v) = (cur.clone(), cur_v);
    let stride = (params.steps_per_restart / TRACE_POINTS).max(1);
    let mut trace = Vec::with_capacity(TRACE_POINTS as usize + 1);
    let mut temp = params.initial_temp;
    for step in 0..params.steps_per_restart {
        if let Some(next) = propose(&cur, &ev.model, params, &mut rng) {
            evaluated += 1;
            if let Some(e) = ev.evaluate(&next, params.coarse_rel_tol, crn) {
                let v = e.volume.value;
                min_volume = min_volume.min(v);
                let rel = (v - cur_v) / cur_v.max(1e-300);
                let u: f64 = rng.random();
                if rel <= 0.0 || (temp > 0.0 && u < (-rel / temp).exp()) {
                    cur = state_of(&e.pair);
                    cur_v = v;
                    if v < best_v {
                        best = cur.clone();
                        best_v = v;
                    }
                }
            }
        }
        temp *= params.cooling;
        if step % stride == 0 {
            trace.push(best_v);
        }
    }
    Ok(RestartOutcome { best, best_volume: best_v, trace, evaluated, min_volume })
}

/// Greedy simplification at the fine tolerance: un-mark φ nodes (free φ
/// policy only) and drop non-φ points while the objective does not grow.
fn polish(ev: &Evaluator<'_>, mut s: State, mut v: Evaluated, mc: Option<(u64, Seed)>) -> (State, Evaluated, u64) {
    let mut evaluated = 0;
    loop {
        let m = s.points.len();
        let mut moves: Vec<State> = Vec::new();
        if ev.params.phi_policy == PhiPolicy::Free && s.phi.iter().filter(|&&b| b).count() > 1 {
            for i in (0..m).filter(|&i| s.phi[i]) {
                let mut t = s.clone();
                t.phi[i] = false;
                moves.push(t);
            }
        }
        for i in (0..m).rev().filter(|&i| !s.phi[i]) {
            let mut t = s.clone();
            t.points.remove(i);
            t.phi.remove(i);
            moves.push(t);
        }
        let mut improved = false;
        for t in moves {
            evaluated += 1;
            if let Some(e) = ev.evaluate(&t, ev.params.final_rel_tol, mc) {
                let tol = v.volume.bracket_width().max(1e-9 * v.volume.value);
                if e.volume.value <= v.volume.value + tol {
                    s = state_of(&e.pair);
                    v = e;
                    improved = true;
                    break;
                }
            }
        }
        if !improved {
            return (s, v, evaluated);
        }
    }
}

pub fn optimize_rate(model: &GraphModel, variant: &ScoreVariant, objective: Objective, params: &AnnealParams) -> Result<OptResult> {
    if !(variant.alpha > model.dim as f64) {
        return Err(Error::Precondition(format!("alpha = {} must exceed d = {}", variant.alpha, model.dim)));
    }
    if objective == Objective::NngReduced && !model.is_nng() {
        return Err(Error::Unsupported(format!("nng_reduced objective for {}", model.label())));
    }
    params.validate(model)?;
    let ev = Evaluator { model: *model, variant: *variant, objective, params };
    let outcomes: Vec<Result<RestartOutcome>> =
        (0..params.restarts as u64).into_par_iter().map(|r| run_restart(&ev, params.seed.child(r))).collect();
    let outcomes: Vec<RestartOutcome> = outcomes.into_iter().collect::<Result<_>>()?;

    let mut evaluated: u64 = outcomes.iter().map(|o| o.evaluated).sum();
    let mut min_volume = outcomes.iter().map(|o| o.min_volume).fold(f64::INFINITY, f64::min);
    let per_restart_best: Vec<f64> = outcomes.iter().map(|o| o.best_volume).collect();
    let steps = outcomes.iter().map(|o| o.trace.len()).max().unwrap_or(0);
    let stride = (params.steps_per_restart / TRACE_POINTS).max(1);
    let trace_downsampled: Vec<(u64, f64)> = (0..steps)
        .map(|i| (i as u64 * stride, outcomes.iter().filter_map(|o| o.trace.get(i)).cloned().fold(f64::INFINITY, f64::min)))
        .collect();

    // fine re-evaluation: all restart winners in d = 2, the five best otherwise
    let mut order: Vec<usize> = (0..outcomes.len()).collect();
    order.sort_by(|&a, &b| outcomes[a].best_volume.total_cmp(&outcomes[b].best_volume).then(a.cmp(&b)));
    if model.dim > 2 {
        order.truncate(5);
    }
    let fine_mc = Some((MC_FINE, params.seed.fork(11)));
    let refined: Vec<Option<(State, Evaluated, u64)>> = order
        .par_iter()
        .map(|&i| {
            let o = &outcomes[i];
            ev.evaluate(&o.best, params.final_rel_tol, fine_mc).map(|e| polish(&ev, o.best.clone(), e, fine_mc))
        })
        .collect();
    let mut winner: Option<(State, Evaluated)> = None;
    for (s, e, n) in refined.into_iter().flatten() {
        evaluated += n + 1;
        min_volume = min_volume.min(e.volume.value);
        if winner.as_ref().is_none_or(|(_, w)| e.volume.value < w.volume.value) {
            winner = Some((s, e));
        }
    }
    let (state, best) = winner.ok_or_else(|| Error::Infeasible("no restart produced an admissible candidate".into()))?;
    let floor = positivity_floor(model)?;
    let floor_violations = if min_volume < floor { 1 } else { 0 };
    let candidate = Candidate {
        score_sum: best.pair.score_sum(),
        normalized_volume: best.volume.value,
        volume: best.volume.clone(),
        pair: best.pair,
    };
    Ok(OptResult {
        objective,
        model: *model,
        variant: *variant,
        best_volume: candidate.normalized_volume,
        best_bracket: candidate.volume.bracket,
        best_points: state.points,
        phi_mask: state.phi,
        best: candidate,
        trace_downsampled,
        per_restart_best,
        evaluated,
        min_evaluated_volume: min_volume,
        positivity_floor: floor,
        floor_violations,
        params: params.clone(),
        seed: params.seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn nng_pair(phi: Vec<usize>, pts: &[[f64; 2]]) -> ConfigPair {
        ConfigPair::new(phi, PointConfig::from_points(2, pts).unwrap(), GraphModel::nng(2), ScoreVariant::dir(15.0)).unwrap()
    }

    #[test]
    fn normalization_examples() {
        let p = nng_pair(vec![0], &[[0.0, 0.0], [2.0, 0.0]]);
        assert_eq!(p.score_sum(), 2f64.powi(15));
        let (n, t) = normalized(&p).unwrap();
        assert_eq!(t, 0.5);
        assert_eq!(n.psi.point(1), &[1.0, 0.0]);
        assert_eq!(n.score_sum(), 1.0);
        let (again, t2) = normalized(&n).unwrap();
        assert_eq!(t2, 1.0);
        assert_eq!(again, n);
    }

    #[test]
    fn admissible_examples() {
        let nng = GraphModel::nng(2);
        let sv = ScoreVariant::dir(15.0);
        let two = PointConfig::from_points(2, &[[0.0, 0.0], [1.0, 0.0]]).unwrap();
        assert!(admissible(&[0], &two, &nng, &sv, 1e-7));
        let one = PointConfig::from_points(2, &[[0.0, 0.0]]).unwrap();
        assert!(!admissible(&[0], &one, &nng, &sv, 1e-7));
        let tie = PointConfig::from_points(2, &[[0.0, 0.0], [1.0, 0.0], [-1.0, 0.0]]).unwrap();
        assert!(!admissible(&[0], &tie, &nng, &sv, 1e-7));
    }

    #[test]
    fn rate_function_examples() {
        assert_eq!(rate_function(PI, 1.0, 2, 15.0).unwrap(), PI);
        assert!((rate_function(PI, 2f64.powf(7.5), 2, 15.0).unwrap() - 2.0 * PI).abs() < 1e-12);
        assert_eq!(rate_function(0.0, 3.0, 2, 15.0).unwrap(), 0.0);
        assert!(rate_function(PI, 0.0, 2, 15.0).is_err());
    }

    #[test]
    fn small_reduced_run_reaches_pi() {
        let mut params = AnnealParams::new(Seed::new(3));
        params.restarts = 2;
        params.steps_per_restart = 300;
        let r = optimize_rate(&GraphModel::nng(2), &ScoreVariant::dir(15.0), Objective::NngReduced, &params).unwrap();
        assert!((r.best_volume - PI).abs() < 0.05 * PI, "{}", r.best_volume);
        assert!(r.trace_downsampled.windows(2).all(|w| w[1].1 <= w[0].1));
        assert_eq!(r.floor_violations, 0);
    }

    #[test]
    fn rejects_bad_params() {
        let mut params = AnnealParams::new(Seed::new(3));
        params.move_mix = [0.5, 0.5, 0.5, 0.0];
        assert!(optimize_rate(&GraphModel::nng(2), &ScoreVariant::dir(15.0), Objective::Literal, &params).is_err());
        let params = AnnealParams::new(Seed::new(3));
        assert!(optimize_rate(&GraphModel::nng(2), &ScoreVariant::dir(1.5), Objective::Literal, &params).is_err());
    }
}
