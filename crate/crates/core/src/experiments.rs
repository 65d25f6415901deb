//! Tail-probability Monte Carlo for H_n, condensation statistics of the
//! conditioned samples, large-score census and rate-curve assembly.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Beta, ContinuousCDF};

use crate::error::{Error, Result};
use crate::geometry::AxisBox;
use crate::graphs::{build_adjacency_owned, GraphModel};
use crate::point_process::sample_poisson;
use crate::rng::Seed;
use crate::scores::{top_m, ScoreTable, ScoreVariant};

pub const SCHEMA_VERSION: u32 = 1;
pub const HIT_TOP: usize = 8;
pub const MAX_STORED_HITS: usize = 100_000;

/// Replica layout: Poisson(1) on the cube of side n + 2·margin, scores
/// summed over the centered window Q_n of side n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailSpec {
    pub model: GraphModel,
    pub variant: ScoreVariant,
    pub n: f64,
    pub margin: f64,
    pub samples: u64,
    pub seed: Seed,
}

impl TailSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.variant.alpha > self.model.dim as f64) {
            return Err(Error::Precondition(format!("alpha = {} must exceed d = {}", self.variant.alpha, self.model.dim)));
        }
        if !(self.n > 0.0) || !(self.margin >= 0.0) || self.samples == 0 {
            return Err(Error::Domain("need n > 0, margin >= 0, samples >= 1".into()));
        }
        Ok(())
    }

    pub fn window(&self) -> AxisBox {
        AxisBox::centered_cube(self.model.dim, self.n)
    }

    fn sampling_box(&self) -> AxisBox {
        AxisBox::centered_cube(self.model.dim, self.n + 2.0 * self.margin)
    }

    /// Score table of the window in replica `i`.
    pub fn replica_table(&self, i: u64) -> Result<ScoreTable> {
        let cfg = sample_poisson(&self.sampling_box(), 1.0, self.seed.child(i))?;
        let adj = build_adjacency_owned(cfg, &self.model)?;
        Ok(ScoreTable::new(&adj, &self.window(), &self.variant))
    }

    fn norm(&self) -> f64 {
        self.n.powi(self.model.dim as i32)
    }
}

/// H_n of every replica, in replica order.
pub fn simulate_hn(spec: &TailSpec) -> Result<Vec<f64>> {
    spec.validate()?;
    let norm = spec.norm();
    (0..spec.samples).into_par_iter().map(|i| Ok(spec.replica_table(i)?.total() / norm)).collect()
}

/// Sample mean and its standard error, summed in replica order.
pub fn mean_and_se(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
    (mean, (var / n).sqrt())
}

/// Excess r such that about `target_p` of the replicas satisfy H_n > μ + r:
/// midpoint between the two order statistics straddling the target.
pub fn tune_r(hn: &[f64], mu: f64, target_p: f64) -> Result<f64> {
    if !(target_p > 0.0 && target_p < 1.0) || hn.len() < 2 {
        return Err(Error::Domain("target probability in (0,1) and >= 2 replicas required".into()));
    }
    let mut s = hn.to_vec();
    s.sort_unstable_by(|a, b| b.total_cmp(a));
    let k = ((target_p * s.len() as f64).round() as usize).clamp(1, s.len() - 1);
    Ok(0.5 * (s[k - 1] + s[k]) - mu)
}

/// Exact binomial 95% interval; one-sided upper bound when there are no hits.
pub fn clopper_pearson(hits: u64, samples: u64) -> (f64, f64) {
    let (x, n) = (hits as f64, samples as f64);
    if hits == 0 {
        return (0.0, 1.0 - 0.05f64.powf(1.0 / n));
    }
    let lo = Beta::new(x, n - x + 1.0).map(|b| b.inverse_cdf(0.025)).unwrap_or(0.0);
    let hi = if hits == samples { 1.0 } else { Beta::new(x + 1.0, n - x).map(|b| b.inverse_cdf(0.975)).unwrap_or(1.0) };
    (lo, hi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRunRecord {
    pub schema_version: u32,
    pub model: String,
    pub graph: GraphModel,
    pub variant: ScoreVariant,
    pub d: usize,
    pub alpha: f64,
    pub n: f64,
    pub margin: f64,
    pub r: f64,
    pub mu_used: f64,
    pub mu_used_std_error: f64,
    pub mu_asymptotic: Option<f64>,
    pub samples: u64,
    pub hits: u64,
    pub p_hat: f64,
    pub ci95: (f64, f64),
    pub seed: Seed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HitPayload {
    pub replica: u64,
    pub h_n: f64,
    pub scores: Vec<f64>,
}

impl HitPayload {
    pub fn top(&self, m: usize) -> Vec<f64> {
        top_m(&self.scores, m)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailRun {
    pub record: TailRunRecord,
    pub hits: Vec<HitPayload>,
}

impl TailRun {
    /// `replica,H_n,Z1..Z8`.
    pub fn hits_csv(&self) -> String {
        let mut s = String::from("replica,H_n");
        for i in 1..=HIT_TOP {
            let _ = write!(s, ",Z{i}");
        }
        s.push('\n');
        for h in &self.hits {
            let _ = write!(s, "{},{:.16e}", h.replica, h.h_n);
            for z in h.top(HIT_TOP) {
                let _ = write!(s, ",{z:.16e}");
            }
            s.push('\n');
        }
        s
    }
}

/// Builds the record for one r from precomputed H_n values.
pub fn record_from_hn(spec: &TailSpec, hn: &[f64], mu_used: f64, mu_se: f64, mu_asymptotic: Option<f64>, r: f64) -> TailRunRecord {
    let threshold = mu_used + r;
    let hits = hn.iter().filter(|&&h| h > threshold).count() as u64;
    let samples = hn.len() as u64;
    TailRunRecord {
        schema_version: SCHEMA_VERSION,
        model: spec.model.label(),
        graph: spec.model,
        variant: spec.variant,
        d: spec.model.dim,
        alpha: spec.variant.alpha,
        n: spec.n,
        margin: spec.margin,
        r,
        mu_used,
        mu_used_std_error: mu_se,
        mu_asymptotic,
        samples,
        hits,
        p_hat: hits as f64 / samples as f64,
        ci95: clopper_pearson(hits, samples),
        seed: spec.seed,
    }
}

/// Regenerates the hit replicas (first `MAX_STORED_HITS`) and keeps their window scores.
pub fn collect_hits(spec: &TailSpec, hn: &[f64], threshold: f64) -> Result<Vec<HitPayload>> {
    let idx: Vec<u64> = (0..hn.len() as u64).filter(|&i| hn[i as usize] > threshold).take(MAX_STORED_HITS).collect();
    idx.par_iter()
        .map(|&i| Ok(HitPayload { replica: i, h_n: hn[i as usize], scores: spec.replica_table(i)?.scores }))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum MuChoice {
    /// Mean of H_n over the same replicas.
    Windowed,
    Given(f64),
}

/// P(H_n > μ + r) by direct simulation.
pub fn tail_probability(spec: &TailSpec, r: f64, mu: MuChoice, mu_asymptotic: Option<f64>) -> Result<TailRun> {
    let hn = simulate_hn(spec)?;
    let (mu_used, se) = match mu {
        MuChoice::Windowed => mean_and_se(&hn),
        MuChoice::Given(v) => (v, 0.0),
    };
    let record = record_from_hn(spec, &hn, mu_used, se, mu_asymptotic, r);
    let hits = collect_hits(spec, &hn, mu_used + r)?;
    Ok(TailRun { record, hits })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CondensationSummary {
    pub m: usize,
    pub fractions: Vec<f64>,
    pub quantiles: (f64, f64, f64),
}

/// Empirical quantile with linear interpolation.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut s = values.to_vec();
    s.sort_unstable_by(f64::total_cmp);
    let pos = q.clamp(0.0, 1.0) * (s.len() - 1) as f64;
    let (i, frac) = (pos.floor() as usize, pos.fract());
    if i + 1 < s.len() {
        s[i] + frac * (s[i + 1] - s[i])
    } else {
        s[i]
    }
}

/// Σ_{i≤m} Z^(i) / (r n^d) for every stored hit.
pub fn condensation_stats(record: &TailRunRecord, hits: &[HitPayload], m_list: &[usize]) -> Result<Vec<CondensationSummary>> {
    if !(record.r > 0.0) {
        return Err(Error::Domain(format!("condensation statistic needs r > 0, got {}", record.r)));
    }
    if hits.is_empty() {
        return Ok(Vec::new());
    }
    let denom = record.r * record.n.powi(record.d as i32);
    Ok(m_list
        .iter()
        .map(|&m| {
            let fractions: Vec<f64> = hits.iter().map(|h| h.top(m).iter().sum::<f64>() / denom).collect();
            let quantiles = (quantile(&fractions, 0.1), quantile(&fractions, 0.5), quantile(&fractions, 0.9));
            CondensationSummary { m, fractions, quantiles }
        })
        .collect())
}

/// Number of window nodes with score ≥ threshold.
pub fn large_score_census(table: &ScoreTable, threshold: f64) -> Result<usize> {
    if !(threshold > 0.0) {
        return Err(Error::Domain(format!("census threshold must be positive, got {threshold}")));
    }
    Ok(table.scores.iter().filter(|&&s| s >= threshold).count())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateCurveRow {
    pub r: f64,
    /// −log p̂ / n^{d²/α}; `None` with fewer than `MIN_RATE_HITS` hits.
    pub empirical: Option<f64>,
    pub theoretical: f64,
    pub n: f64,
    pub hits: u64,
}

pub const MIN_RATE_HITS: u64 = 10;

pub fn rate_curve(records: &[TailRunRecord], inf_a: f64) -> Result<Vec<RateCurveRow>> {
    let Some(first) = records.first() else {
        return Ok(Vec::new());
    };
    for rec in records {
        if rec.model != first.model || rec.variant != first.variant || rec.d != first.d || rec.n != first.n {
            return Err(Error::Precondition("rate-curve records must share model, variant, d, alpha and n".into()));
        }
    }
    let mut rows: Vec<RateCurveRow> = records
        .iter()
        .map(|rec| {
            let d = rec.d as f64;
            let speed = rec.n.powf(d * d / rec.alpha);
            let theoretical = crate::optimizer::rate_function(inf_a, rec.r, rec.d, rec.alpha)?;
            Ok(RateCurveRow {
                r: rec.r,
                empirical: (rec.hits >= MIN_RATE_HITS).then(|| -rec.p_hat.ln() / speed),
                theoretical,
                n: rec.n,
                hits: rec.hits,
            })
        })
        .collect::<Result<_>>()?;
    rows.sort_by(|a, b| a.r.total_cmp(&b.r));
    Ok(rows)
}

/// `r,empirical,theoretical,hits`; unusable rows leave `empirical` empty.
pub fn rate_curve_csv(rows: &[RateCurveRow]) -> String {
    let mut s = String::from("r,empirical,theoretical,hits\n");
    for row in rows {
        let emp = row.empirical.map(|v| format!("{v:.16e}")).unwrap_or_default();
        let _ = writeln!(s, "{:.16e},{emp},{:.16e},{}", row.r, row.theoretical, row.hits);
    }
    s
}

pub fn rate_curve_gnuplot(csv_name: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set key top left\n\
         set xlabel 'r'\n\
         set ylabel 'rate'\n\
         set logscale x\n\
         plot '{csv_name}' using 1:2 skip 1 with linespoints title 'empirical', \\\n     \
         '{csv_name}' using 1:3 skip 1 with lines title 'theoretical'\n"
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_spec(samples: u64) -> TailSpec {
        TailSpec { model: GraphModel::nng(2), variant: ScoreVariant::dir(15.0), n: 4.0, margin: 3.0, samples, seed: Seed::new(3) }
    }

    #[test]
    fn clopper_pearson_values() {
        let (lo, hi) = clopper_pearson(0, 100);
        assert_eq!(lo, 0.0);
        assert!((hi - (1.0 - 0.05f64.powf(0.01))).abs() < 1e-15);
        // reference values for 10 of 100
        let (lo, hi) = clopper_pearson(10, 100);
        assert!((lo - 0.04900).abs() < 1e-4 && (hi - 0.17622).abs() < 1e-4, "{lo} {hi}");
        let (lo, hi) = clopper_pearson(150, 1_000_000);
        assert!(lo < 1.5e-4 && hi > 1.5e-4 && lo > 1.2e-4 && hi < 1.8e-4);
    }

    #[test]
    fn tail_extremes() {
        let spec = small_spec(200);
        let huge = tail_probability(&spec, 1e12, MuChoice::Windowed, None).unwrap();
        assert_eq!(huge.record.hits, 0);
        assert_eq!(huge.record.p_hat, 0.0);
        let hn = simulate_hn(&spec).unwrap();
        let (mu, se) = mean_and_se(&hn);
        let all = record_from_hn(&spec, &hn, mu, se, None, -mu);
        assert!(all.p_hat > 0.99);
    }

    #[test]
    fn condensation_synthetic() {
        let spec = small_spec(1);
        let hn = [0.0];
        let mut rec = record_from_hn(&spec, &hn, 0.0, 0.0, None, 2.0);
        rec.r = 2.0;
        let denom = 2.0 * 16.0;
        let hit = HitPayload { replica: 0, h_n: 0.0, scores: vec![denom, 0.0, 0.0] };
        let s = condensation_stats(&rec, &[hit], &[1]).unwrap();
        assert_eq!(s[0].fractions, vec![1.0]);
        assert!(condensation_stats(&rec, &[], &[1]).unwrap().is_empty());
    }

    #[test]
    fn census_matches_order_statistics() {
        let spec = small_spec(1);
        let t = spec.replica_table(0).unwrap();
        let z = crate::scores::order_statistics(&t, t.scores.len());
        for thr in [1e-9, 0.1, 1.0, 5.0] {
            assert_eq!(large_score_census(&t, thr).unwrap(), z.iter().filter(|&&v| v >= thr).count());
        }
        assert_eq!(large_score_census(&t, 1e300).unwrap(), 0);
        assert!(large_score_census(&t, 0.0).is_err());
    }

    #[test]
    fn rate_curve_rows() {
        let spec = small_spec(1);
        let mut a = record_from_hn(&spec, &[1.0; 100], 0.0, 0.0, None, 1.0);
        a.hits = 20;
        a.p_hat = 0.2;
        let mut b = a.clone();
        b.r = 2.0;
        b.hits = 3;
        let rows = rate_curve(&[b, a], std::f64::consts::PI).unwrap();
        assert!((rows[0].theoretical - std::f64::consts::PI).abs() < 1e-12);
        assert!((rows[1].theoretical / rows[0].theoretical - 2f64.powf(2.0 / 15.0)).abs() < 1e-12);
        assert!(rows[0].empirical.is_some() && rows[1].empirical.is_none());
        assert!(rate_curve_csv(&rows).starts_with("r,empirical,theoretical,hits\n"));
    }

    #[test]
    fn tuned_r_hits_target() {
        let hn: Vec<f64> = (0..1000).map(|i| i as f64).collect();
        let r = tune_r(&hn, 0.0, 0.01).unwrap();
        assert_eq!(hn.iter().filter(|&&h| h > r).count(), 10);
    }
}
