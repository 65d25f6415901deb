//! Command-line front end.
//!
//! Every parameter can come from a flag or from a JSON object given with
//! `--config`; flags win, then the file, then built-in defaults. The merged
//! parameters (minus `workers`, which never changes results) are written
//! next to or into every artifact.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::conditions::{check_fin, check_fin2, check_inf, check_scale, check_sta, continuity_probe, ConditionKind};
use crate::error::Error;
use crate::experiments::{
    collect_hits, condensation_stats, mean_and_se, rate_curve, rate_curve_csv, rate_curve_gnuplot, record_from_hn, simulate_hn,
    tune_r, HitPayload, TailRun, TailRunRecord, TailSpec, HIT_TOP,
};
use crate::geometry::{cone_cover, AxisBox, DEFAULT_CONE_HALF_ANGLE, DEFAULT_CONE_OFFSET};
use crate::graphs::{build_adjacency, GraphModel};
use crate::optimizer::{optimize_rate, AnnealParams, Objective, PhiPolicy};
use crate::point_process::{sample_poisson, PointConfig};
use crate::rng::Seed;
use crate::scores::{estimate_mu, functional_hn, nng_mu_closed_form, ScoreTable, ScoreVariant, Variant};

#[derive(Parser, Debug)]
#[command(name = "condensate", version, about = "Spatial random networks and upper tails of edge-length functionals")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Poisson sample on the cube of side n + 2·margin.
    Sample(Params),
    /// Edge list of a point file.
    Graph(Params),
    /// Per-node scores and H_n of a point file.
    Score(Params),
    /// Monte Carlo estimate of the Palm mean μ_α.
    Mu(Params),
    /// Tail probability P(H_n > μ + r).
    Tail(Params),
    /// Condensation statistics of a tail run.
    Condense(Params),
    /// Minimize the influence-zone volume.
    RateOpt(Params),
    /// Empirical versus theoretical rate over several tail runs.
    RateCurve(Params),
    /// Randomized check of one structural condition.
    Check(Params),
}

#[derive(Args, Debug, Clone, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Params {
    /// JSON file with parameters (flags take precedence).
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// knn, nng or beta-skeleton.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// dir, undir or bidir.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub variant: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    /// Window side.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intensity: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub replicas: Option<u64>,
    /// Side of the calibration box for `mu`.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub calib_side: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub restarts: Option<usize>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    /// Input artifact (point CSV, run JSON or optimizer JSON).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    /// Hits CSV for `condense` (default: next to the run record).
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hits: Option<PathBuf>,
    /// literal or nng-reduced.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub objective: Option<String>,
    /// Fix #φ during optimization.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub phi_size: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    /// Choose r so that this fraction of replicas are hits.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target_p: Option<f64>,
    /// Use this μ instead of the windowed mean of the run.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mu: Option<f64>,
    /// Top-m sizes for `condense`.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<Vec<usize>>,
    /// fin, fin2, sta, con, inf or scale.
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub condition: Option<String>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inf_a: Option<f64>,
    /// Tail run records for `rate-curve`.
    #[arg(long, value_delimiter = ',')]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub runs: Option<Vec<PathBuf>>,
    #[arg(long)]
    #[serde(skip_serializing_if = "Option::is_none")]
    pub workers: Option<usize>,
}

macro_rules! merge_fields {
    ($a:ident, $b:ident, $($f:ident),*) => {
        Params { config: None, $($f: $a.$f.or($b.$f)),* }
    };
}

impl Params {
    /// Flags over config-file values.
    fn merged_over(self, file: Params) -> Params {
        let a = self;
        let b = file;
        merge_fields!(
            a, b, model, k, beta, variant, alpha, dim, n, margin, intensity, samples, replicas, calib_side, restarts, steps, seed,
            out, input, hits, objective, phi_size, r, target_p, mu, m, condition, trials, delta, inf_a, runs, workers
        )
    }

    /// Effective parameters as echoed into artifacts.
    fn echo(&self) -> Value {
        let mut v = serde_json::to_value(self).expect("params serialize");
        if let Some(o) = v.as_object_mut() {
            o.remove("workers");
        }
        v
    }
}

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Runtime(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn cfg_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

fn need<T: Clone>(v: &Option<T>, flag: &str) -> CliResult<T> {
    v.clone().ok_or_else(|| cfg_err(format!("missing required flag --{flag}")))
}

fn allowed(p: &Params, command: &str, keys: &[&str]) -> CliResult<()> {
    let v = serde_json::to_value(p).expect("params serialize");
    for k in v.as_object().into_iter().flat_map(|o| o.keys()) {
        if k != "workers" && !keys.contains(&k.as_str()) {
            return Err(cfg_err(format!("--{} is not a parameter of `{command}`", k.replace('_', "-"))));
        }
    }
    Ok(())
}

fn model_of(p: &Params) -> CliResult<GraphModel> {
    let name = p.model.clone().unwrap_or_else(|| "knn".into());
    let dim = p.dim.unwrap_or(2);
    match name.as_str() {
        "knn" => GraphModel::knn(dim, p.k.unwrap_or(1)).map_err(|e| cfg_err(format!("--k/--dim: {e}"))),
        "nng" => GraphModel::knn(dim, 1).map_err(|e| cfg_err(format!("--dim: {e}"))),
        "beta-skeleton" | "beta" => {
            if dim != 2 {
                return Err(cfg_err("--dim: the beta-skeleton is planar (dim 2)"));
            }
            GraphModel::beta_skeleton(need(&p.beta, "beta")?).map_err(|e| cfg_err(format!("--beta: {e}")))
        }
        other => Err(cfg_err(format!("--model: unknown model {other:?} (knn, nng, beta-skeleton)"))),
    }
}

fn variant_of(p: &Params) -> CliResult<ScoreVariant> {
    let v: Variant = p.variant.clone().unwrap_or_else(|| "dir".into()).parse().map_err(|e: Error| cfg_err(format!("--variant: {e}")))?;
    ScoreVariant::new(v, need(&p.alpha, "alpha")?).map_err(|e| cfg_err(format!("--alpha: {e}")))
}

fn positive(v: f64, flag: &str) -> CliResult<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(cfg_err(format!("--{flag} must be positive, got {v}")))
    }
}

fn alpha_above_dim(sv: &ScoreVariant, model: &GraphModel) -> CliResult<()> {
    if sv.alpha > model.dim as f64 {
        Ok(())
    } else {
        Err(cfg_err(format!("--alpha must exceed --dim ({} <= {})", sv.alpha, model.dim)))
    }
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::Runtime(format!("{}: {e}", dir.display())))?;
    }
    fs::write(path, text).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn write_json(path: &Path, v: &Value) -> CliResult<()> {
    write(path, &(serde_json::to_string_pretty(v).expect("json") + "\n"))
}

/// CSV artifact plus `<out>.config.json` holding the effective parameters.
fn write_csv(path: &Path, text: &str, p: &Params) -> CliResult<()> {
    write(path, text)?;
    write_json(&with_suffix(path, ".config.json"), &p.echo())
}

fn seed_of(p: &Params) -> CliResult<Seed> {
    Ok(Seed::new(need(&p.seed, "seed")?))
}

fn read_points(p: &Params) -> CliResult<PointConfig> {
    let path = need(&p.input, "input")?;
    Ok(PointConfig::from_csv(&read(&path)?)?)
}

fn cmd_sample(p: &Params) -> CliResult<String> {
    allowed(p, "sample", &["dim", "n", "margin", "intensity", "seed", "out"])?;
    let dim = p.dim.unwrap_or(2);
    if dim == 0 {
        return Err(cfg_err("--dim must be >= 1"));
    }
    let n = positive(need(&p.n, "n")?, "n")?;
    let margin = p.margin.unwrap_or(0.0);
    if !(margin >= 0.0) {
        return Err(cfg_err("--margin must be nonnegative"));
    }
    let intensity = positive(p.intensity.unwrap_or(1.0), "intensity")?;
    let seed = seed_of(p)?;
    let out = need(&p.out, "out")?;
    let cfg = sample_poisson(&AxisBox::centered_cube(dim, n + 2.0 * margin), intensity, seed)?;
    write_csv(&out, &cfg.to_csv(), p)?;
    Ok(format!("sample: {} points in d={dim} written to {}", cfg.len(), out.display()))
}

fn cmd_graph(p: &Params) -> CliResult<String> {
    allowed(p, "graph", &["input", "model", "k", "beta", "dim", "out"])?;
    let cfg = read_points(p)?;
    let model = model_of(&Params { dim: Some(p.dim.unwrap_or(cfg.dim())), ..p.clone() })?;
    let out = need(&p.out, "out")?;
    let adj = build_adjacency(&cfg, &model)?;
    write_csv(&out, &adj.to_edge_csv(), p)?;
    Ok(format!("graph: {} arcs among {} nodes ({}) written to {}", adj.arc_count(), adj.len(), model.label(), out.display()))
}

fn cmd_score(p: &Params) -> CliResult<String> {
    allowed(p, "score", &["input", "model", "k", "beta", "dim", "variant", "alpha", "n", "out"])?;
    let cfg = read_points(p)?;
    let model = model_of(&Params { dim: Some(p.dim.unwrap_or(cfg.dim())), ..p.clone() })?;
    let sv = variant_of(p)?;
    let out = need(&p.out, "out")?;
    let (window, norm) = match p.n {
        Some(n) => (AxisBox::centered_cube(cfg.dim(), positive(n, "n")?), n),
        None => {
            let b = cfg.bounding_box().unwrap_or_else(|| AxisBox::centered_cube(cfg.dim(), 0.0));
            (b, 1.0)
        }
    };
    let adj = build_adjacency(&cfg, &model)?;
    let table = ScoreTable::new(&adj, &window, &sv);
    let hn = functional_hn(&adj, &window, norm, &sv);
    write_csv(&out, &table.to_csv(), p)?;
    Ok(format!("score: {} window nodes, H_n = {hn:.10e}, written to {}", table.nodes.len(), out.display()))
}

fn cmd_mu(p: &Params) -> CliResult<String> {
    allowed(p, "mu", &["model", "k", "beta", "dim", "variant", "alpha", "calib_side", "margin", "replicas", "seed", "out"])?;
    let model = model_of(p)?;
    let sv = variant_of(p)?;
    let replicas = p.replicas.unwrap_or(100_000);
    if replicas < 2 {
        return Err(cfg_err("--replicas must be >= 2"));
    }
    let calib = positive(p.calib_side.unwrap_or(4.0), "calib-side")?;
    let margin = p.margin.unwrap_or(4.0);
    let seed = seed_of(p)?;
    let out = need(&p.out, "out")?;
    let est = estimate_mu(&model, &sv, calib, margin, replicas, seed)?;
    let closed = (model.is_nng() && sv.variant == Variant::Dir).then(|| nng_mu_closed_form(model.dim, sv.alpha));
    write_json(&out, &json!({ "estimate": est, "closed_form": closed, "model": model.label(), "config": p.echo() }))?;
    let warn = if est.margin_ok { "" } else { " (warning: stabilization radius exceeds the margin)" };
    Ok(format!("mu: {:.6} ± {:.6}{warn}", est.mean, est.std_error))
}

fn tail_spec(p: &Params) -> CliResult<TailSpec> {
    let model = model_of(p)?;
    let sv = variant_of(p)?;
    alpha_above_dim(&sv, &model)?;
    let n = positive(need(&p.n, "n")?, "n")?;
    let margin = p.margin.unwrap_or(4.0);
    if !(margin >= 0.0) {
        return Err(cfg_err("--margin must be nonnegative"));
    }
    let samples = need(&p.samples, "samples")?;
    if samples < 2 {
        return Err(cfg_err("--samples must be >= 2"));
    }
    Ok(TailSpec { model, variant: sv, n, margin, samples, seed: seed_of(p)? })
}

/// Runs the tail simulation; `r` from `--r` or tuned from `--target-p`.
pub fn tail_run(spec: &TailSpec, r: Option<f64>, target_p: Option<f64>, mu: Option<f64>) -> crate::Result<TailRun> {
    let hn = simulate_hn(spec)?;
    let (mu_used, se) = match mu {
        Some(v) => (v, 0.0),
        None => mean_and_se(&hn),
    };
    let r = match (r, target_p) {
        (Some(r), _) => r,
        (None, Some(p)) => tune_r(&hn, mu_used, p)?,
        (None, None) => return Err(Error::Domain("one of r or target_p is required".into())),
    };
    let asym = (spec.model.is_nng() && spec.variant.variant == Variant::Dir).then(|| nng_mu_closed_form(spec.model.dim, spec.variant.alpha));
    let record = record_from_hn(spec, &hn, mu_used, se, asym, r);
    let hits = collect_hits(spec, &hn, mu_used + r)?;
    Ok(TailRun { record, hits })
}

fn cmd_tail(p: &Params) -> CliResult<String> {
    allowed(
        p,
        "tail",
        &["model", "k", "beta", "dim", "variant", "alpha", "n", "margin", "samples", "seed", "r", "target_p", "mu", "out"],
    )?;
    let spec = tail_spec(p)?;
    if p.r.is_none() && p.target_p.is_none() {
        return Err(cfg_err("missing required flag --r (or --target-p)"));
    }
    if let Some(t) = p.target_p {
        if !(t > 0.0 && t < 1.0) {
            return Err(cfg_err("--target-p must lie in (0, 1)"));
        }
    }
    let out = need(&p.out, "out")?;
    let run = tail_run(&spec, p.r, p.target_p, p.mu)?;
    let hits_path = with_suffix(&out, ".hits.csv");
    write(&hits_path, &run.hits_csv())?;
    let mut v = serde_json::to_value(&run.record).expect("json");
    v["config"] = p.echo();
    write_json(&out, &v)?;
    let r = &run.record;
    Ok(format!(
        "tail: r = {:.6}, hits {}/{}, p_hat = {:.4e}, ci95 = [{:.4e}, {:.4e}]",
        r.r, r.hits, r.samples, r.p_hat, r.ci95.0, r.ci95.1
    ))
}

fn parse_hits_csv(text: &str) -> CliResult<Vec<HitPayload>> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if !header.starts_with("replica,H_n") {
        return Err(CliError::Runtime("hits CSV: bad header".into()));
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            let bad = |_| CliError::Runtime(format!("hits CSV: bad row {l:?}"));
            Ok(HitPayload {
                replica: f[0].parse().map_err(|e: std::num::ParseIntError| bad(e.to_string()))?,
                h_n: f.get(1).ok_or_else(|| bad(String::new()))?.parse().map_err(|e: std::num::ParseFloatError| bad(e.to_string()))?,
                scores: f[2..]
                    .iter()
                    .map(|v| v.parse::<f64>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| bad(e.to_string()))?,
            })
        })
        .collect()
}

fn read_record(path: &Path) -> CliResult<TailRunRecord> {
    serde_json::from_str(&read(path)?).map_err(|e| CliError::Runtime(format!("{}: {e}", path.display())))
}

fn cmd_condense(p: &Params) -> CliResult<String> {
    allowed(p, "condense", &["input", "hits", "m", "out"])?;
    let input = need(&p.input, "input")?;
    let m = p.m.clone().unwrap_or_else(|| vec![1, 2, HIT_TOP]);
    if m.iter().any(|&v| v == 0 || v > HIT_TOP) {
        return Err(cfg_err(format!("--m values must lie in 1..={HIT_TOP}")));
    }
    let out = need(&p.out, "out")?;
    let record = read_record(&input)?;
    let hits = parse_hits_csv(&read(&p.hits.clone().unwrap_or_else(|| with_suffix(&input, ".hits.csv")))?)?;
    let summaries = condensation_stats(&record, &hits, &m)?;
    write_json(&out, &json!({ "record": record, "summaries": summaries, "config": p.echo() }))?;
    let medians: Vec<String> = summaries.iter().map(|s| format!("m={}: {:.4}", s.m, s.quantiles.1)).collect();
    Ok(format!("condense: {} hits, median fractions {}", hits.len(), medians.join(", ")))
}

fn cmd_rate_opt(p: &Params) -> CliResult<String> {
    allowed(p, "rate-opt", &["model", "k", "beta", "dim", "variant", "alpha", "objective", "restarts", "steps", "phi_size", "seed", "out"])?;
    let model = model_of(p)?;
    let sv = variant_of(p)?;
    alpha_above_dim(&sv, &model)?;
    let objective: Objective =
        p.objective.clone().unwrap_or_else(|| "literal".into()).parse().map_err(|e: Error| cfg_err(format!("--objective: {e}")))?;
    if objective == Objective::NngReduced && !model.is_nng() {
        return Err(cfg_err("--objective nng-reduced requires --model nng (or knn with k = 1)"));
    }
    let mut params = AnnealParams::new(seed_of(p)?);
    if let Some(r) = p.restarts {
        params.restarts = r;
    }
    if let Some(s) = p.steps {
        params.steps_per_restart = s;
    }
    if let Some(k) = p.phi_size {
        params.phi_policy = PhiPolicy::Forced(k);
    }
    params.validate(&model).map_err(|e| cfg_err(e.to_string()))?;
    let out = need(&p.out, "out")?;
    let res = optimize_rate(&model, &sv, objective, &params)?;
    let mut v = serde_json::to_value(&res).expect("json");
    v["config"] = p.echo();
    write_json(&out, &v)?;
    Ok(format!("rate-opt: best volume {:.6} with {} points ({:?})", res.best_volume, res.best_points.len(), objective))
}

fn cmd_rate_curve(p: &Params) -> CliResult<String> {
    allowed(p, "rate-curve", &["runs", "inf_a", "input", "out"])?;
    let runs = need(&p.runs, "runs")?;
    let inf_a = match (p.inf_a, &p.input) {
        (Some(v), _) => v,
        (None, Some(path)) => {
            let v: Value = serde_json::from_str(&read(path)?).map_err(|e| CliError::Runtime(e.to_string()))?;
            v["best_volume"].as_f64().ok_or_else(|| CliError::Runtime(format!("{}: no best_volume", path.display())))?
        }
        (None, None) => return Err(cfg_err("missing required flag --inf-a (or --input with an optimizer result)")),
    };
    if !(inf_a >= 0.0) {
        return Err(cfg_err("--inf-a must be nonnegative"));
    }
    let out = need(&p.out, "out")?;
    let records = runs.iter().map(|r| read_record(r)).collect::<CliResult<Vec<_>>>()?;
    let rows = rate_curve(&records, inf_a)?;
    write_csv(&out, &rate_curve_csv(&rows), p)?;
    let name = out.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    write(&with_suffix(&out, ".gp"), &rate_curve_gnuplot(&name))?;
    let usable = rows.iter().filter(|r| r.empirical.is_some()).count();
    Ok(format!("rate-curve: {} rows ({usable} usable) written to {}", rows.len(), out.display()))
}

fn cmd_check(p: &Params) -> CliResult<String> {
    allowed(p, "check", &["condition", "model", "k", "beta", "dim", "trials", "seed", "n", "delta", "out"])?;
    let kind: ConditionKind = need(&p.condition, "condition")?.parse().map_err(|e: Error| cfg_err(format!("--condition: {e}")))?;
    let model = model_of(p)?;
    let trials = p.trials.unwrap_or(100);
    let seed = seed_of(p)?;
    let out = need(&p.out, "out")?;
    let side = positive(p.n.unwrap_or(8.0), "n")?;
    let report = match kind {
        ConditionKind::Fin => check_fin(&model, side, trials, seed)?,
        ConditionKind::Fin2 => check_fin2(&model, &[0.5, 1.0, 2.0], trials, seed)?,
        ConditionKind::Sta => {
            let cones = cone_cover(model.dim, DEFAULT_CONE_HALF_ANGLE, DEFAULT_CONE_OFFSET)
                .map_err(|e| cfg_err(format!("--dim: {e}")))?;
            check_sta(&model, &cones, side, trials, 20, seed)?
        }
        ConditionKind::Con => {
            let delta = p.delta.unwrap_or(1e-9);
            if !(delta >= 0.0) {
                return Err(cfg_err("--delta must be nonnegative"));
            }
            let cfg = sample_poisson(&AxisBox::centered_cube(model.dim, side), 1.0, seed.fork(1))?;
            continuity_probe(&cfg, &model, delta, trials, seed)?
        }
        ConditionKind::Inf => check_inf(&model, trials, seed)?,
        ConditionKind::Scale => check_scale(&model, &[0.5, 2.0, 10.0], trials, seed)?,
    };
    let mut v = serde_json::to_value(&report).expect("json");
    v["config"] = p.echo();
    write_json(&out, &v)?;
    Ok(format!(
        "check {:?}: {} trials, worst {} vs bound {}, {} violations",
        report.condition, report.trials, report.worst_observed, report.bound_claimed, report.violations
    ))
}

fn load_config(path: &Path) -> CliResult<Params> {
    let text = fs::read_to_string(path).map_err(|e| cfg_err(format!("--config {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| cfg_err(format!("--config {}: {e}", path.display())))
}

fn dispatch(command: Command) -> CliResult<String> {
    let (name, flags) = match command {
        Command::Sample(p) => ("sample", p),
        Command::Graph(p) => ("graph", p),
        Command::Score(p) => ("score", p),
        Command::Mu(p) => ("mu", p),
        Command::Tail(p) => ("tail", p),
        Command::Condense(p) => ("condense", p),
        Command::RateOpt(p) => ("rate-opt", p),
        Command::RateCurve(p) => ("rate-curve", p),
        Command::Check(p) => ("check", p),
    };
    let file = match &flags.config {
        Some(path) => load_config(path)?,
        None => Params::default(),
    };
    let p = flags.merged_over(file);
    let body = || match name {
        "sample" => cmd_sample(&p),
        "graph" => cmd_graph(&p),
        "score" => cmd_score(&p),
        "mu" => cmd_mu(&p),
        "tail" => cmd_tail(&p),
        "condense" => cmd_condense(&p),
        "rate-opt" => cmd_rate_opt(&p),
        "rate-curve" => cmd_rate_curve(&p),
        _ => cmd_check(&p),
    };
    match p.workers {
        Some(0) => Err(cfg_err("--workers must be >= 1")),
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| CliError::Runtime(e.to_string()))?
            .install(body),
        None => body(),
    }
}

/// Parses `argv` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            2
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

/// Parameter keys accepted in `--config` files.
pub fn config_keys() -> BTreeMap<&'static str, &'static str> {
    BTreeMap::from([
        ("model", "knn | nng | beta-skeleton"),
        ("k", "neighbors for knn"),
        ("beta", "lens parameter, >= 1"),
        ("variant", "dir | undir | bidir"),
        ("alpha", "edge-length power"),
        ("dim", "ambient dimension"),
        ("n", "window side"),
        ("margin", "sampling margin around the window"),
        ("seed", "root seed"),
    ])
}
