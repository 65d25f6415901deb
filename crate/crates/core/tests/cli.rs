use std::fs;
use std::path::Path;

use condensate::cli::run;
use condensate::geometry::AxisBox;
use condensate::graphs::{build_adjacency, GraphModel};
use condensate::point_process::{sample_poisson, PointConfig};
use condensate::scores::{ScoreTable, ScoreVariant};
use condensate::Seed;

fn cli(args: &[&str]) -> i32 {
    run(std::iter::once("condensate").chain(args.iter().copied()))
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn sample_graph_score_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let pts = dir.path().join("pts.csv");
    assert_eq!(cli(&["sample", "--dim", "2", "--n", "8", "--intensity", "1", "--seed", "7", "--out", s(&pts)]), 0);
    let cfg = PointConfig::from_csv(&fs::read_to_string(&pts).unwrap()).unwrap();
    let direct = sample_poisson(&AxisBox::centered_cube(2, 8.0), 1.0, Seed::new(7)).unwrap();
    assert_eq!(cfg.coords(), direct.coords());

    let edges = dir.path().join("edges.csv");
    assert_eq!(cli(&["graph", "--input", s(&pts), "--model", "knn", "--k", "2", "--out", s(&edges)]), 0);
    let adj = build_adjacency(&direct, &GraphModel::knn(2, 2).unwrap()).unwrap();
    assert_eq!(fs::read_to_string(&edges).unwrap(), adj.to_edge_csv());

    let scores = dir.path().join("scores.csv");
    assert_eq!(cli(&["score", "--input", s(&pts), "--model", "knn", "--k", "2", "--alpha", "3", "--n", "8", "--out", s(&scores)]), 0);
    let table = ScoreTable::new(&adj, &AxisBox::centered_cube(2, 8.0), &ScoreVariant::dir(3.0));
    assert_eq!(fs::read_to_string(&scores).unwrap(), table.to_csv());

    let echoed: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("pts.csv.config.json")).unwrap()).unwrap();
    assert_eq!(echoed["seed"], 7);
    assert_eq!(echoed["n"], 8.0);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.json");
    // missing seed
    assert_eq!(cli(&["sample", "--n", "4", "--out", s(&out)]), 2);
    // unknown flag
    assert_eq!(cli(&["sample", "--n", "4", "--seed", "1", "--frobnicate", "3"]), 2);
    // flag of another command
    assert_eq!(cli(&["sample", "--n", "4", "--seed", "1", "--alpha", "3", "--out", s(&out)]), 2);
    // alpha <= dim for tail
    assert_eq!(cli(&["tail", "--model", "nng", "--alpha", "2", "--n", "4", "--samples", "10", "--r", "1", "--seed", "1", "--out", s(&out)]), 2);
    // bad model and variant
    assert_eq!(cli(&["mu", "--model", "delaunay", "--alpha", "3", "--seed", "1", "--out", s(&out)]), 2);
    assert_eq!(cli(&["mu", "--model", "nng", "--variant", "sideways", "--alpha", "3", "--seed", "1", "--out", s(&out)]), 2);
    // beta skeleton outside the plane
    assert_eq!(cli(&["check", "--condition", "fin", "--model", "beta-skeleton", "--beta", "1.5", "--dim", "3", "--seed", "1", "--out", s(&out)]), 2);
    // runtime: input file missing
    let missing = dir.path().join("nope.csv");
    assert_eq!(cli(&["graph", "--input", s(&missing), "--model", "nng", "--out", s(&out)]), 1);
    // unknown subcommand
    assert_eq!(cli(&["frob"]), 2);
}

#[test]
fn config_file_precedence_and_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    let out = dir.path().join("pts.csv");
    fs::write(&cfg, format!(r#"{{"n": 5.0, "seed": 2, "out": "{}"}}"#, s(&out))).unwrap();
    assert_eq!(cli(&["sample", "--config", s(&cfg), "--seed", "3"]), 0);
    let direct = sample_poisson(&AxisBox::centered_cube(2, 5.0), 1.0, Seed::new(3)).unwrap();
    assert_eq!(fs::read_to_string(&out).unwrap(), direct.to_csv());

    fs::write(&cfg, r#"{"n": 5.0, "seed": 2, "colour": "red"}"#).unwrap();
    assert_eq!(cli(&["sample", "--config", s(&cfg), "--out", s(&out)]), 2);
    fs::write(&cfg, r#"{"n": 5.0, "seed": 2, "alpha": 3.0}"#).unwrap();
    assert_eq!(cli(&["sample", "--config", s(&cfg), "--out", s(&out)]), 2);
}

#[test]
fn tail_condense_curve_pipeline_is_worker_invariant() {
    let root = tempfile::tempdir().unwrap();
    let mut bytes = Vec::new();
    for workers in ["1", "3"] {
        let dir = root.path().join(format!("w{workers}"));
        let run_json = dir.join("run.json");
        let args = [
            "tail", "--model", "knn", "--k", "1", "--variant", "dir", "--dim", "2", "--alpha", "15", "--n", "4", "--margin", "2",
            "--target-p", "0.02", "--samples", "3000", "--seed", "3", "--workers", workers, "--out", s(&run_json),
        ];
        assert_eq!(cli(&args), 0);
        let cond = dir.join("cond.json");
        assert_eq!(cli(&["condense", "--input", s(&run_json), "--m", "1,2,8", "--out", s(&cond)]), 0);
        let curve = dir.join("curve.csv");
        assert_eq!(cli(&["rate-curve", "--runs", s(&run_json), "--inf-a", "3.141592653589793", "--out", s(&curve)]), 0);
        assert!(fs::read_to_string(dir.join("curve.csv.gp")).unwrap().contains("plot"));
        let read = |p: &Path| fs::read_to_string(p).unwrap().replace(&format!("w{workers}"), "w");
        bytes.push([read(&run_json), read(&dir.join("run.json.hits.csv")), read(&cond), read(&curve)]);
    }
    assert_eq!(bytes[0], bytes[1]);
    let rec: serde_json::Value = serde_json::from_str(&bytes[0][0]).unwrap();
    assert_eq!(rec["schema_version"], 1);
    assert!(rec["config"].get("workers").is_none());
    assert!(rec["hits"].as_u64().unwrap() > 0);
}

#[test]
fn mu_rate_opt_and_check_write_json() {
    let dir = tempfile::tempdir().unwrap();
    let mu = dir.path().join("mu.json");
    assert_eq!(cli(&["mu", "--model", "nng", "--alpha", "3", "--replicas", "2000", "--seed", "1", "--out", s(&mu)]), 0);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&mu).unwrap()).unwrap();
    assert!((v["closed_form"].as_f64().unwrap() - 0.238732).abs() < 1e-6);
    let opt = dir.path().join("opt.json");
    let args = ["rate-opt", "--model", "nng", "--alpha", "15", "--objective", "nng-reduced", "--restarts", "2", "--steps", "200", "--seed", "1", "--out", s(&opt)];
    assert_eq!(cli(&args), 0);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&opt).unwrap()).unwrap();
    assert!(v["best_volume"].as_f64().unwrap() > 3.0);
    for cond in ["fin", "fin2", "sta", "con", "inf", "scale"] {
        let out = dir.path().join(format!("{cond}.json"));
        assert_eq!(cli(&["check", "--condition", cond, "--model", "nng", "--trials", "5", "--seed", "1", "--out", s(&out)]), 0, "{cond}");
    }
}
