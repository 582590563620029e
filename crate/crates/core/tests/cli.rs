use std::path::Path;
use std::process::Command;

use dcm_lab::graph::Digraph;
use dcm_lab::theory::dregular_cdf;

fn run(args: &[&str], out: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_dcm-lab"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn gen_is_reproducible_and_has_the_right_size() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        assert!(run(&["gen", "--law", "dregular:3", "--n", "1000", "--seed", "7"], d).status.success());
    }
    for f in ["graph_000.dcmg", "degrees_000.dcms"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let g = Digraph::read_binary(std::fs::File::open(a.join("graph_000.dcmg")).unwrap()).unwrap();
    assert_eq!(g.edge_count(), 3000);
    let meta = json(&a.join("gen.json"));
    assert_eq!(meta["config"]["seed"], 7);
    assert_eq!(meta["result"]["graphs"][0]["imbalance"], 0);
}

#[test]
fn equal_laws_need_no_fixing() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(&["gen", "--law", "zipf-equal:3.5,1000", "--n", "20000", "--seed", "1"], dir.path()).status.success());
    assert_eq!(json(&dir.path().join("gen.json"))["result"]["graphs"][0]["imbalance"], 0);
}

#[test]
fn theory_file_matches_the_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(&["theory", "--law", "dregular:3", "--n", "5000"], dir.path()).status.success());
    let mut rows = csv::Reader::from_path(dir.path().join("theory.csv")).unwrap();
    let mut count = 0;
    for row in rows.deserialize::<(i64, i64, f64, f64)>() {
        let (_, offset, cdf, closed) = row.unwrap();
        assert!((cdf - closed).abs() <= 1e-12);
        assert!((closed - dregular_cdf(3, 5000, offset as f64)).abs() <= 1e-15);
        count += 1;
    }
    assert!(count > 40);
}

#[test]
fn check_accepts_dregular_sequences() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(&["check", "--law", "dregular:3", "--n", "2000", "--seed", "3"], dir.path()).status.success());
    assert_eq!(json(&dir.path().join("check.json"))["result"]["report"]["omega_n_holds"], true);
}

#[test]
fn invalid_requests_fail_before_work_with_status_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases: [&[&str]; 5] = [
        &["coupling", "--law", "dregular:3", "--n", "1000", "--seed", "1", "--k", "9"],
        &["compare", "--law", "poisson-indep:0.5", "--n", "1000", "--seed", "1"],
        &["gen", "--law", "dregular:3", "--n", "1000"],
        &["gen", "--law", "bogus:1", "--n", "1000", "--seed", "1"],
        &["hopcount", "--no-such-flag"],
    ];
    for args in cases {
        let out = run(args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
    assert!(std::fs::read_dir(dir.path()).unwrap().next().is_none(), "nothing written");
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    std::fs::write(&cfg, r#"{"law": {"kind": "d_regular", "d": 2}, "n": 500, "seed": 2}"#).unwrap();
    let out = dir.path().join("out");
    assert!(run(&["gen", "--config", cfg.to_str().unwrap(), "--n", "300"], &out).status.success());
    let meta = json(&out.join("gen.json"));
    assert_eq!(meta["config"]["n"], 300);
    assert_eq!(meta["result"]["graphs"][0]["stats"]["edges"], 600);
}

#[test]
fn hopcount_reads_generated_graphs_and_reruns_identically() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(&["gen", "--law", "pp-indep", "--n", "800", "--seed", "4"], dir.path()).status.success());
    let graph = dir.path().join("graph_000.dcmg");
    let (a, b) = (dir.path().join("h1"), dir.path().join("h2"));
    for d in [&a, &b] {
        let args = ["hopcount", "--graph", graph.to_str().unwrap(), "--mode", "hll", "--p", "8", "--seed", "5"];
        assert!(run(&args, d).status.success());
    }
    assert_eq!(std::fs::read(a.join("hopcount.csv")).unwrap(), std::fs::read(b.join("hopcount.csv")).unwrap());
    let exact = dir.path().join("exact");
    assert!(run(&["hopcount", "--graph", graph.to_str().unwrap(), "--mode", "exact"], &exact).status.success());
    let meta = json(&exact.join("hopcount.json"));
    assert!(meta["result"]["finite_fraction"].as_f64().unwrap() > 0.0);
}
