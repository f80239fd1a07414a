use std::fs;
use std::path::Path;
use std::process::Command;

use torsionlab::manifest::{sha256_file, ExperimentManifest};
use torsionlab::plot::{emit_plot_data, growth_rows, walk_rows};
use torsionlab_core::hermitian::{bundled_generators, AnyFormMatrix};
use torsionlab_core::homology::GrowthScan;
use torsionlab_core::walks::WalkReport;

const LEHMER: &str = r#"[[0,"1"],[1,"1"],[3,"-1"],[4,"-1"],[5,"-1"],[6,"-1"],[7,"-1"],[9,"1"],[10,"1"]]"#;
const B_T_MINUS_2: &str = r#"[[[[0,"-2"],[1,"1"]]]]"#;
const WALK: &str = r#"{"g": 3, "generators": "bundled", "n_steps": 16, "n_trials": 40, "master_seed": 8, "q_list": [3, 5]}"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_torsionlab"))
}

fn run(dir: &Path, args: &[&str]) -> i32 {
    bin().current_dir(dir).args(args).output().unwrap().status.code().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) {
    fs::write(dir.join(name), text).unwrap();
}

#[test]
fn torsion_scan_rows_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "b.json", B_T_MINUS_2);
    let code = run(d, &["torsion", "scan", "--binf", "b.json", "--qmax", "50", "--out", "out.csv", "--report", "scan.json", "--plot", "plot.csv"]);
    assert_eq!(code, 0);
    let csv = fs::read_to_string(d.join("out.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "q,torsion_order,betti,log_torsion_over_q");
    assert_eq!(lines.len(), 51);
    // |Res(t - 2, t^q - 1)| = 2^q - 1
    assert!(lines[50].starts_with(&format!("50,{},0,", (1u128 << 50) - 1)));

    let scan: GrowthScan = serde_json::from_str(&fs::read_to_string(d.join("scan.json")).unwrap()).unwrap();
    assert_eq!(scan.reports.len(), 50);
    let plot = fs::read_to_string(d.join("plot.csv")).unwrap();
    assert!(plot.lines().any(|l| l.starts_with("log_torsion_over_q,")));
    assert!(plot.lines().any(|l| l.starts_with("mahler_measure,")));

    // rerunning the recorded argv reproduces every output
    let manifest: ExperimentManifest =
        serde_json::from_str(&fs::read_to_string(d.join("out.csv.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest.outputs.len(), 3);
    assert_eq!(manifest.inputs[0].sha256, sha256_file(&d.join("b.json")).unwrap());
    for o in &manifest.outputs {
        fs::remove_file(d.join(&o.path)).unwrap();
    }
    let args: Vec<&str> = manifest.argv.iter().map(String::as_str).collect();
    assert_eq!(run(d, &args), 0);
    for o in &manifest.outputs {
        assert_eq!(sha256_file(&d.join(&o.path)).unwrap(), o.sha256, "{}", o.path);
    }
}

#[test]
fn mahler_eval_lehmer() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "lehmer.json", LEHMER);
    let out = bin().current_dir(dir.path()).args(["mahler", "eval", "--poly", "lehmer.json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["log_measure"].as_f64().unwrap() - 0.1623576).abs() < 1e-6);
    assert_eq!(v["method"], "root_product");

    let out = bin().current_dir(dir.path()).args(["mahler", "kronecker", "--poly", "lehmer.json"]).output().unwrap();
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["mahler_zero"], false);

    let out = bin().args(["mahler", "kalpha", "--alpha", "0.5", "--mmax", "30"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["members"].as_array().unwrap().iter().any(|m| m == 1));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    assert_eq!(run(d, &["--bogus"]), 2);
    assert_eq!(run(d, &["mahler", "eval", "--poly", "missing.json"]), 2);
    write(d, "zero.json", "[]");
    assert_eq!(run(d, &["mahler", "eval", "--poly", "zero.json"]), 2);
    write(d, "bad.json", "{not json");
    assert_eq!(run(d, &["mahler", "eval", "--poly", "bad.json"]), 2);
    assert_eq!(run(d, &["--help"]), 0);
    assert_eq!(run(d, &["mahler", "kalpha", "--alpha", "-1", "--mmax", "10"]), 2);
    write(d, "w.json", WALK);
    assert_eq!(run(d, &["walk", "run", "--config", "w.json"]), 2);
    let out = bin().current_dir(d).env("TORSIONLAB_THREADS", "zero").args(["mahler", "kalpha", "--alpha", "1", "--mmax", "5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().current_dir(d).env("TORSIONLAB_THREADS", "2").args(["--threads", "8", "mahler", "kalpha", "--alpha", "1", "--mmax", "5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn usage_error_prints_schema_help() {
    let out = bin().args(["torsion", "scan"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("input formats"));
}

#[test]
fn walk_run_outputs_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    write(d, "w.json", WALK);
    assert_eq!(run(d, &["--threads", "1", "walk", "run", "--config", "w.json", "--out", "a"]), 0);
    assert_eq!(run(d, &["--threads", "4", "walk", "run", "--config", "w.json", "--out", "b"]), 0);
    for f in ["report.json", "series.csv", "plot.csv"] {
        assert_eq!(fs::read(d.join("a").join(f)).unwrap(), fs::read(d.join("b").join(f)).unwrap(), "{f}");
    }
    let report: WalkReport = serde_json::from_str(&fs::read_to_string(d.join("a/report.json")).unwrap()).unwrap();
    assert_eq!(report.n_trials, 40);
    assert_eq!(report.lyapunov.len(), 2);
    let series = fs::read_to_string(d.join("a/series.csv")).unwrap();
    assert!(series.starts_with("q,n,L_n_mean,L_n_var,frac_mahler_positive,frac_below_1e-1"));
    assert_eq!(series.lines().count(), 1 + 2 * report.schedule.len());

    // --seed overrides the config seed and is recorded
    assert_eq!(run(d, &["--seed", "99", "walk", "run", "--config", "w.json", "--out", "c"]), 0);
    let m: ExperimentManifest = serde_json::from_str(&fs::read_to_string(d.join("c/manifest.json")).unwrap()).unwrap();
    assert_eq!(m.master_seed, Some(99));
    assert_ne!(fs::read(d.join("a/report.json")).unwrap(), fs::read(d.join("c/report.json")).unwrap());

    let out = bin().current_dir(d).args(["walk", "probe", "--config", "w.json", "--q", "3"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v[0]["witness"].is_array());
}

#[test]
fn rep_commands() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let gen = bundled_generators(3).unwrap().remove(0);
    write(d, "m.json", &serde_json::to_string(&AnyFormMatrix::Laurent(gen)).unwrap());
    let out = bin().current_dir(d).args(["rep", "check-form", "m.json"]).output().unwrap();
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["form_preserved"], true);
    assert_eq!(v["torelli_like"], true);

    let out = bin().current_dir(d).args(["rep", "block", "m.json"]).output().unwrap();
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 2);

    let out = bin().current_dir(d).args(["rep", "iota", "m.json", "--q", "5", "--root", "2"]).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["form_residual"].as_f64().unwrap() < 1e-12);
    assert_eq!(run(d, &["rep", "iota", "m.json", "--q", "6", "--root", "2"]), 2);
    assert_eq!(run(d, &["rep", "iota", "m.json"]), 2);
}

#[test]
fn heegaard_identity() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "id.json", "[[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]]");
    let out = bin().current_dir(dir.path()).args(["heegaard", "--matrix", "id.json"]).output().unwrap();
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["betti"], 2);
    assert_eq!(v["torsion"], "1");
    write(dir.path(), "bad.json", "[[1,1],[0,2]]");
    assert_eq!(run(dir.path(), &["heegaard", "--matrix", "bad.json"]), 2);
}

#[test]
fn plot_data_shapes() {
    let empty: Vec<torsionlab::plot::PlotRow> = Vec::new();
    assert_eq!(emit_plot_data(&empty).unwrap(), "series,x,y,stderr\n");

    let b = torsionlab_core::Mat::from_rows(vec![vec![torsionlab_core::LaurentPoly::from_coeffs(0, &[-3, 1])]]);
    let scan = torsionlab_core::homology::growth_scan(&b, &[3, 4, 5]).unwrap();
    let rows = growth_rows(&scan);
    let mut series: Vec<&str> = rows.iter().map(|r| r.series.as_str()).collect();
    series.dedup();
    assert_eq!(series, ["log_torsion_over_q", "mahler_measure"]);

    let c = torsionlab_core::walks::WalkConfig::from_file(&torsionlab_core::walks::WalkConfigFile::bundled(3, 8, 10, 1, vec![3, 7]))
        .unwrap();
    let report = torsionlab_core::walks::run_walk(&c).unwrap();
    let rows = walk_rows(&report);
    for q in [3, 7] {
        assert!(rows.iter().any(|r| r.series == format!("lyapunov_q{q}")));
    }
    let text = emit_plot_data(&rows).unwrap();
    assert_eq!(text.lines().count(), rows.len() + 1);
}
