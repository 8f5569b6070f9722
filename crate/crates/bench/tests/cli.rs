use std::path::Path;
use std::process::{Command, Output};

use disentangle_bench::experiments::{run_trials, TensorSpec, TrialsConfig};
use disentangle_bench::stats::mean;
use tensor_disentangle::generators::SpectrumKind;
use tensor_disentangle::Dims;

fn bench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_disentangle-bench")).args(args).output().expect("binary runs")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn summary_f64(v: &serde_json::Value, key: &str) -> f64 {
    v["summary"][key].as_f64().unwrap_or_else(|| panic!("missing {key}"))
}

#[test]
fn run_is_byte_identical_for_a_fixed_seed() {
    let dir = tempfile::tempdir().unwrap();
    let paths = [dir.path().join("a.json"), dir.path().join("b.json")];
    for p in &paths {
        let out = bench(&["run", "--chi1", "4", "--chi2", "4", "--chi3", "4", "--chi4", "4", "--seed", "5", "--format", "json", "--out", p.to_str().unwrap()]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let a = std::fs::read(&paths[0]).unwrap();
    assert_eq!(a, std::fs::read(&paths[1]).unwrap());
    let v = json(&paths[0]);
    assert!(summary_f64(&v, "zero_count") >= 6.0);
    assert_eq!(v["rows"].as_array().unwrap().len(), 16);
}

#[test]
fn rank_one_ansatz_is_fully_disentangled() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("ansatz.json");
    let out = bench(&["run", "--kind", "ansatz", "--chi3", "4", "--chi4", "4", "--m3-rank", "1", "--format", "json", "--out", p.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(summary_f64(&json(&p), "entropy_after") <= 1e-9);
}

#[test]
fn table1_without_timings_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let p = dir.path().join(name);
        let out = bench(&["table1", "--trials", "4", "--seed", "9", "--no-timings", "--out", p.to_str().unwrap()]);
        assert!(out.status.success());
        std::fs::read_to_string(p).unwrap()
    };
    let a = run("a.csv");
    assert_eq!(a, run("b.csv"));
    let mut lines = a.lines();
    assert_eq!(
        lines.next().unwrap(),
        "trial,seed,s_fast,s_min,s_rand,ratio_fast,ratio_rand,eps_fast,eps_min,weight_fast,weight_min,t_fast,t_min,t_descent,descent_reached,speedup,chi"
    );
    assert_eq!(lines.count(), 4);
}

#[test]
fn csv_rows_recompute_the_summary() {
    let dir = tempfile::tempdir().unwrap();
    let (csv_path, json_path) = (dir.path().join("t.csv"), dir.path().join("t.json"));
    for (p, f) in [(&csv_path, "csv"), (&json_path, "json")] {
        let out = bench(&["table1", "--trials", "5", "--seed", "3", "--no-timings", "--format", f, "--out", p.to_str().unwrap()]);
        assert!(out.status.success());
    }
    let mut reader = csv::Reader::from_path(&csv_path).unwrap();
    let col = reader.headers().unwrap().iter().position(|h| h == "ratio_fast").unwrap();
    let ratios: Vec<f64> = reader.records().map(|r| r.unwrap()[col].parse().unwrap()).collect();
    let v = json(&json_path);
    assert_eq!(mean(&ratios), summary_f64(&v, "ratio_fast_mean"));
}

#[test]
fn trunc_curve_vanishes_at_full_rank() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("curve.json");
    let out = bench(&["trunc-curve", "--trials", "3", "--max-iters", "300", "--format", "json", "--out", p.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&p);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 3 * 16);
    for r in rows.iter().filter(|r| r["chi"] == 16) {
        for k in ["eps_fast", "eps_min", "eps_identity"] {
            assert_eq!(r[k].as_f64().unwrap(), 0.0);
        }
    }
    assert!(summary_f64(&v, "eps_fast_chi12_median") <= 1e-18);
}

#[test]
fn three_qubit_wave_alternates_single_gates() {
    let out = bench(&["wave", "--qubits", "3", "--layers", "4", "--trials", "1", "--no-timings"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let gates: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(5).unwrap()).collect();
    assert_eq!(gates, vec!["0", "1", "2", "3", "4"]);
}

#[test]
fn bits_flag_rescales_entropies() {
    let dir = tempfile::tempdir().unwrap();
    let (n, b) = (dir.path().join("n.json"), dir.path().join("b.json"));
    for (p, extra) in [(&n, None), (&b, Some("--bits"))] {
        let mut args = vec!["run", "--format", "json", "--out", p.to_str().unwrap()];
        args.extend(extra);
        assert!(bench(&args).status.success());
    }
    let ratio = summary_f64(&json(&b), "entropy_before") / summary_f64(&json(&n), "entropy_before");
    assert!((ratio - 1.0 / std::f64::consts::LN_2).abs() < 1e-12);
}

#[test]
fn configuration_errors_exit_with_two() {
    for args in [
        vec!["table1", "--trials", "0"],
        vec!["run", "--chi1", "4", "--chi2", "3", "--chi3", "3", "--chi4", "4"],
        vec!["run", "--kind", "lambda-inverse", "--chi1", "2", "--chi2", "3"],
        vec!["run", "--m3-rank", "1"],
        vec!["wave", "--qubits", "30"],
        vec!["table1", "--kind", "nonsense"],
        vec!["run", "--out", "/nonexistent-dir/x.csv"],
    ] {
        assert_eq!(bench(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn gaussian_four_discarded_weight_matches_the_table() {
    let mut cfg = TrialsConfig::new(TensorSpec { kind: SpectrumKind::Gaussian, dims: Dims::new(4, 4, 4, 4).unwrap() });
    cfg.speedup = false;
    let trials = run_trials(&cfg).unwrap();
    let weights: Vec<f64> = trials.iter().map(|t| t.fast.discarded_weight(4).unwrap()).collect();
    let m = mean(&weights);
    assert!((0.09..=0.17).contains(&m), "{m}");
}
