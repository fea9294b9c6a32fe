use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn xebsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_xebsim")).args(args).output().expect("spawn xebsim")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    let mut all: Vec<&str> = args.to_vec();
    all.extend(["--out", dir.to_str().unwrap()]);
    xebsim(&all)
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn tail_table_prints_closed_form() {
    let o = xebsim(&["tail-table"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("1.3534e-1"));
    assert!(text.contains("1.1254e-7"));
}

#[test]
fn seed_is_required() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["xeb-run", "--n", "4"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("seed"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "seed = 4\nn = 6\nm = 200\ncircuits = 8\nspoofer = \"ideal\"\n").unwrap();
    let out = dir.path().join("out");
    let o = xebsim(&[
        "xeb-run",
        "--config",
        cfg.to_str().unwrap(),
        "--m",
        "300",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let resolved: toml::Table = std::fs::read_to_string(out.join("config.toml")).unwrap().parse().unwrap();
    assert_eq!(resolved["command"].as_str(), Some("xeb-run"));
    assert_eq!(resolved["m"].as_integer(), Some(300));
    assert_eq!(resolved["n"].as_integer(), Some(6));
    assert_eq!(resolved["cycles"].as_integer(), Some(120));
    assert_eq!(summary(&out)["num_circuits"], 8);
}

#[test]
fn unknown_config_key_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, "seed = 4\nqubits = 6\n").unwrap();
    let o = xebsim(&["xeb-run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn outputs_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = ["xeb-run", "--seed", "9", "--n", "6", "--m", "100", "--circuits", "12"];
    let mut one: Vec<&str> = args.to_vec();
    one.extend(["--workers", "1"]);
    let mut four: Vec<&str> = args.to_vec();
    four.extend(["--workers", "4"]);
    assert!(run_in(a.path(), &one).status.success());
    assert!(run_in(b.path(), &four).status.success());
    for f in ["reports.csv", "summary.json", "aep.csv"] {
        assert_eq!(
            std::fs::read(a.path().join(f)).unwrap(),
            std::fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn xeb_run_endpoints() {
    let n = ["--seed", "2", "--n", "8", "--m", "2000", "--circuits", "30"];
    let check = |spoofer: &[&str], alpha: f64, ratio: f64| {
        let dir = tempfile::tempdir().unwrap();
        let mut args = vec!["xeb-run"];
        args.extend(n);
        args.extend(spoofer);
        let o = run_in(dir.path(), &args);
        assert!(o.status.success());
        assert!(stdout(&o).lines().last().unwrap().starts_with("alpha="));
        let s = summary(dir.path());
        let a = s["alpha"].as_f64().unwrap();
        let se = s["alpha_stderr"].as_f64().unwrap();
        assert!((a - alpha).abs() < 3.0 * se + 0.01, "{spoofer:?}: {a} ± {se}");
        let lr = s["mean_log_ratio"].as_f64().unwrap();
        let lse = s["mean_log_ratio_stderr"].as_f64().unwrap();
        assert!((lr - ratio).abs() < 3.0 * lse + 0.02 * 2000.0, "{spoofer:?}: {lr}");
    };
    check(&["--spoofer", "ideal"], 1.0, 0.0);
    check(&["--spoofer", "uniform"], 0.0, 2000.0);
    check(&["--spoofer", "mixture", "--fidelity", "0.5"], 0.5, 1000.0);
}

#[test]
fn mixture_needs_fidelity() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["xeb-run", "--seed", "1", "--spoofer", "mixture"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn failure_keeps_partial_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(
        dir.path(),
        &["xeb-run", "--seed", "1", "--n", "3", "--cycles", "1", "--m", "500", "--circuits", "6"],
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("zero ideal probability"));
    let partial = std::fs::read_to_string(dir.path().join("reports.partial.csv")).unwrap();
    assert!(partial.is_empty() || partial.starts_with("circuit_id,"));
    assert!(!dir.path().join("summary.json").exists());
}

#[test]
fn log_ratio_halves_at_ln2() {
    let dir = tempfile::tempdir().unwrap();
    let r = (2f64.ln() / 500.0).to_string();
    let rates = format!("0,{r},0.01");
    let o = run_in(
        dir.path(),
        &["log-ratio", "--seed", "3", "--n", "8", "--source", "haar", "--circuits", "30", "--r", &rates],
    );
    assert!(o.status.success(), "{}", stdout(&o));
    let mut rdr = csv::Reader::from_path(dir.path().join("log_ratio.csv")).unwrap();
    let headers = rdr.headers().unwrap().clone();
    assert_eq!(headers.iter().take(3).collect::<Vec<_>>(), ["r", "g", "F"]);
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    let col = |row: &csv::StringRecord, name: &str| -> f64 {
        row[headers.iter().position(|h| h == name).unwrap()].parse().unwrap()
    };
    assert!((col(&rows[1], "F") - 0.5).abs() < 1e-12);
    assert!((col(&rows[1], "mean_log_ratio_expected") - 500.0).abs() < 25.0);
    assert!((col(&rows[2], "predicted") - 1000.0 * (-5f64).exp()).abs() < 1e-9);
}

#[test]
fn log_ratio_needs_rates() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_in(dir.path(), &["log-ratio", "--seed", "1"]).status.code(), Some(2));
}

#[test]
fn haar_test_default_and_tampered() {
    let good = tempfile::tempdir().unwrap();
    assert!(run_in(good.path(), &["haar-test", "--seed", "5"]).status.success());
    let report: Value =
        serde_json::from_str(&std::fs::read_to_string(good.path().join("haar_test.json")).unwrap()).unwrap();
    assert_eq!(report["passed"], true);

    let bad = tempfile::tempdir().unwrap();
    let o = run_in(bad.path(), &["haar-test", "--seed", "5", "--skip-phase-fix"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("left_invariance_dim2         FAIL"));

    let u1 = tempfile::tempdir().unwrap();
    let o = run_in(u1.path(), &["haar-test", "--seed", "5", "--dim", "1"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("u1_arc_uniformity"));
}

#[test]
fn pt_converge_writes_histograms() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["pt-converge", "--seed", "6"]);
    assert!(o.status.success(), "{}", stdout(&o));
    for n in 1..=5 {
        let text = std::fs::read_to_string(dir.path().join(format!("histogram_n{n}.csv"))).unwrap();
        assert!(text.starts_with("bin_left,bin_right,count,empirical_density,pt_density,exact_density\n"));
        assert_eq!(text.lines().count(), 51);
    }
    let mut rdr = csv::Reader::from_path(dir.path().join("pt_converge.csv")).unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 5);
    let laws: Vec<f64> = rows.iter().map(|r| r[6].parse().unwrap()).collect();
    assert!(laws[0] > 5.0 * laws[4]);
}
