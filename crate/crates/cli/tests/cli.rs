use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_qnd-filter");

fn config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn qnd(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn csv(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn column(rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let i = rows[0].iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows[1..].iter().map(|r| r[i].parse().unwrap()).collect()
}

#[test]
fn validate_exit_codes() {
    let tmp = TempDir::new().unwrap();
    let ok = config(tmp.path(), "ok.json", "{}");
    let out = qnd(&["validate", "--config", ok.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(!stdout(&out).contains("FAIL"));

    let flat = config(tmp.path(), "flat.json", r#"{"photon_box": {"phi0": 0.0}}"#);
    let out = qnd(&["validate", "--config", flat.to_str().unwrap()]);
    assert_eq!(code(&out), 3);
    assert!(stdout(&out).contains("FAIL [true] non-degeneracy"));

    let dec = config(tmp.path(), "dec.json", r#"{"decoherence": {"eps": 0.01, "n_th": 0.05}}"#);
    let out = qnd(&["validate", "--config", dec.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let text = stdout(&out);
    assert!(text.contains("WARN [true] qnd property"), "{text}");
    assert!(text.contains("approximate"), "{text}");
}

#[test]
fn config_errors_exit_one() {
    let tmp = TempDir::new().unwrap();
    let typo = config(tmp.path(), "typo.json", "{\n \"photon_box\": {\"phi_0\": 1}\n}");
    let out = qnd(&["validate", "--config", typo.to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("phi_0") && err.contains("line 2"), "{err}");

    let missing = tmp.path().join("nope.json");
    assert_eq!(code(&qnd(&["validate", "--config", missing.to_str().unwrap()])), 1);

    let dec = config(tmp.path(), "dec.json", r#"{"decoherence": {}}"#);
    let o = tmp.path().join("o");
    assert_eq!(code(&qnd(&["simulate", "--config", dec.to_str().unwrap(), "--out", o.to_str().unwrap()])), 1);

    let no_grid = config(tmp.path(), "g.json", "{}");
    assert_eq!(code(&qnd(&["region-scan", "--config", no_grid.to_str().unwrap(), "--out", o.to_str().unwrap()])), 1);
    assert_eq!(code(&qnd(&["bogus", "--config", no_grid.to_str().unwrap()])), 1);
}

#[test]
fn output_directory_is_protected() {
    let tmp = TempDir::new().unwrap();
    let cfg = config(tmp.path(), "c.json", r#"{"trajectory": {"steps": 5}}"#);
    let out = tmp.path().join("out");
    let args = ["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    assert_eq!(code(&qnd(&args)), 0);
    assert_eq!(code(&qnd(&args)), 1);
    let mut forced = args.to_vec();
    forced.push("--force");
    assert_eq!(code(&qnd(&forced)), 0);

    let empty = tmp.path().join("empty");
    fs::create_dir(&empty).unwrap();
    assert_eq!(code(&qnd(&["simulate", "--config", cfg.to_str().unwrap(), "--out", empty.to_str().unwrap()])), 0);
}

#[test]
fn zero_steps_writes_initial_row_only() {
    let tmp = TempDir::new().unwrap();
    let cfg = config(tmp.path(), "c.json", r#"{"trajectory": {"steps": 0}}"#);
    let out = tmp.path().join("out");
    assert_eq!(code(&qnd(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])), 0);
    let rows = csv(&out.join("trajectory.csv"));
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1][0], "0");
    assert_eq!(rows[1][1], "");
    assert_eq!(csv(&out.join("rates.csv")).len(), 1);
}

#[test]
fn matched_simulation_converges_to_true_pointer() {
    let tmp = TempDir::new().unwrap();
    let cfg = config(
        tmp.path(),
        "c.json",
        r#"{"trajectory": {"steps": 2000, "seed": 17}, "estimated": {"phi0": 0.83, "phi_r": -0.40}}"#,
    );
    let out = tmp.path().join("out");
    assert_eq!(code(&qnd(&["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])), 0);
    let rows = csv(&out.join("trajectory.csv"));
    assert_eq!(rows.len(), 2002);
    let last = |name: &str| *column(&rows, name).last().unwrap();
    let top = (0..5).max_by(|&a, &b| last(&format!("q_{a}")).total_cmp(&last(&format!("q_{b}")))).unwrap();
    assert!(last(&format!("q_{top}")) > 0.99);
    for filter in ["matched", "estimated"] {
        assert!(last(&format!("{filter}_qhat_{top}")) > 0.99, "{filter}");
    }
    for cell in rows[1..].iter().flat_map(|r| r[2..].iter()) {
        assert!(cell.contains('e') && !cell.contains(' '), "{cell}");
    }
    let rates = csv(&out.join("rates.csv"));
    assert_eq!(rates[0].join(","), "sample,filter,upsilon,alpha,empirical_rate,theoretical_rate,residual,window_start,window_end");
    assert_eq!(rates.len(), 1 + 3 * 4);
    let snapshot = fs::read_to_string(out.join("channel.json")).unwrap();
    assert!(snapshot.contains("\"detected_outcomes\""));
}

#[test]
fn region_scan_csv() {
    let tmp = TempDir::new().unwrap();
    let single = config(
        tmp.path(),
        "one.json",
        r#"{"grid": {"phi0_range": [0.78, 0.78], "phi_r_range": [-0.44, -0.44], "resolution": [1, 1]}}"#,
    );
    let out = tmp.path().join("one");
    assert_eq!(code(&qnd(&["region-scan", "--config", single.to_str().unwrap(), "--out", out.to_str().unwrap()])), 0);
    let rows = csv(&out.join("region.csv"));
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].join(","), "phi0_hat,phiR_hat,verdict,fail_alpha,fail_beta");
    assert_eq!(rows[1][2], "1");

    let small = config(tmp.path(), "small.json", r#"{"grid": {"resolution": [7, 5]}}"#);
    let out = tmp.path().join("small");
    assert_eq!(code(&qnd(&["region-scan", "--config", small.to_str().unwrap(), "--out", out.to_str().unwrap()])), 0);
    let rows = csv(&out.join("region.csv"));
    assert_eq!(rows.len(), 36);
    let tie = rows.iter().find(|r| r[0].starts_with("8.0") && r[1].starts_with("-8.0")).unwrap();
    assert_eq!(tie[2..].join(","), "2,0,0");
    for r in &rows[1..] {
        match r[2].as_str() {
            // phi_n = 0.4 n - 0.2 at (0.8, -0.8): pointers 0 and 1 tie exactly
            "0" | "2" => assert!(!r[3].is_empty() && !r[4].is_empty()),
            "1" => assert!(r[3].is_empty() && r[4].is_empty()),
            other => panic!("unexpected verdict {other}"),
        }
    }
}

#[test]
fn decoherence_without_coupling_matches_qnd_run() {
    let tmp = TempDir::new().unwrap();
    let traj = r#""trajectory": {"steps": 300, "seed": 8, "n_samples": 1}"#;
    let qnd_cfg = config(tmp.path(), "q.json", &format!("{{{traj}}}"));
    let dec_cfg = config(tmp.path(), "d.json", &format!(r#"{{{traj}, "decoherence": {{"eps": 0.0, "n_th": 0.0}}}}"#));
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(code(&qnd(&["simulate", "--config", qnd_cfg.to_str().unwrap(), "--out", a.to_str().unwrap()])), 0);
    assert_eq!(code(&qnd(&["decoherence-run", "--config", dec_cfg.to_str().unwrap(), "--out", b.to_str().unwrap()])), 0);
    let f_qnd = column(&csv(&a.join("trajectory.csv")), "matched_fidelity");
    let f_dec = column(&csv(&b.join("fidelity.csv")), "matched_0");
    assert_eq!(f_qnd.len(), f_dec.len());
    for (x, y) in f_qnd.iter().zip(&f_dec) {
        assert!((x - y).abs() < 1e-9, "{x} vs {y}");
    }
}

#[test]
fn fidelity_csv_layout() {
    let tmp = TempDir::new().unwrap();
    let cfg = config(
        tmp.path(),
        "d.json",
        r#"{"decoherence": {}, "estimated": {"phi0": 0.83, "phi_r": -0.40}, "trajectory": {"steps": 20, "n_samples": 3}}"#,
    );
    let out = tmp.path().join("o");
    assert_eq!(code(&qnd(&["decoherence-run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()])), 0);
    let rows = csv(&out.join("fidelity.csv"));
    assert_eq!(
        rows[0].join(","),
        "step,matched_0,matched_1,matched_2,matched_mean,estimated_0,estimated_1,estimated_2,estimated_mean"
    );
    assert_eq!(rows.len(), 22);
}

#[test]
fn seed_flag_overrides_config() {
    let tmp = TempDir::new().unwrap();
    let cfg = config(tmp.path(), "c.json", r#"{"trajectory": {"steps": 50, "seed": 1}}"#);
    let run = |name: &str, extra: &[&str]| {
        let out = tmp.path().join(name);
        let mut args = vec!["simulate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
        args.extend_from_slice(extra);
        assert_eq!(code(&qnd(&args)), 0);
        fs::read_to_string(out.join("trajectory.csv")).unwrap()
    };
    let base = run("a", &[]);
    assert_eq!(run("b", &["--seed", "1"]), base);
    assert_ne!(run("c", &["--seed", "2"]), base);
}
