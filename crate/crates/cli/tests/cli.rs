use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dfkg(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dfkg"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn data_rows(csv: &str) -> Vec<&str> {
    csv.lines().filter(|l| !l.starts_with('#')).skip(1).collect()
}

#[test]
fn resolvent_scan_is_deterministic_and_echoes_config() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["resolvent-scan", "--s", "2", "--k-min", "1", "--k-max", "10", "--n-modes", "64"];
    let a = dfkg(dir.path(), &[&args[..], &["--output", "a"]].concat());
    let b = dfkg(dir.path(), &[&args[..], &["--output", "b"]].concat());
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(code(&b), 0);
    for name in ["resolvent_scan.csv", "resolvent_scan.svg", "summary.jsonl"] {
        assert_eq!(
            fs::read(dir.path().join("a").join(name)).unwrap(),
            fs::read(dir.path().join("b").join(name)).unwrap(),
            "{name}"
        );
    }
    let csv = fs::read_to_string(dir.path().join("a/resolvent_scan.csv")).unwrap();
    assert!(csv.contains("# s = 2.0\n") && csv.contains("# per_decade = 16\n"));
    assert!(csv.contains("\ns,m,k,pair,norm,paper_exponent,normalized_ratio\n"));
    // 16 points per decade over one decade
    assert_eq!(data_rows(&csv).len(), 17);
    let first = data_rows(&csv)[0];
    assert!(first.starts_with("2.0000000000000000e0,1.0000000000000000e0,1.0000000000000000e0,L2->L2,"));
    assert!(csv.contains("# summary: sup_ratio = "));
}

#[test]
fn summary_lines_carry_the_required_fields() {
    let dir = tempfile::tempdir().unwrap();
    let o = dfkg(dir.path(), &["verify", "--suite", "acceptance", "--criteria", "6,7"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let text = fs::read_to_string(dir.path().join("out/summary.jsonl")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    for line in lines {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        for key in ["name", "paper_ref", "expected", "measured", "tolerance"] {
            assert!(v[key].is_string(), "{key} in {line}");
        }
        assert_eq!(v["pass"], serde_json::Value::Bool(true));
    }
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("PASS 6 ") && stdout.contains("PASS 7 "));
}

#[test]
fn config_file_with_flag_overrides() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("run.toml"),
        "[observability-scan]\ns = 2.0\ndelta = 0.5\nlambda_max = 50.0\npoints = 6\n",
    )
    .unwrap();
    let o = dfkg(dir.path(), &["--config", "run.toml", "observability-scan", "--delta", "0.25"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("out/observability_scan.csv")).unwrap();
    assert!(csv.contains("# delta = 0.25\n") && csv.contains("# s = 2.0\n"));
    assert!(csv.contains("\ns,lambda,delta,n_modes,C_q\n"));
    let rows = data_rows(&csv);
    // six geometric points plus the eigenvalues pi^2 and (2 pi)^2 inside [1, 50]
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| r.contains(",2.5000000000000000e-1,")));
    assert!(dir.path().join("out/observability_scan.svg").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // truncation guard: k = 256 is far beyond what any allowed grid resolves at s = 1
    let o = dfkg(dir.path(), &["resolvent-scan", "--s", "1", "--m", "1", "--k-min", "1", "--k-max", "256"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("n_modes >= "));

    fs::write(dir.path().join("bad.toml"), "[simulate]\nsteps = 10\n").unwrap();
    let o = dfkg(dir.path(), &["--config", "bad.toml", "simulate"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("steps"));
    assert_eq!(code(&dfkg(dir.path(), &["simulate", "--s", "-1"])), 2);
    assert_eq!(code(&dfkg(dir.path(), &["verify", "--suite", "nope"])), 2);

    // a growing trace violates a bounded-growth check
    fs::write(
        dir.path().join("grow.csv"),
        (1..=30).fold("x,y\n".to_string(), |acc, i| acc + &format!("{i},{}\n", (i * i) as f64)),
    )
    .unwrap();
    let args = ["rate-fit", "--input", "grow.csv", "--x-column", "x", "--y-column", "y", "--check", "true", "--kind", "growth"];
    let o = dfkg(dir.path(), &[&args[..], &["--bound-exponent", "0"]].concat());
    assert_eq!(code(&o), 1);
    let o = dfkg(dir.path(), &[&args[..], &["--bound-exponent", "2"]].concat());
    assert_eq!(code(&o), 0);
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("slope 2.0000000000000"), "{stdout}");
}

#[test]
fn simulate_then_fit_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let sim = ["simulate", "--s", "3", "--n-modes", "32", "--t-final", "40", "--dt", "0.001", "--max-mode", "8"];
    let o = dfkg(dir.path(), &[&sim[..], &["--output", "s1"]].concat());
    assert_eq!(code(&o), 0, "{}{}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr));
    let again = dfkg(dir.path(), &[&sim[..], &["--output", "s2"]].concat());
    assert_eq!(code(&again), 0);
    assert_eq!(fs::read(dir.path().join("s1/simulate.csv")).unwrap(), fs::read(dir.path().join("s2/simulate.csv")).unwrap());
    let other = dfkg(dir.path(), &[&sim[..], &["--output", "s3", "--seed", "2"]].concat());
    assert_eq!(code(&other), 0);
    assert_ne!(fs::read(dir.path().join("s1/simulate.csv")).unwrap(), fs::read(dir.path().join("s3/simulate.csv")).unwrap());

    let csv = fs::read_to_string(dir.path().join("s1/simulate.csv")).unwrap();
    assert!(csv.contains("\nt,energy_norm,l2_norm_u,l2_norm_v\n"));
    assert_eq!(data_rows(&csv).len(), 401);

    let o = dfkg(dir.path(), &["rate-fit", "--input", "s1/simulate.csv", "--model", "envelope", "--x-min", "10", "--output", "fit"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let o = dfkg(dir.path(), &["report", "s1", "fit", "--output", "rep"]);
    assert_eq!(code(&o), 0);
    let md = fs::read_to_string(dir.path().join("rep/report.md")).unwrap();
    assert!(md.contains("2 of 2 checks passed"));

    fs::write(
        dir.path().join("failing.jsonl"),
        "{\"name\":\"x\",\"paper_ref\":\"\",\"expected\":\"\",\"measured\":\"\",\"tolerance\":\"\",\"pass\":false}\n",
    )
    .unwrap();
    let o = dfkg(dir.path(), &["report", "s1", "failing.jsonl", "--output", "rep"]);
    assert_eq!(code(&o), 1);
}
