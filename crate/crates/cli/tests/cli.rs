use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const LINEAR: &str = "\
experiment.kind = representation
grid.T = 1.0
grid.N = 80
paths.M = 2^10
paths.seed = 7
generator = linear(0,1,0)
probe.t = 0
probe.y = 0
probe.z = 1
probe.epsilons = 0.2, 0.1, 0.05, 0.025
probe.tolerance = 1e-3
";

const SOLVE: &str = "\
experiment.kind = solve
grid.T = 1.0
grid.N = 16
paths.M = 2^10
paths.seed = 3
generator = kappa_abs_z(0.5)
terminal = cosine
";

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_bsde-lab"));
    c.env_remove("BSDE_LAB_OUT");
    c
}

fn write_config(dir: &Path, name: &str, text: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p
}

fn run(dir: &Path, config: &Path, extra: &[&str]) -> Output {
    bin().arg("run").arg(config).args(extra).current_dir(dir).output().unwrap()
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

#[test]
fn linear_representation_rows_are_exact() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "lin.cfg", LINEAR);
    let out = tmp.path().join("out");
    let o = run(tmp.path(), &cfg, &["--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    let csv = fs::read_to_string(out.join("results.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "l2_error").unwrap();
    let rows: Vec<f64> = lines.map(|l| l.split(',').nth(col).unwrap().parse().unwrap()).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|e| *e <= 1e-3), "{rows:?}");
    assert!(out.join("verdicts.json").exists());
}

#[test]
fn missing_key_is_a_parse_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "bad.cfg", &SOLVE.replace("grid.T = 1.0\n", ""));
    let o = run(tmp.path(), &cfg, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o.stderr).contains("grid.T"), "{}", text(&o.stderr));
}

#[test]
fn malformed_value_reports_line_and_column() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "bad.cfg", &SOLVE.replace("grid.N = 16", "grid.N = sixteen"));
    let o = run(tmp.path(), &cfg, &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = text(&o.stderr);
    assert!(err.contains("line 3") && err.contains("column"), "{err}");
}

#[test]
fn unreadable_config_exits_two() {
    let tmp = TempDir::new().unwrap();
    let o = run(tmp.path(), &tmp.path().join("nope.cfg"), &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn a5_violation_is_a_verdict_failure() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(
        tmp.path(),
        "a5.cfg",
        "experiment.kind = axiom-suite\ngrid.T = 1.0\ngrid.N = 16\npaths.M = 2^10\ngenerator = linear(0,1,0.5)\nterminal.family = affine(0,1)\n",
    );
    let o = run(tmp.path(), &cfg, &["--out-dir", "out"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(text(&o.stdout).contains("A5 violated"), "{}", text(&o.stdout));
}

#[test]
fn list_is_stable_and_flags_convexity() {
    let a = bin().arg("list").output().unwrap();
    let b = bin().arg("list").output().unwrap();
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let s = text(&a.stdout);
    let line = s.lines().find(|l| l.trim_start().starts_with("kappa_abs_z")).unwrap();
    assert!(line.contains("convex_in_z=true"), "{line}");
    for section in ["generators", "forward models", "terminals", "experiments"] {
        assert!(s.contains(section));
    }
}

#[test]
fn output_directory_from_environment() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "s.cfg", SOLVE);
    let env_dir = tmp.path().join("from-env");
    let o = bin().arg("run").arg(&cfg).env("BSDE_LAB_OUT", &env_dir).current_dir(tmp.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    assert!(env_dir.join("results.csv").exists());

    let flag_dir = tmp.path().join("from-flag");
    let o = bin()
        .arg("run")
        .arg(&cfg)
        .arg("--out-dir")
        .arg(&flag_dir)
        .env("BSDE_LAB_OUT", tmp.path().join("ignored"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(flag_dir.join("results.csv").exists());
    assert!(!tmp.path().join("ignored").exists());
}

#[test]
fn outputs_are_reproducible_across_thread_counts() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), "s.cfg", SOLVE);
    let read = |d: &str| {
        (
            fs::read(tmp.path().join(d).join("results.csv")).unwrap(),
            fs::read(tmp.path().join(d).join("verdicts.json")).unwrap(),
        )
    };
    for (dir, jobs) in [("a", "1"), ("b", "3")] {
        let o = run(tmp.path(), &cfg, &["--out-dir", dir, "--jobs", jobs]);
        assert_eq!(o.status.code(), Some(0), "{}", text(&o.stderr));
    }
    assert_eq!(read("a"), read("b"));
    let o = run(tmp.path(), &cfg, &["--out-dir", "c", "--seed", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert_ne!(read("a").0, read("c").0);
}
