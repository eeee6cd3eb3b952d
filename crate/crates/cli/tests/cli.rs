use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn conflab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conflab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// A quick configuration touching every experiment.
const SMALL: &str = "
[run]
seed = 7
[potential]
bumps = 2
weak_grid = 128
scaling_radii = [0.5, 2.0]
exp_radii = [0.25]
[disk-area]
measures = 3
grid = 257
radii = [0.35]
centers = 2
[blowup]
radii = [10.0, 100.0]
[torus]
b = [1.0, 2.0]
radii = [0.1, 0.5]
grid = 64
[collar]
ell = [0.01]
ratio_samples = 200
strip_ell = [0.1]
strip_k = [-1]
strip_m = [2]
[annulus]
k = [1.0, 3.0]
";

#[test]
fn empty_parameter_list_gives_zero_rows_and_success() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.toml", "[blowup]\nradii = []\n");
    let out = dir.path().join("rows.csv");
    let o = conflab(&["blowup", "--config", s(&cfg), "--out", s(&out)]);
    assert!(o.status.success(), "{o:?}");
    assert_eq!(std::fs::read_to_string(&out).unwrap(), "experiment,value,bound,pass,ms\n");
    assert!(String::from_utf8_lossy(&o.stdout).ends_with("PASS 0/0\n"));
}

#[test]
fn all_is_byte_identical_across_runs_and_thread_counts() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.toml", SMALL);
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let oa = conflab(&["all", "--config", s(&cfg), "--out", s(&a)]);
    let ob = conflab(&["all", "--config", s(&cfg), "--out", s(&b), "--jobs", "1"]);
    assert!(oa.status.success(), "{}", String::from_utf8_lossy(&oa.stdout));
    assert_eq!(oa.status.code(), ob.status.code());
    let (ta, tb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert!(ta.len() > 500);
    assert_eq!(ta, tb);

    // a different seed moves the random experiments
    let c = dir.path().join("c.csv");
    conflab(&["disk-area", "--config", s(&cfg), "--out", s(&c), "--seed", "8"]);
    let d = dir.path().join("d.csv");
    conflab(&["disk-area", "--config", s(&cfg), "--out", s(&d)]);
    assert_ne!(std::fs::read(&c).unwrap(), std::fs::read(&d).unwrap());
}

#[test]
fn blowup_rows_and_gnuplot_data() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("b.csv");
    let o = conflab(&["blowup", "--out", s(&out)]);
    assert!(o.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let ratios: Vec<f64> = text
        .lines()
        .filter(|l| l.starts_with("blowup,"))
        .map(|l| l.split(',').nth(3).unwrap().parse().unwrap())
        .collect();
    assert_eq!(ratios.len(), 3);
    assert!(ratios.windows(2).all(|w| w[0] < w[1]), "{ratios:?}");
    let dat = std::fs::read_to_string(dir.path().join("b.dat")).unwrap();
    assert!(dat.starts_with("# blowup \n# R value\n"));
}

#[test]
fn torus_data_file_has_b_and_normalized_norm() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.toml", "[torus]\nb = [1.0, 4.0]\nradii = [0.2]\np = [1.0]\ngrid = 64\n");
    let out = dir.path().join("t.csv");
    let o = conflab(&["torus", "--config", s(&cfg), "--out", s(&out)]);
    assert!(o.status.success());
    let dat = std::fs::read_to_string(dir.path().join("t.dat")).unwrap();
    let mut lines = dat.lines();
    assert_eq!(lines.next(), Some("# torus p=1 r=0.2"));
    assert_eq!(lines.next(), Some("# b normalized_norm"));
    assert_eq!(lines.filter(|l| !l.is_empty()).count(), 2);
}

#[test]
fn failing_rows_set_exit_code_and_are_echoed() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "c.toml",
        "[potential]\nbumps = 0\nq = []\nexp_radii = [2.0]\n",
    );
    let out = dir.path().join("p.csv");
    let o = conflab(&["potential", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(1));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("failing rows:\n  potential.exp_growth [eps="), "{stdout}");
    assert!(stdout.trim_end().ends_with("FAIL 1/2"), "{stdout}");
}

#[test]
fn invalid_config_names_the_key() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.toml", "[torus]\ngrid = 100\n");
    let o = conflab(&["torus", "--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("torus.grid") && err.contains("power of two"), "{err}");

    let cfg = write_config(&dir, "d.toml", "[collar]\nell = 0.1\n");
    let o = conflab(&["collar", "--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ell"));

    assert_eq!(conflab(&["annulus", "--jobs", "0"]).status.code(), Some(2));
}

#[test]
fn csv_goes_to_stdout_without_out() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.toml", "[annulus]\np = [1.0]\na = [0.0]\nk = []\n");
    let o = conflab(&["annulus", "--config", s(&cfg)]);
    assert!(o.status.success());
    let stdout = String::from_utf8_lossy(&o.stdout);
    let mut lines = stdout.lines();
    assert_eq!(lines.next(), Some("experiment,param.a,param.p,value,bound,pass,ms"));
    assert_eq!(
        lines.next(),
        Some("annulus,0.000000000000e0,1.000000000000e0,1.000000000000e0,1.000000000000e0,true,")
    );
    assert!(String::from_utf8_lossy(&o.stderr).ends_with("PASS 2/2\n"));
}
