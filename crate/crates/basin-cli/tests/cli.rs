//! Exit-code and artifact contracts of the command-line interface.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_basin")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin()).args(args).output().expect("binary runs")
}

fn write_cfg(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

const LINEAR: &str = r#"
system = "linear_benchmark"
seed = 1

[params]
lambda = 1.0

[forcing]
terms = [{ amplitude = 1.0, frequency = 1.0 }]

[pullback]
levels = 5
tol = 1e-6

[seed_set]
count = 129
"#;

#[test]
fn pullback_artifact_contains_the_closed_form_point() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), "lin.toml", LINEAR);
    let outdir = tmp.path().join("o");
    let out = run(&[
        "pullback",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        outdir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(outdir.join("section.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x0"));
    let value: f64 = lines.next().unwrap().parse().unwrap();
    assert!((value + 0.5).abs() <= 1e-6, "section point {value}");
    assert_eq!(lines.next(), None, "section collapses to a single point");
    // The sidecar records the schedule it was computed with.
    let meta = std::fs::read_to_string(outdir.join("section.meta.json")).unwrap();
    assert!(meta.contains("\"schedule\""), "{meta}");
    assert!(meta.contains("\"s_list\""), "{meta}");
}

#[test]
fn malformed_config_exits_one_and_names_the_field() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        tmp.path(),
        "bad.toml",
        "system = \"lorenz_auto\"\n[params]\nsigma = -2.0\nb = 2.6\nr = 28.0\n",
    );
    let out = run(&[
        "pullback",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        tmp.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("sigma"), "stderr: {err}");
}

#[test]
fn unparsable_config_exits_one_with_location() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), "bad.toml", "system = \"linear_benchmark");
    let out = run(&[
        "pullback",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        tmp.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("parse"), "stderr: {err}");
}

#[test]
fn non_converged_pullback_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        tmp.path(),
        "shallow.toml",
        r#"
system = "linear_benchmark"

[params]
lambda = 1.0

[forcing]
terms = [{ amplitude = 1.0, frequency = 1.0 }]

[pullback]
s_list = [-0.5, -1.0]
tol = 1e-12

[seed_set]
count = 65
"#,
    );
    let outdir = tmp.path().join("o");
    let out = run(&[
        "pullback",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        outdir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    // Artifacts are still written with the full history.
    let meta = std::fs::read_to_string(outdir.join("section.meta.json")).unwrap();
    assert!(meta.contains("\"converged\": false"), "{meta}");
}

#[test]
fn uniform_budget_exhaustion_exits_two_with_history() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        tmp.path(),
        "u.toml",
        r#"
system = "linear_benchmark"

[params]
lambda = 1.0

[forcing]
terms = [{ amplitude = 1.0, frequency = 1.0 }]

[uniform]
t_window = 0.1
s_span = 6.283185307179586
s_count = 4
tol = 1e-12
max_doublings = 1

[seed_set]
count = 65
"#,
    );
    let outdir = tmp.path().join("o");
    let out = run(&[
        "uniform",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        outdir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let meta = std::fs::read_to_string(outdir.join("uniform.meta.json")).unwrap();
    assert!(meta.contains("\"history\""), "{meta}");
}

#[test]
fn equi_without_sections_exits_one_naming_the_artifact() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        tmp.path(),
        "equi.toml",
        r#"
system = "linear_benchmark"

[params]
lambda = 1.0

[forcing]
terms = [{ amplitude = 1.0, frequency = 1.0 }]

[seed_set]
count = 65

[grid]
axes = [{ name = "lambda", values = [1.0, 2.0] }]

[equi]
s_values = [-2.0]
sections = "sections"
"#,
    );
    let outdir = tmp.path().join("o");
    let out = run(&[
        "equi",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        outdir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(
        err.contains("section_0000"),
        "stderr should name the missing artifact: {err}"
    );
}

#[test]
fn verify_bounds_rejects_benchmark_systems() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(tmp.path(), "lin.toml", LINEAR);
    let out = run(&[
        "verify-bounds",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        tmp.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn sweep_summary_reparses_to_the_recomputed_distances() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        tmp.path(),
        "sweep.toml",
        r#"
system = "linear_benchmark"
seed = 5

[params]
lambda = 1.0

[forcing]
terms = [{ amplitude = 1.0, frequency = 1.0 }]

[pullback]
levels = 5
tol = 1e-6

[seed_set]
count = 129

[grid]
axes = [{ name = "lambda", values = [1.0, 1.5, 2.0] }]
"#,
    );
    let outdir = tmp.path().join("o");
    let out = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        outdir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    // Re-parse the summary and check it against distances recomputed from
    // the section artifacts on disk.
    let summary = std::fs::read_to_string(outdir.join("summary.csv")).unwrap();
    let mut lines = summary.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header, ["lambda_a", "lambda_b", "forward", "backward", "symmetric"]);
    let sections_dir = outdir.join("sections");
    let sections: Vec<_> = (0..3)
        .map(|i| basin_cli::io::read_section(&sections_dir, &format!("section_{i:04}")).unwrap())
        .collect();
    let mut n = 0;
    for (row, (i, j)) in lines.zip([(0usize, 1usize), (1, 2)]) {
        let cols: Vec<f64> = row.split(',').map(|c| c.parse().unwrap()).collect();
        assert_eq!(cols[0], sections[i].lambda.value(0));
        assert_eq!(cols[1], sections[j].lambda.value(0));
        let pair =
            basin_core::geometry::hausdorff(&sections[i].cloud, &sections[j].cloud).unwrap();
        assert_eq!(cols[2], pair.forward);
        assert_eq!(cols[3], pair.backward);
        assert_eq!(cols[4], pair.symmetric);
        n += 1;
    }
    assert_eq!(n, 2);
}

#[test]
fn sweep_with_singleton_grid_writes_empty_summary() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        tmp.path(),
        "single.toml",
        r#"
system = "linear_benchmark"

[params]
lambda = 1.0

[forcing]
terms = [{ amplitude = 1.0, frequency = 1.0 }]

[pullback]
levels = 5
tol = 1e-6

[seed_set]
count = 65

[grid]
axes = [{ name = "lambda", values = [1.0] }]
"#,
    );
    let outdir = tmp.path().join("o");
    let out = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        outdir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let summary = std::fs::read_to_string(outdir.join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1, "only the header: {summary}");
}

#[test]
fn unknown_grid_axis_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_cfg(
        tmp.path(),
        "badgrid.toml",
        r#"
system = "linear_benchmark"

[params]
lambda = 1.0

[grid]
axes = [{ name = "sigma", values = [1.0, 2.0] }]
"#,
    );
    let out = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        tmp.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("sigma"), "{err}");
}
