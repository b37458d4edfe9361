//! End-to-end tests of the `obslab` binary: exit codes, artifact layout,
//! and byte determinism, driving the real executable.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use obslab::field::{laplacian, read_field, write_field, Grid, Mask, ScalarField};

fn obslab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_obslab"))
        .args(args)
        .output()
        .expect("binary should spawn")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("no exit code (killed by signal?)")
}

fn stderr_text(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout_text(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn read_json(path: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(path).expect("json artifact should exist");
    serde_json::from_str(&text).expect("artifact should be valid json")
}

/// Analytic potential of f = 1 on the grid of an existing u.field, written
/// next to it; big grids make the summed potential too slow for a test.
fn write_unit_potential(dir: &Path, grid: Grid) -> PathBuf {
    let v = ScalarField::from_fn(grid, "v", |x, y| (x * x + y * y) / 4.0).unwrap();
    let path = dir.join("v.field");
    write_field(&v, &path).unwrap();
    path
}

fn fixture_into(dir: &Path, kind: &str, n: usize) -> Grid {
    let out = obslab(&[
        "fixture",
        "--out",
        dir.to_str().unwrap(),
        "--set",
        &format!("kind={kind}"),
        "--set",
        &format!("n={n}"),
    ]);
    assert_eq!(code(&out), 0, "fixture failed: {}", stderr_text(&out));
    *read_field(dir.join("u.field")).unwrap().grid()
}

#[test]
fn no_arguments_prints_usage_and_succeeds() {
    let out = obslab(&[]);
    assert_eq!(code(&out), 0);
    assert!(stdout_text(&out).contains("usage:"), "{}", stdout_text(&out));
}

#[test]
fn fixture_radial_writes_fields_that_satisfy_the_interface_equation() {
    let dir = tempfile::tempdir().unwrap();
    let out = obslab(&[
        "fixture",
        "--out",
        dir.path().to_str().unwrap(),
        "--set",
        "kind=radial",
        "--set",
        "a=0.5",
        "--set",
        "n=129",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr_text(&out));
    for name in ["u.field", "f.field", "mask.field", "fb.csv", "meta.json"] {
        assert!(dir.path().join(name).exists(), "missing artifact {name}");
    }
    let meta = read_json(&dir.path().join("meta.json"));
    assert_eq!(meta["command"], "fixture");
    assert!(meta["fb_count"].as_u64().unwrap() > 0);

    // Reread the emitted solution and check the interface equation
    // lap u = chi_{u != 0} away from a 2h band around the circle.
    let u = read_field(dir.path().join("u.field")).unwrap();
    let mask = Mask::from_field(&read_field(dir.path().join("mask.field")).unwrap());
    let g = *u.grid();
    let lap = laplacian(&u);
    let mut worst: f64 = 0.0;
    for j in 1..g.ny - 1 {
        for i in 1..g.nx - 1 {
            let (x, y) = (g.x(i), g.y(j));
            if (x.hypot(y) - 0.5).abs() <= 2.0 * g.h {
                continue;
            }
            let chi = if mask.at(i, j) { 0.0 } else { 1.0 };
            worst = worst.max((lap.at(i, j) - chi).abs());
        }
    }
    assert!(worst <= 1e-2, "interface equation residual {worst:.3e}");
}

#[test]
fn fixture_rejects_a_bad_kind_naming_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let out = obslab(&[
        "fixture",
        "--out",
        dir.path().to_str().unwrap(),
        "--set",
        "kind=bogus",
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr_text(&out).contains("kind"), "{}", stderr_text(&out));
}

#[test]
fn unknown_keys_are_rejected_by_name() {
    let dir = tempfile::tempdir().unwrap();
    let out = obslab(&[
        "fixture",
        "--out",
        dir.path().to_str().unwrap(),
        "--set",
        "kind=radial",
        "--set",
        "bogus_knob=1",
    ]);
    assert_eq!(code(&out), 2);
    assert!(stderr_text(&out).contains("bogus_knob"), "{}", stderr_text(&out));
}

#[test]
fn solve_radial_preset_converges_onto_the_analytic_interface_radius() {
    let dir = tempfile::tempdir().unwrap();
    let out = obslab(&[
        "solve",
        "--out",
        dir.path().to_str().unwrap(),
        "--set",
        "preset=radial",
        "--set",
        "n=129",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr_text(&out));
    for name in ["u.field", "zero_set.field", "fb.csv", "meta.json"] {
        assert!(dir.path().join(name).exists(), "missing artifact {name}");
    }
    let meta = read_json(&dir.path().join("meta.json"));
    assert_eq!(meta["converged"], true);
    let h = meta["h"].as_f64().unwrap();
    let mean_r = meta["fb_mean_radius"].as_f64().unwrap();
    assert!(
        (mean_r - 0.5).abs() <= 2.0 * h,
        "interface radius {mean_r} should sit within 2h of 0.5"
    );
}

#[test]
fn solve_with_a_starved_outer_budget_exits_3_but_writes_a_postmortem() {
    let dir = tempfile::tempdir().unwrap();
    let out = obslab(&[
        "solve",
        "--out",
        dir.path().to_str().unwrap(),
        "--set",
        "preset=radial",
        "--set",
        "n=65",
        "--set",
        "max_outer=1",
    ]);
    assert_eq!(code(&out), 3, "{}", stderr_text(&out));
    assert!(dir.path().join("u_partial.field").exists());
    assert!(dir.path().join("mask_last.field").exists());
    let meta = read_json(&dir.path().join("meta.json"));
    assert_eq!(meta["converged"], false);
    assert!(meta["error"].as_str().unwrap().contains("mask"));
}

#[test]
fn zero_density_with_harmonic_boundary_data_leaves_no_contact_set() {
    let dir = tempfile::tempdir().unwrap();
    let grid = Grid::centered(65, 1.0).unwrap();
    let g = ScalarField::from_fn(grid, "g", |x, _| 2.0 + x).unwrap();
    let g_path = dir.path().join("g.field");
    write_field(&g, &g_path).unwrap();
    let out = obslab(&[
        "solve",
        "--out",
        dir.path().to_str().unwrap(),
        "--set",
        "f=const:0.0",
        "--set",
        &format!("g={}", g_path.display()),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr_text(&out));
    let meta = read_json(&dir.path().join("meta.json"));
    assert_eq!(meta["zero_count"], 0);
    assert_eq!(meta["fb_count"], 0);
}

#[test]
fn diagnose_without_solve_artifacts_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let out = obslab(&[
        "diagnose",
        "--out",
        dir.path().to_str().unwrap(),
        "--set",
        "u=never_written.field",
        "--set",
        "f=const:1.0",
    ]);
    assert_eq!(code(&out), 4, "{}", stderr_text(&out));
}

#[test]
fn diagnose_on_a_solution_without_zeros_exits_5() {
    let dir = tempfile::tempdir().unwrap();
    let grid = Grid::centered(65, 1.0).unwrap();
    let u = ScalarField::from_fn(grid, "u", |x, y| 1.0 + x * x + y * y).unwrap();
    let u_path = dir.path().join("u.field");
    write_field(&u, &u_path).unwrap();
    let out = obslab(&[
        "diagnose",
        "--out",
        dir.path().to_str().unwrap(),
        "--set",
        &format!("u={}", u_path.display()),
        "--set",
        "f=const:1.0",
    ]);
    assert_eq!(code(&out), 5, "{}", stderr_text(&out));
}

#[test]
fn diagnose_half_space_fixture_holds_the_projection_plateau() {
    let dir = tempfile::tempdir().unwrap();
    let grid = fixture_into(dir.path(), "half_space", 257);
    let v_path = write_unit_potential(dir.path(), grid);
    let out = obslab(&[
        "diagnose",
        "--out",
        dir.path().to_str().unwrap(),
        "--set",
        &format!("u={}", dir.path().join("u.field").display()),
        "--set",
        "f=const:1.0",
        "--set",
        &format!("v={}", v_path.display()),
        "--set",
        &format!("zero_set={}", dir.path().join("mask.field").display()),
        "--set",
        "r0=0.4",
        "--set",
        "jmax=4",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr_text(&out));

    let csv = std::fs::read_to_string(dir.path().join("scale_report.csv")).unwrap();
    let want = 2.0_f64.sqrt() / 4.0;
    let mut resolved = 0;
    for line in csv.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.last() != Some(&"ok") {
            continue;
        }
        resolved += 1;
        let s: f64 = cells[2].parse().unwrap();
        assert!(
            (s - want).abs() <= 0.05 * want,
            "projection magnitude {s} strayed from {want} on line {line:?}"
        );
    }
    assert!(resolved >= 4, "expected at least 4 resolved scales, got {resolved}");

    let sweep = std::fs::read_to_string(dir.path().join("weiss_sweep.csv")).unwrap();
    assert_eq!(sweep.lines().count(), 13, "header plus 12 sweep radii");
    assert!(dir.path().join("verdict.json").exists());
}

#[test]
fn diagnose_polynomial_fixture_reports_thin_candidate() {
    let dir = tempfile::tempdir().unwrap();
    let grid = fixture_into(dir.path(), "polynomial", 129);
    let v_path = write_unit_potential(dir.path(), grid);
    let out = obslab(&[
        "diagnose",
        "--out",
        dir.path().to_str().unwrap(),
        "--set",
        &format!("u={}", dir.path().join("u.field").display()),
        "--set",
        "f=const:1.0",
        "--set",
        &format!("v={}", v_path.display()),
        "--set",
        &format!("zero_set={}", dir.path().join("mask.field").display()),
        "--set",
        &format!("fb={}", dir.path().join("fb.csv").display()),
        "--set",
        "r0=0.3",
        "--set",
        "jmax=3",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr_text(&out));
    let verdict = read_json(&dir.path().join("verdict.json"));
    assert_eq!(verdict["verdict"], "thin-candidate");
    let meta = read_json(&dir.path().join("meta.json"));
    assert_eq!(meta["verdict"], "thin-candidate");
}

#[test]
fn diagnose_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let grid = fixture_into(dir.path(), "radial", 129);
    let v_path = write_unit_potential(dir.path(), grid);
    let run = |out_dir: &Path| {
        let out = obslab(&[
            "diagnose",
            "--out",
            out_dir.to_str().unwrap(),
            "--set",
            &format!("u={}", dir.path().join("u.field").display()),
            "--set",
            "f=const:1.0",
            "--set",
            &format!("v={}", v_path.display()),
            "--set",
            &format!("zero_set={}", dir.path().join("mask.field").display()),
            "--set",
            "center_x=0.5",
            "--set",
            "r0=0.3",
            "--set",
            "jmax=4",
        ]);
        assert_eq!(code(&out), 0, "{}", stderr_text(&out));
    };
    let out1 = dir.path().join("run1");
    let out2 = dir.path().join("run2");
    run(&out1);
    run(&out2);
    for name in ["scale_report.csv", "weiss_sweep.csv", "verdict.json", "meta.json"] {
        let a = std::fs::read(out1.join(name)).unwrap();
        let b = std::fs::read(out2.join(name)).unwrap();
        assert_eq!(a, b, "artifact {name} differs between identical runs");
    }
}

#[test]
fn sweep_classifies_interface_centers_in_bulk() {
    let dir = tempfile::tempdir().unwrap();
    fixture_into(dir.path(), "radial", 129);
    let out = obslab(&[
        "sweep",
        "--out",
        dir.path().to_str().unwrap(),
        "--set",
        &format!("u={}", dir.path().join("u.field").display()),
        "--set",
        &format!("zero_set={}", dir.path().join("mask.field").display()),
        "--set",
        "r=0.15",
        "--set",
        "n_centers=4",
    ]);
    assert_eq!(code(&out), 0, "{}", stderr_text(&out));
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 4);
    for row in rows {
        assert!(
            row.contains(",ok,regular-candidate,"),
            "disk interface points should classify regular: {row:?}"
        );
    }
}

#[test]
fn config_files_feed_commands_like_set_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "preset = radial\nn = 65\n").unwrap();
    let out = obslab(&[
        "solve",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr_text(&out));
    let meta = read_json(&dir.path().join("out").join("meta.json"));
    assert_eq!(meta["n"], 65);
}
