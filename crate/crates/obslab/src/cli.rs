//! Batch front end behind the `obslab` binary.
//!
//! Four commands: `fixture` writes an analytic benchmark, `solve` runs one
//! of the relaxation solvers, `diagnose` produces the dyadic scale report
//! with a thickness verdict and an energy sweep, `sweep` classifies many
//! interface points at once. Configuration is a flat `key = value` set,
//! merged from an optional `--config` file and repeatable `--set key=value`
//! overrides; unknown keys are errors, never silently ignored.
//!
//! Every command writes machine-readable artifacts (field files, CSV, JSON)
//! into `--out` and prints a one-line summary. Identical inputs produce
//! byte-identical artifacts. Exit codes: 0 success, 2 bad configuration,
//! 3 solver non-convergence (post-mortem artifacts still written), 4 i/o or
//! parse failure, 5 no free boundary point to work on.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::diagnostics::{free_boundary_extract, weiss_fields, weiss_from_fields, BoundarySign};
use crate::field::{fmt_g17, laplacian, read_field, write_field, Grid, Mask, Point, ScalarField};
use crate::fixtures::{make_fixture, radial_profile, FixtureKind, FixtureSpec};
use crate::pipeline::{
    regularity_report, rows_to_csv, s_boundedness_check, thickness_classify, PipelineConfig,
    SBoundedness,
};
use crate::potential::newtonian_potential;
use crate::solver::{
    solve_no_sign, solve_obstacle_psor, solve_poisson, SolveParams, SolveResult,
};
use crate::{Error, Result};

const USAGE: &str = "\
obslab: finite-difference laboratory for obstacle-type free boundaries

usage: obslab <command> [--config PATH] [--out DIR] [--set key=value]...

commands:
  fixture    write an analytic benchmark (u, f, mask, interface points)
  solve      run a solver on supplied fields or a preset
  diagnose   dyadic scale report, thickness verdict, energy sweep
  sweep      thickness verdicts along the interface

Configuration keys are flat `key = value` pairs, read from the --config
file first and then from --set overrides; the README lists the keys each
command understands. Exit codes: 0 success, 2 bad configuration, 3 solver
non-convergence (artifacts still written), 4 i/o or parse failure, 5 no
free boundary.
";

/// Entry point for the binary: parse, dispatch, map errors to exit codes.
/// Errors print to stderr; summaries print to stdout.
pub fn run(args: &[String]) -> i32 {
    match run_inner(args) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// The exit code contract: 2 configuration, 3 non-convergence, 4 i/o and
/// parsing, 5 missing free boundary.
pub fn exit_code(e: &Error) -> i32 {
    if e.is_convergence_failure() {
        return 3;
    }
    match e {
        Error::Io { .. } | Error::Parse { .. } => 4,
        Error::NoFreeBoundary(_) => 5,
        _ => 2,
    }
}

fn run_inner(args: &[String]) -> Result<()> {
    let cli = parse_args(args)?;
    let command = match &cli.command {
        None => {
            print!("{USAGE}");
            return Ok(());
        }
        Some(c) => c.clone(),
    };
    let mut cfg = RunConfig::load(cli.config.as_deref(), &cli.sets)?;
    fs::create_dir_all(&cli.out).map_err(|e| io_err(&cli.out, e))?;
    match command.as_str() {
        "fixture" => cmd_fixture(&mut cfg, &cli.out),
        "solve" => cmd_solve(&mut cfg, &cli.out),
        "diagnose" => cmd_diagnose(&mut cfg, &cli.out),
        "sweep" => cmd_sweep(&mut cfg, &cli.out),
        other => Err(Error::Config(format!(
            "unknown command {other:?}; expected fixture, solve, diagnose, or sweep"
        ))),
    }
}

struct Cli {
    command: Option<String>,
    config: Option<PathBuf>,
    out: PathBuf,
    sets: Vec<(String, String)>,
}

fn parse_args(args: &[String]) -> Result<Cli> {
    let mut command = None;
    let mut config = None;
    let mut out = PathBuf::from("out");
    let mut sets = Vec::new();
    let mut it = args.iter();
    while let Some(arg) = it.next() {
        match arg.as_str() {
            "--config" => {
                let v = it.next().ok_or_else(|| Error::Config("--config needs a path".into()))?;
                config = Some(PathBuf::from(v));
            }
            "--out" => {
                let v = it.next().ok_or_else(|| Error::Config("--out needs a directory".into()))?;
                out = PathBuf::from(v);
            }
            "--set" => {
                let v = it.next().ok_or_else(|| Error::Config("--set needs key=value".into()))?;
                let (k, val) = v
                    .split_once('=')
                    .ok_or_else(|| Error::Config(format!("--set {v:?} is not key=value")))?;
                sets.push((k.trim().to_string(), val.trim().to_string()));
            }
            "--help" | "-h" | "help" => {
                command = None;
                return Ok(Cli { command, config, out, sets });
            }
            flag if flag.starts_with("--") => {
                return Err(Error::Config(format!("unknown flag {flag:?}")));
            }
            positional => {
                if command.is_some() {
                    return Err(Error::Config(format!(
                        "unexpected extra argument {positional:?}"
                    )));
                }
                command = Some(positional.to_string());
            }
        }
    }
    Ok(Cli { command, config, out, sets })
}

/// Flat key = value configuration with strict consumption: every key must be
/// taken by the command, and leftovers are reported as unknown.
#[derive(Debug)]
struct RunConfig {
    map: BTreeMap<String, String>,
    taken: BTreeSet<String>,
}

impl RunConfig {
    fn load(file: Option<&Path>, sets: &[(String, String)]) -> Result<RunConfig> {
        let mut map = BTreeMap::new();
        if let Some(path) = file {
            let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
            for (lineno, raw) in text.lines().enumerate() {
                let line = raw.split('#').next().unwrap_or("").trim();
                if line.is_empty() {
                    continue;
                }
                let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                    path: path.display().to_string(),
                    msg: format!("line {}: expected key = value, got {raw:?}", lineno + 1),
                })?;
                map.insert(k.trim().to_string(), v.trim().to_string());
            }
        }
        for (k, v) in sets {
            map.insert(k.clone(), v.clone());
        }
        Ok(RunConfig { map, taken: BTreeSet::new() })
    }

    fn take(&mut self, key: &str) -> Option<String> {
        self.taken.insert(key.to_string());
        self.map.get(key).cloned()
    }

    fn take_string(&mut self, key: &str, default: &str) -> String {
        self.take(key).unwrap_or_else(|| default.to_string())
    }

    fn need(&mut self, key: &str) -> Result<String> {
        self.take(key)
            .ok_or_else(|| Error::Config(format!("missing required key {key:?}")))
    }

    fn take_f64(&mut self, key: &str, default: f64) -> Result<f64> {
        self.take_opt_f64(key).map(|v| v.unwrap_or(default))
    }

    fn take_opt_f64(&mut self, key: &str) -> Result<Option<f64>> {
        match self.take(key) {
            None => Ok(None),
            Some(raw) => raw
                .parse::<f64>()
                .map(Some)
                .map_err(|_| Error::Config(format!("{key}: not a number: {raw:?}"))),
        }
    }

    fn take_usize(&mut self, key: &str, default: usize) -> Result<usize> {
        match self.take(key) {
            None => Ok(default),
            Some(raw) => raw
                .parse::<usize>()
                .map_err(|_| Error::Config(format!("{key}: not a count: {raw:?}"))),
        }
    }

    fn take_bool(&mut self, key: &str, default: bool) -> Result<bool> {
        match self.take(key).as_deref() {
            None => Ok(default),
            Some("true") | Some("1") | Some("yes") => Ok(true),
            Some("false") | Some("0") | Some("no") => Ok(false),
            Some(raw) => Err(Error::Config(format!("{key}: not a boolean: {raw:?}"))),
        }
    }

    /// Error out on any key no command consumed.
    fn finish(&mut self) -> Result<()> {
        let unknown: Vec<String> =
            self.map.keys().filter(|k| !self.taken.contains(*k)).cloned().collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(Error::Config(format!("unknown key(s): {}", unknown.join(", "))))
        }
    }
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io { path: path.display().to_string(), source }
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| io_err(path, e))
}

/// Six significant digits for human summaries; data files use 17.
fn fmt_g6(v: f64) -> String {
    format!("{v:.5e}")
}

fn json_num(v: f64) -> serde_json::Value {
    serde_json::Number::from_f64(v)
        .map(serde_json::Value::Number)
        .unwrap_or(serde_json::Value::Null)
}

fn json_opt(v: Option<f64>) -> serde_json::Value {
    v.map(json_num).unwrap_or(serde_json::Value::Null)
}

fn interface_csv(points: &[Point]) -> String {
    let mut out = String::from("x,y\n");
    for p in points {
        let _ = writeln!(out, "{},{}", fmt_g17(p.x), fmt_g17(p.y));
    }
    out
}

fn mean_norm(points: &[Point]) -> Option<f64> {
    if points.is_empty() {
        return None;
    }
    Some(points.iter().map(|p| p.x.hypot(p.y)).sum::<f64>() / points.len() as f64)
}

fn sbound_json(s: &SBoundedness) -> serde_json::Value {
    serde_json::json!({
        "max_s": json_num(s.max_s),
        "median_s": json_num(s.median_s),
        "dyadic_exponent": json_opt(s.dyadic_exponent),
        "max_growth": json_opt(s.max_growth),
        "bounded": s.bounded,
    })
}

// ---------------------------------------------------------------- fixture

fn parse_kind(raw: &str) -> Result<FixtureKind> {
    match raw.replace('-', "_").as_str() {
        "half_space" => Ok(FixtureKind::HalfSpace),
        "polynomial" => Ok(FixtureKind::Polynomial),
        "radial" => Ok(FixtureKind::Radial { a: 0.5 }),
        other => Err(Error::Config(format!(
            "kind: unknown fixture kind {other:?}; expected radial, half_space, or polynomial"
        ))),
    }
}

fn cmd_fixture(cfg: &mut RunConfig, out: &Path) -> Result<()> {
    let kind_raw = cfg.need("kind")?;
    let mut kind = parse_kind(&kind_raw)?;
    let a = cfg.take_f64("a", 0.5)?;
    if let FixtureKind::Radial { a: ref mut slot } = kind {
        *slot = a;
    }
    let n = cfg.take_usize("n", 257)?;
    let half = cfg.take_f64("half", 1.0)?;
    let shift = Point::new(cfg.take_f64("shift_x", 0.0)?, cfg.take_f64("shift_y", 0.0)?);
    let angle = cfg.take_f64("angle", 0.0)?;
    cfg.finish()?;
    let spec = FixtureSpec::posed(kind, shift, angle);
    let grid = Grid::centered(n, half)?;
    let fix = make_fixture(&spec, grid)?;

    write_field(&fix.result.u, out.join("u.field"))?;
    write_field(&fix.f, out.join("f.field"))?;
    write_field(&fix.result.zero_set.to_field("mask"), out.join("mask.field"))?;
    write_text(&out.join("fb.csv"), &interface_csv(&fix.result.free_boundary))?;
    let meta = serde_json::json!({
        "command": "fixture",
        "kind": kind_raw,
        "a": if matches!(kind, FixtureKind::Radial { .. }) { json_num(a) } else { serde_json::Value::Null },
        "shift": [json_num(shift.x), json_num(shift.y)],
        "angle": json_num(angle),
        "n": n,
        "h": json_num(grid.h),
        "zero_count": fix.result.zero_set.count(),
        "fb_count": fix.result.free_boundary.len(),
        "fb_mean_radius": json_opt(mean_norm(&fix.result.free_boundary)),
        "zero_tol": json_num(fix.result.zero_tol),
    });
    write_text(&out.join("meta.json"), &serde_json::to_string_pretty(&meta).unwrap())?;
    println!(
        "fixture {kind_raw}: {n}x{n} grid, {} zero nodes, {} interface points -> {}",
        fix.result.zero_set.count(),
        fix.result.free_boundary.len(),
        out.display()
    );
    Ok(())
}

// ------------------------------------------------------------------ solve

/// A field argument: a path to a FIELD file, `const:<value>`, or `zero`.
enum FieldArg {
    File(ScalarField),
    Const(f64),
}

fn parse_field_arg(cfg_key: &str, raw: &str) -> Result<FieldArg> {
    if raw == "zero" {
        return Ok(FieldArg::Const(0.0));
    }
    if let Some(v) = raw.strip_prefix("const:") {
        let c = v
            .parse::<f64>()
            .map_err(|_| Error::Config(format!("{cfg_key}: bad constant {v:?}")))?;
        return Ok(FieldArg::Const(c));
    }
    Ok(FieldArg::File(read_field(raw)?))
}

fn materialize(arg: FieldArg, grid: Grid, name: &str) -> Result<ScalarField> {
    match arg {
        FieldArg::File(f) => {
            if *f.grid() != grid {
                return Err(Error::Domain(format!(
                    "field {name} lives on a different grid than the other inputs"
                )));
            }
            Ok(f)
        }
        FieldArg::Const(c) => ScalarField::constant(grid, name, c),
    }
}

fn solve_params(cfg: &mut RunConfig) -> Result<SolveParams> {
    let defaults = SolveParams::default();
    Ok(SolveParams {
        linear_tol: cfg.take_f64("linear_tol", defaults.linear_tol)?,
        max_sweeps: cfg.take_usize("max_sweeps", defaults.max_sweeps)?,
        zero_tol: cfg.take_opt_f64("zero_tol")?,
        grad_tol: cfg.take_opt_f64("grad_tol")?,
        max_outer: cfg.take_usize("max_outer", defaults.max_outer)?,
        relax: cfg.take_opt_f64("relax")?,
        initial_mask: match cfg.take("mask") {
            None => None,
            Some(path) => Some(Mask::from_field(&read_field(path)?)),
        },
    })
}

fn cmd_solve(cfg: &mut RunConfig, out: &Path) -> Result<()> {
    let solver = cfg.take_string("solver", "no_sign");
    let preset = cfg.take("preset");
    let n = cfg.take_usize("n", 257)?;
    let half = cfg.take_f64("half", 1.0)?;
    let a = cfg.take_f64("a", 0.5)?;
    let f_arg = cfg.take("f");
    let g_arg = cfg.take("g");
    let v_arg = cfg.take("v");
    let params = solve_params(cfg)?;
    cfg.finish()?;
    if preset.is_some() && (f_arg.is_some() || g_arg.is_some() || v_arg.is_some()) {
        return Err(Error::Config(
            "preset=radial supplies f and g; do not also pass f, g, or v".into(),
        ));
    }

    let (f, bd) = match preset.as_deref() {
        Some("radial") => {
            let grid = Grid::centered(n, half)?;
            let f = ScalarField::constant(grid, "f", 1.0)?;
            let bd = ScalarField::from_fn(grid, "g", |x, y| radial_profile(a, x.hypot(y)))?;
            (f, bd)
        }
        Some(other) => {
            return Err(Error::Config(format!(
                "preset: unknown preset {other:?}; expected radial"
            )));
        }
        None => {
            let f_spec = match (&f_arg, &v_arg) {
                (Some(f), None) => parse_field_arg("f", f)?,
                (None, Some(v)) => FieldArg::File(read_field(v).map(|v| {
                    let mut f = laplacian(&v);
                    f.rename("f");
                    f
                })?),
                (Some(_), Some(_)) => {
                    return Err(Error::Config("give f or v, not both".into()));
                }
                (None, None) => {
                    return Err(Error::Config(
                        "solve needs f (or v) and g: paths, const:<value>, or preset=radial"
                            .into(),
                    ));
                }
            };
            let g_spec = parse_field_arg(
                "g",
                &g_arg.ok_or_else(|| Error::Config("missing required key \"g\"".into()))?,
            )?;
            // A file input fixes the grid; otherwise n and half do.
            let grid = match (&f_spec, &g_spec) {
                (FieldArg::File(f), _) => *f.grid(),
                (_, FieldArg::File(g)) => *g.grid(),
                _ => Grid::centered(n, half)?,
            };
            (materialize(f_spec, grid, "f")?, materialize(g_spec, grid, "g")?)
        }
    };

    let grid = *f.grid();
    let outcome = match solver.as_str() {
        "no_sign" => solve_no_sign(&f, &bd, &params),
        "psor" => solve_obstacle_psor(&f, &bd, &params),
        "poisson" => {
            let u = solve_poisson(&f, &bd, &params)?;
            // Package the plain solve in the common result shape: the zero
            // set is wherever u vanishes to tolerance, with no pinning.
            let eps = params.zero_tol.unwrap_or(1e-8 * bd.boundary_max_abs() + 1e-12);
            let zero_set = height_mask(&u, eps);
            let fb = free_boundary_extract(&u, &zero_set, eps);
            let defect = laplacian(&u);
            let mut residual: f64 = 0.0;
            for j in 1..grid.ny - 1 {
                for i in 1..grid.nx - 1 {
                    residual = residual.max((defect.at(i, j) - f.at(i, j)).abs());
                }
            }
            Ok(SolveResult {
                u,
                zero_set,
                free_boundary: fb,
                outer_iters: 1,
                converged: true,
                residual,
                zero_tol: eps,
            })
        }
        other => {
            return Err(Error::Config(format!(
                "solver: unknown solver {other:?}; expected no_sign, psor, or poisson"
            )));
        }
    };

    let result = match outcome {
        Ok(r) => r,
        Err(e) => {
            write_postmortem(out, &solver, &e)?;
            return Err(e);
        }
    };

    write_field(&result.u, out.join("u.field"))?;
    write_field(&result.zero_set.to_field("zero_set"), out.join("zero_set.field"))?;
    write_text(&out.join("fb.csv"), &interface_csv(&result.free_boundary))?;
    let meta = serde_json::json!({
        "command": "solve",
        "solver": solver,
        "n": grid.nx,
        "h": json_num(grid.h),
        "converged": result.converged,
        "outer_iters": result.outer_iters,
        "residual": json_num(result.residual),
        "zero_tol": json_num(result.zero_tol),
        "zero_count": result.zero_set.count(),
        "fb_count": result.free_boundary.len(),
        "fb_mean_radius": json_opt(mean_norm(&result.free_boundary)),
    });
    write_text(&out.join("meta.json"), &serde_json::to_string_pretty(&meta).unwrap())?;
    println!(
        "solve {solver}: converged in {} outer iterations, residual {}, {} interface points -> {}",
        result.outer_iters,
        fmt_g6(result.residual),
        result.free_boundary.len(),
        out.display()
    );
    Ok(())
}

/// On solver failure, write whatever iterate the error carries so the run
/// can be inspected, then let the error drive the exit code.
fn write_postmortem(out: &Path, solver: &str, e: &Error) -> Result<()> {
    let mut meta = serde_json::json!({
        "command": "solve",
        "solver": solver,
        "converged": false,
        "error": e.to_string(),
    });
    match e {
        Error::LinearStall { partial, residual, sweeps, .. }
        | Error::PsorStall { partial, residual, sweeps, .. } => {
            write_field(partial, out.join("u_partial.field"))?;
            meta["residual"] = json_num(*residual);
            meta["sweeps"] = serde_json::json!(sweeps);
        }
        Error::MaskStalled { state, outer, delta } => {
            write_field(&state.u, out.join("u_partial.field"))?;
            write_field(&state.prev.to_field("mask_prev"), out.join("mask_prev.field"))?;
            write_field(&state.last.to_field("mask_last"), out.join("mask_last.field"))?;
            meta["outer"] = serde_json::json!(outer);
            meta["delta"] = serde_json::json!(delta);
        }
        Error::MaskCycle { state, outer, period } => {
            write_field(&state.u, out.join("u_partial.field"))?;
            write_field(&state.prev.to_field("mask_prev"), out.join("mask_prev.field"))?;
            write_field(&state.last.to_field("mask_last"), out.join("mask_last.field"))?;
            meta["outer"] = serde_json::json!(outer);
            meta["period"] = serde_json::json!(period);
        }
        _ => {}
    }
    write_text(&out.join("meta.json"), &serde_json::to_string_pretty(&meta).unwrap())
}

fn height_mask(u: &ScalarField, tol: f64) -> Mask {
    let g = *u.grid();
    let mut m = Mask::empty(g);
    for j in 0..g.ny {
        for i in 0..g.nx {
            if u.at(i, j).abs() <= tol {
                m.set(i, j, true);
            }
        }
    }
    m
}

// --------------------------------------------------------------- diagnose

fn pipeline_config(cfg: &mut RunConfig) -> Result<PipelineConfig> {
    let d = PipelineConfig::default();
    Ok(PipelineConfig {
        eps_thick: cfg.take_f64("eps_thick", d.eps_thick)?,
        eps_thin: cfg.take_f64("eps_thin", d.eps_thin)?,
        sign_tol: cfg.take_opt_f64("sign_tol")?,
        graph_tol: cfg.take_f64("graph_tol", d.graph_tol)?,
        kappa: cfg.take_f64("kappa", d.kappa)?,
        bound_factor: cfg.take_f64("bound_factor", d.bound_factor)?,
        growth_exp_tol: cfg.take_f64("growth_exp_tol", d.growth_exp_tol)?,
        n_angles: cfg.take_usize("n_angles", d.n_angles)?,
    })
}

/// Interface points from a `fb.csv` artifact: an `x,y` header line then one
/// point per line, 17 significant digits.
fn read_interface_csv(path: &str) -> Result<Vec<Point>> {
    let text = fs::read_to_string(path).map_err(|e| io_err(Path::new(path), e))?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (lineno == 0 && line == "x,y") {
            continue;
        }
        let bad = || Error::Parse {
            path: path.to_string(),
            msg: format!("line {}: expected x,y with two numbers, got {line:?}", lineno + 1),
        };
        let (xs, ys) = line.split_once(',').ok_or_else(bad)?;
        let x = xs.trim().parse::<f64>().map_err(|_| bad())?;
        let y = ys.trim().parse::<f64>().map_err(|_| bad())?;
        if !(x.is_finite() && y.is_finite()) {
            return Err(bad());
        }
        out.push(Point::new(x, y));
    }
    Ok(out)
}

/// Shared input loading for diagnose and sweep: solution field, zero set,
/// and interface points, either from a supplied `fb` artifact (which can
/// carry area-free interface lines no extraction recovers) or re-extracted
/// from the zero set.
fn load_solution(cfg: &mut RunConfig) -> Result<(SolveResult, f64)> {
    let u = read_field(cfg.need("u")?)?;
    let zero_tol = match cfg.take_opt_f64("zero_tol")? {
        Some(t) => t,
        None => 1e-8 * u.boundary_max_abs() + 1e-12,
    };
    let zero_set = match cfg.take("zero_set") {
        Some(path) => {
            let m = Mask::from_field(&read_field(path)?);
            if m.grid() != u.grid() {
                return Err(Error::Domain("zero_set lives on a different grid than u".into()));
            }
            m
        }
        None => height_mask(&u, zero_tol),
    };
    let free_boundary = match cfg.take("fb") {
        Some(path) => read_interface_csv(&path)?,
        None => free_boundary_extract(&u, &zero_set, zero_tol),
    };
    if free_boundary.is_empty() {
        return Err(Error::NoFreeBoundary(
            "the zero set bounds no area anywhere on this grid".into(),
        ));
    }
    let h = u.grid().h;
    Ok((
        SolveResult {
            u,
            zero_set,
            free_boundary,
            outer_iters: 0,
            converged: true,
            residual: 0.0,
            zero_tol,
        },
        h,
    ))
}

fn nearest_interface_point(fb: &[Point], want: Point) -> Point {
    *fb.iter()
        .min_by(|a, b| a.dist(want).total_cmp(&b.dist(want)))
        .expect("caller guarantees interface points exist")
}

fn cmd_diagnose(cfg: &mut RunConfig, out: &Path) -> Result<()> {
    let (result, h) = load_solution(cfg)?;
    let grid = *result.u.grid();
    let f = match parse_field_arg("f", &cfg.need("f")?)? {
        FieldArg::File(f) => {
            if *f.grid() != grid {
                return Err(Error::Domain("f lives on a different grid than u".into()));
            }
            f
        }
        FieldArg::Const(c) => ScalarField::constant(grid, "f", c)?,
    };
    let v = match cfg.take("v") {
        Some(path) => {
            let v = read_field(path)?;
            if *v.grid() != grid {
                return Err(Error::Domain("v lives on a different grid than u".into()));
            }
            v
        }
        // Direct summation is quadratic in the node count; fine at
        // diagnostic sizes, supply v= for big grids.
        None => newtonian_potential(&f)?.v,
    };
    let want = Point::new(cfg.take_f64("center_x", 0.0)?, cfg.take_f64("center_y", 0.0)?);
    let r0 = cfg.take_f64("r0", 0.4)?;
    let jmax = cfg.take_usize("jmax", 5)?;
    let window = cfg.take_f64("r", r0)?;
    let sweep_r_max = cfg.take_f64("sweep_r_max", r0)?;
    let sweep_r_min = cfg.take_f64("sweep_r_min", 4.0 * h)?;
    let sweep_count = cfg.take_usize("sweep_count", 12)?;
    let plots = cfg.take_bool("plots", false)?;
    let pcfg = pipeline_config(cfg)?;
    cfg.finish()?;

    let center = nearest_interface_point(&result.free_boundary, want);
    let rows = regularity_report(&result, &v, &f, center, r0, jmax, &pcfg)?;
    let sbound = s_boundedness_check(&rows, &pcfg).ok();
    let verdict = thickness_classify(&result, center, window, &pcfg)?;

    if sweep_count < 2 {
        return Err(Error::Config(format!("sweep_count must be at least 2, got {sweep_count}")));
    }
    if !(sweep_r_min > 0.0 && sweep_r_min < sweep_r_max) {
        return Err(Error::Config(format!(
            "sweep radii must satisfy 0 < sweep_r_min < sweep_r_max, got {sweep_r_min} .. {sweep_r_max}"
        )));
    }
    let (bulk, usq) = weiss_fields(&result.u, &f);
    let mut sweep_csv = String::from("r,w_plus,w_minus\n");
    for k in 0..sweep_count {
        let t = k as f64 / (sweep_count - 1) as f64;
        let r = sweep_r_max * (sweep_r_min / sweep_r_max).powf(t);
        let wp = weiss_from_fields(&bulk, &usq, center, r, BoundarySign::Plus)?.value;
        let wm = weiss_from_fields(&bulk, &usq, center, r, BoundarySign::Minus)?.value;
        let _ = writeln!(sweep_csv, "{},{},{}", fmt_g17(r), fmt_g17(wp), fmt_g17(wm));
    }

    write_text(&out.join("scale_report.csv"), &rows_to_csv(&rows))?;
    write_text(&out.join("verdict.json"), &verdict.to_json())?;
    write_text(&out.join("weiss_sweep.csv"), &sweep_csv)?;
    let meta = serde_json::json!({
        "command": "diagnose",
        "center": [json_num(center.x), json_num(center.y)],
        "center_requested": [json_num(want.x), json_num(want.y)],
        "r0": json_num(r0),
        "jmax": jmax,
        "window": json_num(window),
        "zero_tol": json_num(result.zero_tol),
        "n_interface": result.free_boundary.len(),
        "s_boundedness": sbound.as_ref().map(sbound_json).unwrap_or(serde_json::Value::Null),
        "verdict": verdict.verdict.as_str(),
    });
    write_text(&out.join("meta.json"), &serde_json::to_string_pretty(&meta).unwrap())?;
    if plots {
        write_text(&out.join("scale_report.gp"), SCALE_PLOT)?;
        write_text(&out.join("weiss_sweep.gp"), WEISS_PLOT)?;
    }

    let bounded = sbound
        .as_ref()
        .map(|s| if s.bounded { "bounded" } else { "UNBOUNDED" })
        .unwrap_or("boundedness not assessable");
    println!(
        "diagnose at ({}, {}): verdict {}, projection magnitude {} across scales -> {}",
        fmt_g6(center.x),
        fmt_g6(center.y),
        verdict.verdict.as_str(),
        bounded,
        out.display()
    );
    Ok(())
}

const SCALE_PLOT: &str = "\
set datafile separator \",\"
set key autotitle columnhead outside
set logscale x
set xlabel \"r\"
plot \"scale_report.csv\" using 2:3 with linespoints title \"s\", \\
     \"\" using 2:4 with linespoints title \"lambda\", \\
     \"\" using 2:5 with linespoints title \"delta\", \\
     \"\" using 2:8 with linespoints title \"growth\"
";

const WEISS_PLOT: &str = "\
set datafile separator \",\"
set key autotitle columnhead outside
set logscale x
set xlabel \"r\"
plot \"weiss_sweep.csv\" using 1:2 with linespoints title \"W+\", \\
     \"\" using 1:3 with linespoints title \"W-\"
";

// ------------------------------------------------------------------ sweep

fn cmd_sweep(cfg: &mut RunConfig, out: &Path) -> Result<()> {
    let (result, _) = load_solution(cfg)?;
    let window = cfg.take_f64("r", 0.2)?;
    let n_centers = cfg.take_usize("n_centers", 8)?;
    let pcfg = pipeline_config(cfg)?;
    cfg.finish()?;
    if n_centers == 0 {
        return Err(Error::Config("n_centers must be at least 1".into()));
    }

    let fb = &result.free_boundary;
    let picked = n_centers.min(fb.len());

    let mut csv =
        String::from("center_x,center_y,status,verdict,delta,min_u_half,graph_rms,n_interface\n");
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for k in 0..picked {
        let c = fb[k * fb.len() / picked];
        match thickness_classify(&result, c, window, &pcfg) {
            Ok(v) => {
                *counts.entry(v.verdict.as_str()).or_insert(0) += 1;
                let _ = writeln!(
                    csv,
                    "{},{},ok,{},{},{},{},{}",
                    fmt_g17(c.x),
                    fmt_g17(c.y),
                    v.verdict.as_str(),
                    fmt_g17(v.delta),
                    fmt_g17(v.min_u_half),
                    v.graph.as_ref().map(|g| fmt_g17(g.rms)).unwrap_or_else(|| "na".into()),
                    v.n_interface,
                );
            }
            Err(Error::Domain(_) | Error::NoFreeBoundary(_)) => {
                // A window that exits the grid or finds no interface is a
                // property of this center, not a run failure.
                *counts.entry("skipped").or_insert(0) += 1;
                let _ = writeln!(
                    csv,
                    "{},{},skipped,na,na,na,na,0",
                    fmt_g17(c.x),
                    fmt_g17(c.y),
                );
            }
            Err(e) => return Err(e),
        }
    }
    write_text(&out.join("sweep.csv"), &csv)?;
    let meta = serde_json::json!({
        "command": "sweep",
        "window": json_num(window),
        "n_centers": picked,
        "counts": counts,
        "zero_tol": json_num(result.zero_tol),
    });
    write_text(&out.join("meta.json"), &serde_json::to_string_pretty(&meta).unwrap())?;
    let summary = counts
        .iter()
        .map(|(k, n)| format!("{n} {k}"))
        .collect::<Vec<_>>()
        .join(", ");
    println!("sweep over {picked} centers: {summary} -> {}", out.display());
    Ok(())
}
