//! Analytic benchmark solutions of `lap u = f * chi_{u != 0}` with `f = 1`,
//! sampled on a grid together with their exact zero sets and interfaces.
//!
//! Three base profiles, each optionally rotated and translated:
//!
//! * half space: `u = (x+)^2 / 2`, dead on a closed half plane;
//! * polynomial: `u = x^2 / 2`, zero set a single line of measure zero
//!   (the interface is still that line: it bounds the interior of
//!   `{u != 0}`);
//! * radial: dead disk of radius `a`, outside it the unique radial profile
//!   with `u(a) = u'(a) = 0` and `lap u = 1`.
//!
//! Interface point lists come from the closed-form geometry (line or
//! circle), not from node scanning, so they exist even when the zero set is
//! a measure-zero line that node masks cannot represent faithfully.

use crate::field::{Grid, Mask, Point, ScalarField};
use crate::solver::SolveResult;
use crate::Result;

/// Base profile of a fixture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FixtureKind {
    HalfSpace,
    Polynomial,
    Radial { a: f64 },
}

/// A base profile posed in a rotated, translated frame: local coordinates
/// are `x' = R(-angle) (x - shift)`.
#[derive(Debug, Clone, Copy)]
pub struct FixtureSpec {
    pub kind: FixtureKind,
    pub shift: Point,
    /// Rotation of the fixture frame, radians counterclockwise.
    pub angle: f64,
}

impl FixtureSpec {
    pub fn plain(kind: FixtureKind) -> FixtureSpec {
        FixtureSpec { kind, shift: Point::new(0.0, 0.0), angle: 0.0 }
    }

    pub fn posed(kind: FixtureKind, shift: Point, angle: f64) -> FixtureSpec {
        FixtureSpec { kind, shift, angle }
    }

    /// World point to fixture-local coordinates.
    fn local(&self, x: f64, y: f64) -> (f64, f64) {
        let (s, c) = self.angle.sin_cos();
        let (dx, dy) = (x - self.shift.x, y - self.shift.y);
        (c * dx + s * dy, -s * dx + c * dy)
    }

    /// Fixture-local point to world coordinates.
    fn world(&self, xl: f64, yl: f64) -> Point {
        let (s, c) = self.angle.sin_cos();
        Point::new(self.shift.x + c * xl - s * yl, self.shift.y + s * xl + c * yl)
    }
}

/// A sampled fixture: the exact solution packaged like a solver output,
/// plus its right-hand side.
#[derive(Debug, Clone)]
pub struct Fixture {
    /// Exact `u`, node zero set, and analytic interface points.
    pub result: SolveResult,
    /// The density, identically 1 for all profiles.
    pub f: ScalarField,
}

/// Exact radial profile for the dead disk of radius `a`: zero for
/// `rho <= a`, else `(rho^2 - a^2)/4 - (a^2 / 2) ln(rho / a)`.
pub fn radial_profile(a: f64, rho: f64) -> f64 {
    if rho <= a {
        0.0
    } else {
        0.25 * (rho * rho - a * a) - 0.5 * a * a * (rho / a).ln()
    }
}

/// Radial derivative of [`radial_profile`] for `rho >= a`:
/// `rho/2 - a^2 / (2 rho)`; vanishes at the interface.
pub fn radial_profile_slope(a: f64, rho: f64) -> f64 {
    if rho <= a {
        0.0
    } else {
        0.5 * rho - 0.5 * a * a / rho
    }
}

/// Node-snap width for membership in analytic zero sets: catches exact hits
/// and rotated floating-point dust, nothing at node scale.
fn snap(grid: &Grid) -> f64 {
    1e-9 * grid.h
}

/// Sample points of the line `x' = 0` clipped to the grid rectangle,
/// spaced `h` along the line.
fn line_points(spec: &FixtureSpec, grid: &Grid) -> Vec<Point> {
    let half_diag = (grid.x_max() - grid.ox).hypot(grid.y_max() - grid.oy);
    let kmax = (half_diag / grid.h).ceil() as i64;
    let eps = 1e-12 * (1.0 + half_diag);
    let mut out = Vec::new();
    for k in -kmax..=kmax {
        let p = spec.world(0.0, k as f64 * grid.h);
        if p.x >= grid.ox - eps
            && p.x <= grid.x_max() + eps
            && p.y >= grid.oy - eps
            && p.y <= grid.y_max() + eps
        {
            out.push(p);
        }
    }
    out
}

/// Sample points of the circle `|x'| = a` clipped to the grid rectangle,
/// spaced about `h` along the arc.
fn circle_points(spec: &FixtureSpec, grid: &Grid, a: f64) -> Vec<Point> {
    let n = ((std::f64::consts::TAU * a / grid.h).ceil() as usize).max(16);
    let eps = 1e-12 * (1.0 + a);
    let mut out = Vec::new();
    for k in 0..n {
        let t = std::f64::consts::TAU * k as f64 / n as f64;
        let p = spec.world(a * t.cos(), a * t.sin());
        if p.x >= grid.ox - eps
            && p.x <= grid.x_max() + eps
            && p.y >= grid.oy - eps
            && p.y <= grid.y_max() + eps
        {
            out.push(p);
        }
    }
    out
}

/// Build the exact solution fields for `spec` on `grid`.
pub fn make_fixture(spec: &FixtureSpec, grid: Grid) -> Result<Fixture> {
    if let FixtureKind::Radial { a } = spec.kind {
        if !(a > 0.0) || !a.is_finite() {
            return Err(crate::Error::Config(format!(
                "radial fixture needs a positive dead radius, got {a}"
            )));
        }
    }
    let tol = snap(&grid);
    let (u, zero_set, free_boundary) = match spec.kind {
        FixtureKind::HalfSpace => {
            let u = ScalarField::from_fn(grid, "u", |x, y| {
                let (xl, _) = spec.local(x, y);
                let xp = xl.max(0.0);
                0.5 * xp * xp
            })?;
            let m = Mask::from_fn(grid, |x, y| spec.local(x, y).0 <= tol);
            (u, m, line_points(spec, &grid))
        }
        FixtureKind::Polynomial => {
            let u = ScalarField::from_fn(grid, "u", |x, y| {
                let (xl, _) = spec.local(x, y);
                0.5 * xl * xl
            })?;
            let m = Mask::from_fn(grid, |x, y| spec.local(x, y).0.abs() <= tol);
            (u, m, line_points(spec, &grid))
        }
        FixtureKind::Radial { a } => {
            let u = ScalarField::from_fn(grid, "u", |x, y| {
                let (xl, yl) = spec.local(x, y);
                radial_profile(a, xl.hypot(yl))
            })?;
            let m = Mask::from_fn(grid, |x, y| {
                let (xl, yl) = spec.local(x, y);
                xl.hypot(yl) <= a + tol
            });
            (u, m, circle_points(spec, &grid, a))
        }
    };
    let f = ScalarField::constant(grid, "f", 1.0)?;
    Ok(Fixture {
        result: SolveResult {
            u,
            zero_set,
            free_boundary,
            outer_iters: 0,
            converged: true,
            residual: 0.0,
            zero_tol: 1e-12,
        },
        f,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::laplacian;

    fn grid(n: usize) -> Grid {
        Grid::centered(n, 1.0).unwrap()
    }

    #[test]
    fn half_space_satisfies_the_equation_off_the_interface_band() {
        let fix = make_fixture(&FixtureSpec::plain(FixtureKind::HalfSpace), grid(129)).unwrap();
        let g = *fix.result.u.grid();
        let lap = laplacian(&fix.result.u);
        for j in 1..g.ny - 1 {
            for i in 1..g.nx - 1 {
                let x = g.x(i);
                if x >= g.h * 0.999 {
                    assert!((lap.at(i, j) - 1.0).abs() <= 1e-9, "at x = {x}");
                } else if x <= -g.h * 0.999 {
                    assert!(lap.at(i, j).abs() <= 1e-9, "at x = {x}");
                } else {
                    // On the wall column the stencil averages the two sides.
                    assert!((lap.at(i, j) - 0.5).abs() <= 1e-9, "at x = {x}");
                }
            }
        }
        // The zero set is the closed left half plane.
        assert!(fix.result.zero_set.at(0, 0));
        assert!(fix.result.zero_set.at(g.nx / 2, 5));
        assert!(!fix.result.zero_set.at(g.nx / 2 + 1, 5));
    }

    #[test]
    fn rotated_half_space_is_still_stencil_exact_off_the_band() {
        let spec = FixtureSpec::posed(
            FixtureKind::HalfSpace,
            Point::new(0.1, -0.05),
            30f64.to_radians(),
        );
        let fix = make_fixture(&spec, grid(129)).unwrap();
        let g = *fix.result.u.grid();
        let lap = laplacian(&fix.result.u);
        for j in 1..g.ny - 1 {
            for i in 1..g.nx - 1 {
                let (xl, _) = spec.local(g.x(i), g.y(j));
                // The profile is piecewise quadratic, so the 5-point stencil
                // is exact whenever the whole stencil sits on one side.
                if xl > 1.5 * g.h {
                    assert!((lap.at(i, j) - 1.0).abs() <= 1e-9);
                } else if xl < -1.5 * g.h {
                    assert!(lap.at(i, j).abs() <= 1e-9);
                }
            }
        }
        for p in &fix.result.free_boundary {
            let (xl, _) = spec.local(p.x, p.y);
            assert!(xl.abs() <= 1e-9, "interface point off the wall: {xl:.2e}");
        }
        assert!(!fix.result.free_boundary.is_empty());
    }

    #[test]
    fn polynomial_fixture_has_a_measure_zero_line_mask() {
        let fix = make_fixture(&FixtureSpec::plain(FixtureKind::Polynomial), grid(129)).unwrap();
        let g = *fix.result.u.grid();
        let lap = laplacian(&fix.result.u);
        for j in 1..g.ny - 1 {
            for i in 1..g.nx - 1 {
                assert!((lap.at(i, j) - 1.0).abs() <= 1e-9);
            }
        }
        // Exactly the x = 0 node column (the centered grid hits it).
        assert_eq!(fix.result.zero_set.count(), g.ny);
        for p in &fix.result.free_boundary {
            assert!(p.x.abs() <= 1e-12);
        }
    }

    #[test]
    fn radial_profile_is_smooth_at_the_interface_and_solves_the_equation() {
        let a = 0.5;
        // Value and slope vanish at the interface by construction.
        assert_eq!(radial_profile(a, a), 0.0);
        assert_eq!(radial_profile_slope(a, a), 0.0);
        // The closed-form slope matches a centered difference of the value.
        let d = 1e-6;
        for &rho in &[0.6, 0.75, 0.9, 1.2] {
            let fd = (radial_profile(a, rho + d) - radial_profile(a, rho - d)) / (2.0 * d);
            assert!(
                (fd - radial_profile_slope(a, rho)).abs() <= 1e-8,
                "slope mismatch at rho = {rho}"
            );
        }
        // In polar coordinates lap u = u'' + u'/rho = 1 outside the disk.
        for &rho in &[0.55, 0.7, 1.0] {
            let upp = (radial_profile_slope(a, rho + d) - radial_profile_slope(a, rho - d))
                / (2.0 * d);
            let lap = upp + radial_profile_slope(a, rho) / rho;
            assert!((lap - 1.0).abs() <= 1e-7, "lap {lap} at rho = {rho}");
        }
    }

    #[test]
    fn radial_fixture_fields_are_consistent() {
        let fix =
            make_fixture(&FixtureSpec::plain(FixtureKind::Radial { a: 0.5 }), grid(129)).unwrap();
        let g = *fix.result.u.grid();
        let lap = laplacian(&fix.result.u);
        for j in 1..g.ny - 1 {
            for i in 1..g.nx - 1 {
                let rho = g.x(i).hypot(g.y(j));
                if rho >= 0.5 + 2.0 * g.h && rho <= 0.95 {
                    // Fourth derivatives of the log profile are modest here,
                    // so the truncation error is a small multiple of h^2.
                    assert!(
                        (lap.at(i, j) - 1.0).abs() <= 1e-3,
                        "residual {} at rho = {rho}",
                        lap.at(i, j) - 1.0
                    );
                }
                if rho <= 0.5 - 2.0 * g.h {
                    assert!(lap.at(i, j).abs() <= 1e-12);
                }
            }
        }
        for p in &fix.result.free_boundary {
            assert!((p.x.hypot(p.y) - 0.5).abs() <= 1e-9);
        }
        // Interface sampling resolves the circle at node spacing.
        assert!(fix.result.free_boundary.len() >= 200);
        // Zero set on the mask: |u| vanishes identically.
        for j in 0..g.ny {
            for i in 0..g.nx {
                if fix.result.zero_set.at(i, j) {
                    assert_eq!(fix.result.u.at(i, j), 0.0);
                }
            }
        }
    }

    #[test]
    fn shifted_radial_fixture_moves_the_dead_disk() {
        let spec = FixtureSpec::posed(FixtureKind::Radial { a: 0.3 }, Point::new(0.2, -0.1), 0.0);
        let fix = make_fixture(&spec, grid(65)).unwrap();
        let g = *fix.result.u.grid();
        for j in 0..g.ny {
            for i in 0..g.nx {
                let rho = (g.x(i) - 0.2).hypot(g.y(j) + 0.1);
                assert_eq!(fix.result.zero_set.at(i, j), rho <= 0.3 + 1e-9 * g.h);
            }
        }
        for p in &fix.result.free_boundary {
            assert!(((p.x - 0.2).hypot(p.y + 0.1) - 0.3).abs() <= 1e-9);
        }
    }

    #[test]
    fn bad_radial_parameter_is_rejected() {
        let err = make_fixture(&FixtureSpec::plain(FixtureKind::Radial { a: -1.0 }), grid(33));
        assert!(matches!(err, Err(crate::Error::Config(_))));
    }
}
