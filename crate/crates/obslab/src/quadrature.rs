//! Quadrature on balls and circles inside a grid.
//!
//! Ball integrals are plain node-counting sums (every node whose center lies
//! in the closed ball contributes `f * h^2`, no partial cells), so their
//! boundary error is O(h * perimeter). Circle integrals sample the field
//! bilinearly at equispaced angles and apply the periodic trapezoid rule.

use crate::field::{Grid, Point, ScalarField};
use crate::{Error, Result};

/// Midpoint sum of `f` over the closed ball `B_r(center)`.
///
/// Errors when the ball pokes outside the grid's node bounding box.
pub fn ball_integral(f: &ScalarField, center: Point, r: f64) -> Result<f64> {
    let g = *f.grid();
    check_ball(&g, center, r)?;
    let r2 = r * r;
    let (i0, i1, j0, j1) = g.ball_window(center, r);
    let mut sum = 0.0;
    for j in j0..=j1 {
        let dy = g.y(j) - center.y;
        let dy2 = dy * dy;
        for i in i0..=i1 {
            let dx = g.x(i) - center.x;
            if dx * dx + dy2 <= r2 {
                sum += f.at(i, j);
            }
        }
    }
    Ok(sum * g.h * g.h)
}

/// Number of nodes in the closed ball `B_r(center)`.
pub fn ball_node_count(g: &Grid, center: Point, r: f64) -> Result<usize> {
    check_ball(g, center, r)?;
    let r2 = r * r;
    let (i0, i1, j0, j1) = g.ball_window(center, r);
    let mut n = 0usize;
    for j in j0..=j1 {
        let dy = g.y(j) - center.y;
        let dy2 = dy * dy;
        for i in i0..=i1 {
            let dx = g.x(i) - center.x;
            if dx * dx + dy2 <= r2 {
                n += 1;
            }
        }
    }
    Ok(n)
}

/// Trapezoid rule for `∮_{∂B_r(center)} f dσ` over `n_theta` equispaced
/// angles, with bilinear interpolation of `f` between nodes.
///
/// Errors when the circle exits the grid or `n_theta < 64`.
pub fn sphere_integral(f: &ScalarField, center: Point, r: f64, n_theta: usize) -> Result<f64> {
    let g = *f.grid();
    check_ball(&g, center, r)?;
    if n_theta < 64 {
        return Err(Error::Domain(format!("need n_theta >= 64, got {n_theta}")));
    }
    let dtheta = std::f64::consts::TAU / n_theta as f64;
    let mut sum = 0.0;
    for k in 0..n_theta {
        let t = k as f64 * dtheta;
        sum += bilinear(f, center.x + r * t.cos(), center.y + r * t.sin());
    }
    Ok(sum * dtheta * r)
}

/// Circle integral with cubic Lagrange interpolation (4x4 stencil) instead
/// of bilinear sampling. The O(h^4) sampling error matters for functionals
/// that scale circle values by high negative powers of `r`; the stencil
/// needs the circle to stay 3 nodes clear of the box.
pub(crate) fn circle_integral_cubic(
    f: &ScalarField,
    center: Point,
    r: f64,
    n_theta: usize,
) -> Result<f64> {
    let g = *f.grid();
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::Domain(format!("radius must be positive, got {r}")));
    }
    if !g.ball_inside(center, r, 3) {
        return Err(Error::Domain(format!(
            "cubic sampling needs 3 nodes of clearance: circle of radius {r} at ({}, {})",
            center.x, center.y
        )));
    }
    if n_theta < 64 {
        return Err(Error::Domain(format!("need n_theta >= 64, got {n_theta}")));
    }
    let dtheta = std::f64::consts::TAU / n_theta as f64;
    let mut sum = 0.0;
    for k in 0..n_theta {
        let t = k as f64 * dtheta;
        sum += cubic(f, center.x + r * t.cos(), center.y + r * t.sin());
    }
    Ok(sum * dtheta * r)
}

/// Cubic Lagrange weights for the 4 taps around a cell, `t` in [0, 1].
fn lagrange4(t: f64) -> [f64; 4] {
    [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ]
}

/// Separable cubic Lagrange interpolation; exact on cubics. Callers keep the
/// point 2 cells inside the node bounding box.
pub(crate) fn cubic(f: &ScalarField, x: f64, y: f64) -> f64 {
    let g = f.grid();
    let cell = |v: f64, o: f64, n: usize| -> (usize, f64) {
        let t = (v - o) / g.h;
        let i = (t.floor() as isize).clamp(1, n as isize - 3) as usize;
        (i, t - i as f64)
    };
    let (i, tx) = cell(x, g.ox, g.nx);
    let (j, ty) = cell(y, g.oy, g.ny);
    let wx = lagrange4(tx);
    let wy = lagrange4(ty);
    let mut acc = 0.0;
    for (b, wyb) in wy.iter().enumerate() {
        let mut row = 0.0;
        for (a, wxa) in wx.iter().enumerate() {
            row += wxa * f.at(i + a - 1, j + b - 1);
        }
        acc += wyb * row;
    }
    acc
}

/// Bilinear interpolation of `f` at a physical point. The point must lie in
/// the node bounding box; callers validate that (edge points clamp into the
/// outermost cell).
pub(crate) fn bilinear(f: &ScalarField, x: f64, y: f64) -> f64 {
    let g = f.grid();
    let cell = |v: f64, o: f64, n: usize| -> (usize, f64) {
        let t = (v - o) / g.h;
        let i = (t.floor() as isize).clamp(0, n as isize - 2) as usize;
        (i, t - i as f64)
    };
    let (i, tx) = cell(x, g.ox, g.nx);
    let (j, ty) = cell(y, g.oy, g.ny);
    let f00 = f.at(i, j);
    let f10 = f.at(i + 1, j);
    let f01 = f.at(i, j + 1);
    let f11 = f.at(i + 1, j + 1);
    (1.0 - tx) * (1.0 - ty) * f00 + tx * (1.0 - ty) * f10 + (1.0 - tx) * ty * f01 + tx * ty * f11
}

fn check_ball(g: &Grid, center: Point, r: f64) -> Result<()> {
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::Domain(format!("radius must be positive, got {r}")));
    }
    if !g.ball_inside(center, r, 0) {
        return Err(Error::Domain(format!(
            "ball of radius {r} at ({}, {}) exits the grid [{}, {}] x [{}, {}]",
            center.x,
            center.y,
            g.ox,
            g.x_max(),
            g.oy,
            g.y_max()
        )));
    }
    Ok(())
}
