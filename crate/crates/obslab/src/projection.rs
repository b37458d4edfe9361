//! Best-matching harmonic quadratic over a ball.
//!
//! For a field `u` and a ball `B_r(c)` this finds the trace-free symmetric
//! matrix `M` minimizing the Frobenius distance between the (constant)
//! Hessian of the quadratic `x -> x^T M x / 2` and the discrete Hessian of
//! `u`, averaged over the ball. Because the span of harmonic quadratics has
//! constant Hessians, the minimizer has a closed form: take the node average
//! `Mbar` of the central-difference Hessian over the ball, then remove the
//! trace, `M = Mbar - (tr Mbar / 2) I`. The split `M = S * P` with
//! `S = |M|_F` and `|P|_F = 1` separates magnitude from shape.
//!
//! `project_bruteforce` reaches the same matrix by assembling and solving the
//! 2x2 least-squares normal equations in an explicit basis; it exists as an
//! independent cross-check and for tests.

use crate::field::{hessian_field, Grid, HessianField, Point, ScalarField};
use crate::{Error, Result};

/// Symmetric 2x2 matrix, stored by its three independent entries.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sym2 {
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
}

impl Sym2 {
    pub const ZERO: Sym2 = Sym2 { xx: 0.0, xy: 0.0, yy: 0.0 };

    pub fn frob(self) -> f64 {
        (self.xx * self.xx + 2.0 * self.xy * self.xy + self.yy * self.yy).sqrt()
    }

    pub fn trace(self) -> f64 {
        self.xx + self.yy
    }

    /// Remove the trace: `A - (tr A / 2) I`.
    pub fn deviator(self) -> Sym2 {
        let half_tr = 0.5 * self.trace();
        Sym2 { xx: self.xx - half_tr, xy: self.xy, yy: self.yy - half_tr }
    }

    pub fn scale(self, c: f64) -> Sym2 {
        Sym2 { xx: c * self.xx, xy: c * self.xy, yy: c * self.yy }
    }

    /// Largest absolute eigenvalue.
    pub fn eig_abs_max(self) -> f64 {
        let mid = 0.5 * (self.xx + self.yy);
        let rad = (0.25 * (self.xx - self.yy).powi(2) + self.xy * self.xy).sqrt();
        (mid + rad).abs().max((mid - rad).abs())
    }

    /// Quadratic form `x^T A x / 2` at the offset `(dx, dy)`.
    pub fn half_form(self, dx: f64, dy: f64) -> f64 {
        0.5 * (self.xx * dx * dx + 2.0 * self.xy * dx * dy + self.yy * dy * dy)
    }
}

impl std::ops::Sub for Sym2 {
    type Output = Sym2;

    fn sub(self, o: Sym2) -> Sym2 {
        Sym2 { xx: self.xx - o.xx, xy: self.xy - o.xy, yy: self.yy - o.yy }
    }
}

/// Harmonic quadratic closest to `u` near a point, split into magnitude and
/// shape. `m = s * p`; when `s` vanishes the shape is undefined and `p` is
/// zero with `degenerate` set.
#[derive(Debug, Clone, Copy)]
pub struct HarmonicProjection {
    pub center: Point,
    pub r: f64,
    /// Frobenius magnitude, `>= 0`.
    pub s: f64,
    /// Unit-Frobenius trace-free shape (zero when degenerate).
    pub p: Sym2,
    /// Unnormalized trace-free Hessian of the projection.
    pub m: Sym2,
    pub degenerate: bool,
}

impl HarmonicProjection {
    fn from_m(center: Point, r: f64, m: Sym2) -> HarmonicProjection {
        let s = m.frob();
        let (p, degenerate) = if s > 0.0 { (m.scale(1.0 / s), false) } else { (Sym2::ZERO, true) };
        HarmonicProjection { center, r, s, p, m, degenerate }
    }

    /// Value of the projection polynomial at `x` (relative to the center).
    pub fn eval(&self, x: Point) -> f64 {
        self.m.half_form(x.x - self.center.x, x.y - self.center.y)
    }
}

fn require_margin(g: &Grid, center: Point, r: f64) -> Result<()> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain(format!("ball radius must be positive, got {r}")));
    }
    if !g.ball_inside(center, r, 1) {
        return Err(Error::Domain(format!(
            "ball of radius {r} at ({}, {}) needs one node of margin inside the grid",
            center.x, center.y
        )));
    }
    Ok(())
}

/// Node average of the discrete Hessian over the closed ball.
pub(crate) fn mean_hessian(hess: &HessianField, center: Point, r: f64) -> Result<Sym2> {
    let g = *hess.grid();
    require_margin(&g, center, r)?;
    let (i0, i1, j0, j1) = g.ball_window(center, r);
    let r2 = r * r;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    let mut count = 0u64;
    for j in j0..=j1 {
        for i in i0..=i1 {
            let dx = g.x(i) - center.x;
            let dy = g.y(j) - center.y;
            if dx * dx + dy * dy <= r2 {
                let k = g.idx(i, j);
                sxx += hess.h11.values()[k];
                sxy += hess.h12.values()[k];
                syy += hess.h22.values()[k];
                count += 1;
            }
        }
    }
    if count == 0 {
        return Err(Error::Domain(format!("ball of radius {r} contains no grid node")));
    }
    let inv = 1.0 / count as f64;
    Ok(Sym2 { xx: sxx * inv, xy: sxy * inv, yy: syy * inv })
}

/// Closed-form projection: trace-free part of the ball-averaged Hessian.
pub fn project(u: &ScalarField, center: Point, r: f64) -> Result<HarmonicProjection> {
    let hess = hessian_field(u);
    project_hessian(&hess, center, r)
}

/// Same as [`project`], starting from a precomputed Hessian field. Useful
/// when many balls are probed on one field.
pub fn project_hessian(hess: &HessianField, center: Point, r: f64) -> Result<HarmonicProjection> {
    let m = mean_hessian(hess, center, r)?.deviator();
    Ok(HarmonicProjection::from_m(center, r, m))
}

/// Least-squares route to the same matrix: minimize the ball-summed Frobenius
/// mismatch over the span of the saddle basis `E1 = diag(2, -2)` (Hessian of
/// `x^2 - y^2`) and `E2 = [[0, 1], [1, 0]]` (Hessian of `x y`), assembling
/// and solving the normal equations explicitly.
pub fn project_bruteforce(u: &ScalarField, center: Point, r: f64) -> Result<HarmonicProjection> {
    let hess = hessian_field(u);
    let g = *u.grid();
    require_margin(&g, center, r)?;
    let (i0, i1, j0, j1) = g.ball_window(center, r);
    let r2 = r * r;
    // Normal equations for coefficients (a, b) of a*E1 + b*E2.
    let (mut a11, mut a12, mut a22) = (0.0, 0.0, 0.0);
    let (mut b1, mut b2) = (0.0, 0.0);
    let mut count = 0u64;
    for j in j0..=j1 {
        for i in i0..=i1 {
            let dx = g.x(i) - center.x;
            let dy = g.y(j) - center.y;
            if dx * dx + dy * dy <= r2 {
                let k = g.idx(i, j);
                let (hxx, hxy, hyy) =
                    (hess.h11.values()[k], hess.h12.values()[k], hess.h22.values()[k]);
                // Frobenius inner products with the basis matrices.
                a11 += 8.0;
                a12 += 0.0;
                a22 += 2.0;
                b1 += 2.0 * hxx - 2.0 * hyy;
                b2 += 2.0 * hxy;
                count += 1;
            }
        }
    }
    if count == 0 {
        return Err(Error::Domain(format!("ball of radius {r} contains no grid node")));
    }
    let det = a11 * a22 - a12 * a12;
    let a = (b1 * a22 - a12 * b2) / det;
    let b = (a11 * b2 - a12 * b1) / det;
    let m = Sym2 { xx: 2.0 * a, xy: b, yy: -2.0 * a };
    Ok(HarmonicProjection::from_m(center, r, m))
}

/// Largest-eigenvalue gap between the projections of `u - v` at radius `r`
/// and radius `r / 2`, halved. Adding any harmonic field to `u` leaves the
/// value unchanged in the continuum; on the grid it is unchanged up to the
/// stencil truncation of that harmonic addition.
pub fn dyadic_difference(u: &ScalarField, v: &ScalarField, center: Point, r: f64) -> Result<f64> {
    crate::field::check_same_grid(u, v, "dyadic_difference")?;
    let hu = hessian_field(u);
    let hv = hessian_field(v);
    let at = |rr: f64| -> Result<Sym2> {
        let mu = mean_hessian(&hu, center, rr)?.deviator();
        let mv = mean_hessian(&hv, center, rr)?.deviator();
        Ok(mu - mv)
    };
    let d = at(r)? - at(0.5 * r)?;
    Ok(0.5 * d.eig_abs_max())
}

/// One CSV row per projection: `center_x,center_y,r,S,P11,P12,P22`.
pub fn projection_csv_row(p: &HarmonicProjection) -> String {
    use crate::field::fmt_g17 as g;
    format!(
        "{},{},{},{},{},{},{}",
        g(p.center.x),
        g(p.center.y),
        g(p.r),
        g(p.s),
        g(p.p.xx),
        g(p.p.xy),
        g(p.p.yy)
    )
}
